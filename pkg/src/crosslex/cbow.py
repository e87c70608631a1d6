"""CBOW training with negative sampling.

Classic word2vec-style trainer: for each target token the context is
the mean of the input vectors inside a window whose half-width is drawn
uniformly in [1, window] per token; the logistic loss contrasts the
true word against `negatives` draws from the unigram distribution
raised to 0.75. Noise draws that collide with the target or with a
word of the current context are dropped (an observed positive is never
treated as noise; on realistic vocabularies collisions are rare and
this matches plain target-filtered sampling). Gradients are
accumulated over `batch_size` target tokens per optimizer step and the
learning rate decays linearly to zero over the total token budget.

Only input (context) vectors are emitted; output vectors are internal.
Single-threaded training is bit-deterministic per seed. The optional
multi-worker mode applies gradients without mutual exclusion and
forfeits determinism.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .corpus import Sentence, Vocabulary, build_vocabulary
from .embedding import EmbeddingMatrix
from .errors import TrainingError

log = logging.getLogger(__name__)

_PROBE_SIZE = 512
_MAX_LOGIT = 50.0


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -_MAX_LOGIT, _MAX_LOGIT)))


@dataclass(frozen=True)
class CbowConfig:
    dim: int = 300
    epochs: int = 5
    negatives: int = 8
    window: int = 5
    batch_size: int = 3000  # target tokens per optimizer step
    learning_rate: float = 0.05
    min_count: int = 1
    seed: int = 1
    subsample: float = 0.0  # frequent-word discard threshold, 0 disables

    def __post_init__(self):
        for name in ("dim", "negatives", "window", "batch_size", "min_count"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.subsample < 0:
            raise ValueError("subsample must be >= 0")


class CbowTrainer:
    """Holds model state across epochs; records a held-out probe loss.

    epoch_losses[0] is the probe loss before training, epoch_losses[i]
    the loss after epoch i.
    """

    def __init__(
        self,
        sentences: Iterable[Sentence],
        config: CbowConfig,
        init: EmbeddingMatrix | None = None,
        freeze_words: Iterable[str] | None = None,
    ):
        self.config = config
        sentences = [s for s in sentences if s]
        if not sentences:
            raise TrainingError("training corpus is empty")
        if init is not None and init.dim != config.dim:
            raise ValueError(f"init dim {init.dim} != config dim {config.dim}")
        self.vocab: Vocabulary = build_vocabulary(sentences, config.min_count)
        if len(self.vocab) == 0:
            raise TrainingError(
                f"no words with frequency >= min_count {config.min_count}"
            )
        index = self.vocab._index
        self.encoded: list[np.ndarray] = []
        for sent in sentences:
            ids = [index[w] for w in sent if w in index]
            if ids:
                self.encoded.append(np.array(ids, dtype=np.int64))
        self.n_tokens = int(sum(len(s) for s in self.encoded))
        if self.n_tokens == 0:
            raise TrainingError("corpus holds no in-vocabulary tokens")

        self._rng = np.random.default_rng(config.seed)
        self.syn0 = self._init_input_vectors(init)
        self.syn1 = np.zeros_like(self.syn0)

        counts = np.array(self.vocab.counts, dtype=np.float64)
        noise = counts**0.75
        self._noise_cum = np.cumsum(noise / noise.sum())
        if config.subsample > 0:
            freq = counts / counts.sum()
            ratio = config.subsample / freq
            self._keep_prob = np.minimum(1.0, np.sqrt(ratio) + ratio)
        else:
            self._keep_prob = None

        self._frozen = np.zeros(len(self.vocab), dtype=bool)
        for w in freeze_words or ():
            if w in self.vocab:
                self._frozen[self.vocab.index(w)] = True

        self._probe = self._build_probe()
        self.epoch_losses: list[float] = []

    def _init_input_vectors(self, init: EmbeddingMatrix | None) -> np.ndarray:
        cfg = self.config
        bound = 0.5 / cfg.dim
        syn0 = self._rng.uniform(-bound, bound, size=(len(self.vocab), cfg.dim))
        if init is not None:
            for i, word in enumerate(self.vocab.words):
                if word in init.vocab:
                    syn0[i] = init.vector(word)
        return syn0

    def _build_probe(self) -> list[tuple[np.ndarray, int, np.ndarray]]:
        """Fixed (context, target, negatives) triples for loss tracking."""
        cfg = self.config
        rng = np.random.default_rng(cfg.seed + 1)
        positions = [
            (si, pos)
            for si, sent in enumerate(self.encoded)
            for pos in range(len(sent))
        ]
        if len(positions) > _PROBE_SIZE:
            chosen = rng.choice(len(positions), size=_PROBE_SIZE, replace=False)
            positions = [positions[i] for i in chosen]
        probe = []
        for si, pos in positions:
            sent = self.encoded[si]
            b = int(rng.integers(1, cfg.window + 1))
            ctx = np.concatenate([sent[max(0, pos - b) : pos], sent[pos + 1 : pos + b + 1]])
            if ctx.size == 0:
                continue
            target = int(sent[pos])
            negs = self._sample_negatives(rng, target, ctx)
            probe.append((ctx, target, negs))
        return probe

    def _sample_negatives(
        self, rng: np.random.Generator, target: int, ctx: np.ndarray
    ) -> np.ndarray:
        negs = np.searchsorted(self._noise_cum, rng.random(self.config.negatives))
        excluded = set(ctx.tolist())
        excluded.add(target)
        return np.array([x for x in negs.tolist() if x not in excluded], dtype=np.int64)

    def probe_loss(self) -> float:
        """Mean negative-sampling logistic loss on the fixed probe batch."""
        total = 0.0
        for ctx, target, negs in self._probe:
            h = self.syn0[ctx].mean(axis=0)
            pos = _sigmoid(float(h @ self.syn1[target]))
            total -= np.log(max(pos, 1e-12))
            if negs.size:
                neg = _sigmoid(-(self.syn1[negs] @ h))
                total -= float(np.log(np.maximum(neg, 1e-12)).sum())
        return total / max(1, len(self._probe))

    def _train_span(
        self,
        sentences: Sequence[np.ndarray],
        rng: np.random.Generator,
        span_tokens: int,
        total_tokens: int,
        start_processed: int,
    ) -> None:
        """Run one pass over `sentences`, flushing every batch_size tokens."""
        cfg = self.config
        lr0 = cfg.learning_rate
        g0: dict[int, np.ndarray] = {}
        g1: dict[int, np.ndarray] = {}
        in_batch = 0
        processed = start_processed
        alpha = lr0 * max(0.0, 1.0 - processed / total_tokens)

        def flush():
            nonlocal in_batch, alpha
            for idx, grad in g0.items():
                if not self._frozen[idx]:
                    self.syn0[idx] += grad
            for idx, grad in g1.items():
                self.syn1[idx] += grad
            g0.clear()
            g1.clear()
            in_batch = 0
            alpha = lr0 * max(0.0, 1.0 - processed / total_tokens)

        for sent in sentences:
            n = len(sent)
            for pos in range(n):
                processed += 1
                target = int(sent[pos])
                if self._keep_prob is not None and rng.random() >= self._keep_prob[target]:
                    continue
                b = int(rng.integers(1, cfg.window + 1))
                ctx = np.concatenate([sent[max(0, pos - b) : pos], sent[pos + 1 : pos + b + 1]])
                if ctx.size == 0:
                    continue
                h = self.syn0[ctx].mean(axis=0)
                negs = self._sample_negatives(rng, target, ctx)
                rows = np.concatenate(([target], negs))
                labels = np.zeros(rows.size)
                labels[0] = 1.0
                f = _sigmoid(self.syn1[rows] @ h)
                g = (labels - f) * alpha
                err = g @ self.syn1[rows]
                for r, gr in zip(rows.tolist(), g):
                    buf = g1.get(r)
                    if buf is None:
                        g1[r] = gr * h
                    else:
                        buf += gr * h
                share = err / ctx.size
                for c in ctx.tolist():
                    buf = g0.get(c)
                    if buf is None:
                        g0[c] = share.copy()
                    else:
                        buf += share
                in_batch += 1
                if in_batch >= cfg.batch_size:
                    flush()
        if in_batch:
            flush()

    def train(self, threads: int = 1) -> EmbeddingMatrix:
        cfg = self.config
        self.epoch_losses = [self.probe_loss()]
        total = max(1, cfg.epochs * self.n_tokens)
        if cfg.epochs == 0:
            return EmbeddingMatrix(self.vocab, self.syn0.copy())
        for epoch in range(cfg.epochs):
            start = epoch * self.n_tokens
            if threads <= 1:
                self._train_span(self.encoded, self._rng, self.n_tokens, total, start)
            else:
                self._train_epoch_relaxed(threads, total, start)
            self.epoch_losses.append(self.probe_loss())
            log.info("cbow epoch %d/%d probe loss %.6f",
                     epoch + 1, cfg.epochs, self.epoch_losses[-1])
        return EmbeddingMatrix(self.vocab, self.syn0.copy())

    def _train_epoch_relaxed(self, threads: int, total: int, start: int) -> None:
        # Relaxed-consistency mode: shard sentences, workers update the
        # shared parameter arrays without locking. Not deterministic.
        shards = [self.encoded[i::threads] for i in range(threads)]
        workers = []
        for wid, shard in enumerate(shards):
            if not shard:
                continue
            rng = np.random.default_rng(self.config.seed + 1000 * (wid + 1))
            span = sum(len(s) for s in shard)
            t = threading.Thread(
                target=self._train_span, args=(shard, rng, span, total, start)
            )
            workers.append(t)
            t.start()
        for t in workers:
            t.join()


def train_cbow(
    sentences: Iterable[Sentence],
    config: CbowConfig,
    init: EmbeddingMatrix | None = None,
    freeze_words: Iterable[str] | None = None,
    threads: int = 1,
) -> EmbeddingMatrix:
    """Train CBOW vectors over the corpus; see CbowTrainer for knobs."""
    return CbowTrainer(sentences, config, init=init, freeze_words=freeze_words).train(
        threads=threads
    )
