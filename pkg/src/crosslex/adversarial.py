"""Unsupervised alignment: adversarial training of the mapping matrix.

A feed-forward discriminator learns to tell mapped source vectors from
target vectors (with label smoothing); the mapper W is trained to make
it fail. After every mapper update W is pulled back toward the
orthogonal manifold with W <- (1+beta) W - beta (W W^T) W. The epoch
snapshot with the best unsupervised proxy score (mean CSLS over mutual
nearest-neighbor pairs) wins, and is exactly orthogonalized via SVD.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .alignment import LinearMap, csls_proxy_score
from .embedding import EmbeddingMatrix, ensure_unit
from .errors import NumericalError

log = logging.getLogger(__name__)

_LEAKY_SLOPE = 0.2


@dataclass(frozen=True)
class AdversarialConfig:
    disc_hidden: int = 2048
    disc_layers: int = 2
    disc_dropout: float = 0.1
    smoothing: float = 0.2
    map_lr: float = 0.1
    disc_lr: float = 0.1
    epochs: int = 30
    batch_size: int = 32
    ortho_beta: float = 0.01
    vocab_cap: int = 50000
    seed: int = 1
    # steps are sized so one epoch feeds ~epoch_size samples per side
    epoch_size: int = 50000
    disc_steps: int = 3
    lr_decay: float = 0.98  # multiplicative, per epoch, both optimizers
    lr_shrink: float = 0.5  # extra factor when the proxy score drops

    def __post_init__(self):
        if self.disc_hidden < 1 or self.disc_layers < 1:
            raise ValueError("discriminator size parameters must be >= 1")
        if not 0.0 <= self.disc_dropout < 1.0:
            raise ValueError("disc_dropout must be in [0, 1)")
        if not 0.0 <= self.smoothing < 0.5:
            raise ValueError("smoothing must be in [0, 0.5)")
        if self.map_lr <= 0 or self.disc_lr <= 0:
            raise ValueError("learning rates must be > 0")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1 or self.vocab_cap < 1:
            raise ValueError("batch_size and vocab_cap must be >= 1")
        if self.ortho_beta < 0:
            raise ValueError("ortho_beta must be >= 0")
        if self.epoch_size < 1 or self.disc_steps < 1:
            raise ValueError("epoch_size and disc_steps must be >= 1")
        if not 0 < self.lr_decay <= 1 or not 0 < self.lr_shrink <= 1:
            raise ValueError("lr_decay and lr_shrink must be in (0, 1]")


def _leaky(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, x, _LEAKY_SLOPE * x)


def _leaky_grad(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, 1.0, _LEAKY_SLOPE)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -50.0, 50.0)))


class Discriminator:
    """Small MLP with LeakyReLU and dropout; manual forward/backward."""

    def __init__(self, dim: int, hidden: int, layers: int, dropout: float,
                 rng: np.random.Generator):
        sizes = [dim] + [hidden] * layers + [1]
        self.weights = [
            rng.normal(0.0, 1.0 / math.sqrt(n_in), size=(n_out, n_in))
            for n_in, n_out in zip(sizes[:-1], sizes[1:])
        ]
        self.biases = [np.zeros(n_out) for n_out in sizes[1:]]
        self.dropout = dropout

    def _forward(self, x: np.ndarray, rng: np.random.Generator | None):
        """Returns (probabilities, cache). rng enables dropout (training)."""
        keep = 1.0 - self.dropout
        masks: list[np.ndarray | None] = []
        pre: list[np.ndarray] = []
        inputs: list[np.ndarray] = []
        h = x
        if rng is not None and self.dropout > 0:
            m = rng.random(h.shape) < keep
            h = h * m / keep
            masks.append(m)
        else:
            masks.append(None)
        for li, (w, b) in enumerate(zip(self.weights, self.biases)):
            inputs.append(h)
            z = h @ w.T + b
            pre.append(z)
            if li < len(self.weights) - 1:
                h = _leaky(z)
                if rng is not None and self.dropout > 0:
                    m = rng.random(h.shape) < keep
                    h = h * m / keep
                    masks.append(m)
                else:
                    masks.append(None)
        probs = _sigmoid(pre[-1][:, 0])
        return probs, (inputs, pre, masks)

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Eval-mode probabilities that rows are mapped source vectors."""
        return self._forward(x, rng=None)[0]

    def _backward(self, cache, dlogit: np.ndarray):
        """Gradients for mean loss; returns (param grads, dL/dinput)."""
        inputs, pre, masks = cache
        keep = 1.0 - self.dropout
        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.weights)
        dz = dlogit[:, None]
        for li in range(len(self.weights) - 1, -1, -1):
            grads_w[li] = dz.T @ inputs[li]
            grads_b[li] = dz.sum(axis=0)
            dh = dz @ self.weights[li]
            if li > 0:
                if masks[li] is not None:
                    dh = dh * masks[li] / keep
                dz = dh * _leaky_grad(pre[li - 1])
            else:
                if masks[0] is not None:
                    dh = dh * masks[0] / keep
                dinput = dh
        return grads_w, grads_b, dinput

    def sgd_step(self, grads_w, grads_b, lr: float) -> None:
        for w, gw in zip(self.weights, grads_w):
            w -= lr * gw
        for b, gb in zip(self.biases, grads_b):
            b -= lr * gb


class AdversarialTrainer:
    """Drives the discriminator/mapper game over capped vocabularies."""

    def __init__(self, src: EmbeddingMatrix, tgt: EmbeddingMatrix,
                 config: AdversarialConfig):
        src = ensure_unit(src, "adversarial source")
        tgt = ensure_unit(tgt, "adversarial target")
        if src.dim != tgt.dim:
            raise ValueError(f"dim mismatch: {src.dim} vs {tgt.dim}")
        if config.vocab_cap > len(src) or config.vocab_cap > len(tgt):
            log.info("adversarial: vocab_cap %d above vocabulary sizes, using full vocab",
                     config.vocab_cap)
        self.src = src
        self.tgt = tgt
        self.config = config
        self.cap_src = min(config.vocab_cap, len(src))
        self.cap_tgt = min(config.vocab_cap, len(tgt))
        self.rng = np.random.default_rng(config.seed)
        self.w = np.eye(src.dim)
        self.disc = Discriminator(src.dim, config.disc_hidden, config.disc_layers,
                                  config.disc_dropout, self.rng)
        self.lr_map = config.map_lr
        self.lr_disc = config.disc_lr
        self.history: list[float] = []

    def _batch(self, pool_size: int, vectors: np.ndarray) -> np.ndarray:
        idx = self.rng.integers(0, pool_size, size=self.config.batch_size)
        return vectors[idx]

    def dis_step(self) -> float:
        """One discriminator update; returns its BCE loss."""
        cfg = self.config
        fake = self._batch(self.cap_src, self.src.vectors) @ self.w.T
        real = self._batch(self.cap_tgt, self.tgt.vectors)
        x = np.concatenate([fake, real])
        y = np.full(x.shape[0], cfg.smoothing)
        y[: fake.shape[0]] = 1.0 - cfg.smoothing
        probs, cache = self.disc._forward(x, rng=self.rng)
        eps = 1e-12
        loss = float(-np.mean(y * np.log(probs + eps) + (1 - y) * np.log(1 - probs + eps)))
        dlogit = (probs - y) / x.shape[0]
        gw, gb, _ = self.disc._backward(cache, dlogit)
        self.disc.sgd_step(gw, gb, self.lr_disc)
        return loss

    def map_step(self) -> float:
        """One mapper update (discriminator frozen, eval mode)."""
        cfg = self.config
        idx = self.rng.integers(0, self.cap_src, size=cfg.batch_size)
        s = self.src.vectors[idx]
        x = s @ self.w.T
        probs, cache = self.disc._forward(x, rng=None)
        # mapper wants the discriminator to call mapped vectors targets
        y = np.full(x.shape[0], cfg.smoothing)
        eps = 1e-12
        loss = float(-np.mean(y * np.log(probs + eps) + (1 - y) * np.log(1 - probs + eps)))
        dlogit = (probs - y) / x.shape[0]
        _, _, dx = self.disc._backward(cache, dlogit)
        self.w -= self.lr_map * (dx.T @ s)
        self.orthogonalize()
        return loss

    def orthogonalize(self) -> None:
        beta = self.config.ortho_beta
        if beta > 0:
            self.w = (1 + beta) * self.w - beta * (self.w @ self.w.T) @ self.w

    def dis_accuracy(self, n_samples: int = 1024) -> float:
        """Eval-mode accuracy of the discriminator under the current map."""
        half = n_samples // 2
        idx_s = self.rng.integers(0, self.cap_src, size=half)
        idx_t = self.rng.integers(0, self.cap_tgt, size=half)
        fake = self.src.vectors[idx_s] @ self.w.T
        real = self.tgt.vectors[idx_t]
        p_fake = self.disc.predict(fake)
        p_real = self.disc.predict(real)
        return float(np.mean(np.concatenate([p_fake > 0.5, p_real <= 0.5])))

    def proxy_score(self) -> float:
        cap = min(10000, self.cap_src, self.cap_tgt)
        return csls_proxy_score(LinearMap(self.w), self.src, self.tgt, k=10, max_rank=cap)

    def train(self) -> LinearMap:
        cfg = self.config
        steps_per_epoch = max(1, cfg.epoch_size // cfg.batch_size)
        best_w = self.w.copy()
        best_score = self.proxy_score()
        self.history.append(best_score)
        prev_score = best_score
        for epoch in range(cfg.epochs):
            dis_loss = map_loss = 0.0
            for _ in range(steps_per_epoch):
                for _ in range(cfg.disc_steps):
                    dis_loss = self.dis_step()
                map_loss = self.map_step()
                if not (np.isfinite(dis_loss) and np.isfinite(map_loss)
                        and np.all(np.isfinite(self.w))):
                    raise NumericalError(
                        f"adversarial training diverged at epoch {epoch + 1}"
                    )
            score = self.proxy_score()
            self.history.append(score)
            log.info("adversarial epoch %d/%d: dis loss %.4f, map loss %.4f, proxy %.4f",
                     epoch + 1, cfg.epochs, dis_loss, map_loss, score)
            if score > best_score:
                best_score = score
                best_w = self.w.copy()
            self.lr_map *= cfg.lr_decay
            self.lr_disc *= cfg.lr_decay
            if score < prev_score:
                self.lr_map *= cfg.lr_shrink
            prev_score = score
        u, _, vt = np.linalg.svd(best_w)
        return LinearMap(u @ vt, orthogonal=True)


def adversarial_align(
    src: EmbeddingMatrix, tgt: EmbeddingMatrix, config: AdversarialConfig
) -> LinearMap:
    """Learn a source-to-target map without any bilingual supervision."""
    return AdversarialTrainer(src, tgt, config).train()
