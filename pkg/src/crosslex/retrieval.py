"""Word-translation retrieval and evaluation.

Scoring methods: plain cosine nearest neighbor, and CSLS
(cross-domain similarity local scaling), which penalizes hub vectors:

    CSLS(Wx, y) = 2 cos(Wx, y) - r_T(Wx) - r_S(y)

where r_T is the mean cosine of the mapped query to its k nearest
targets and r_S the mean cosine of the target to its k nearest mapped
sources. All scores assume unit-normalized inputs (enforced with a
warning otherwise).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .corpus import BilingualLexicon
from .embedding import EmbeddingMatrix, ensure_unit, unit_rows
from .errors import EvaluationError

if TYPE_CHECKING:
    from .alignment import LinearMap

log = logging.getLogger(__name__)

_BLOCK = 1024


def _mean_topk_rows(sim: np.ndarray, k: int) -> np.ndarray:
    """Mean of the k largest entries of each row."""
    if k >= sim.shape[1]:
        return sim.mean(axis=1)
    part = np.partition(sim, sim.shape[1] - k, axis=1)[:, -k:]
    return part.mean(axis=1)


def knn_mean_similarity(queries: np.ndarray, pool: np.ndarray, k: int) -> np.ndarray:
    """Mean cosine of each query row to its k nearest rows of pool."""
    out = np.empty(queries.shape[0])
    for lo in range(0, queries.shape[0], _BLOCK):
        hi = min(lo + _BLOCK, queries.shape[0])
        out[lo:hi] = _mean_topk_rows(queries[lo:hi] @ pool.T, k)
    return out


class CslsScorer:
    """CSLS scores against a fixed target matrix.

    The r_S penalty (per-target mean similarity to the k nearest mapped
    sources) is computed once at construction and reused for every
    query batch.
    """

    def __init__(self, targets: np.ndarray, sources_mapped: np.ndarray, k: int):
        if k < 1:
            raise ValueError("k must be >= 1")
        if k > targets.shape[0] or k > sources_mapped.shape[0]:
            raise ValueError(
                f"k={k} exceeds matrix sizes ({targets.shape[0]} targets, "
                f"{sources_mapped.shape[0]} sources)"
            )
        self.k = k
        self.targets = targets
        self.r_src = knn_mean_similarity(targets, sources_mapped, k)

    def scores(self, mapped_queries: np.ndarray) -> np.ndarray:
        """(n_queries, n_targets) CSLS score matrix."""
        sims = mapped_queries @ self.targets.T
        r_tgt = _mean_topk_rows(sims, self.k)
        return 2.0 * sims - r_tgt[:, None] - self.r_src[None, :]


def csls_score(
    query: np.ndarray,
    targets: EmbeddingMatrix,
    sources_mapped: EmbeddingMatrix,
    k: int,
) -> np.ndarray:
    """CSLS of one mapped query vector against every target word."""
    tgt = ensure_unit(targets, "csls_score targets").vectors
    src = ensure_unit(sources_mapped, "csls_score sources").vectors
    q = unit_rows(np.asarray(query, dtype=np.float64).reshape(1, -1))
    return CslsScorer(tgt, src, k).scores(q)[0]


def _ranked_indices(scores: np.ndarray) -> np.ndarray:
    """Indices by descending score; ties broken by ascending index."""
    return np.lexsort((np.arange(scores.shape[0]), -scores))


@dataclass(frozen=True)
class QueryResult:
    source: str
    candidates: list[tuple[str, float]]  # best-first
    correct: bool  # top-1 hit


@dataclass(frozen=True)
class RetrievalReport:
    p_at_1: float
    p_at_k: dict[int, float]
    n_queries: int
    per_query: list[QueryResult] = field(default_factory=list)


def _mapped_queries(lmap: "LinearMap", src: EmbeddingMatrix, idx: Sequence[int]) -> np.ndarray:
    if lmap.matrix.shape[0] != src.dim:
        raise ValueError(f"map dimension {lmap.matrix.shape[0]} != embedding dim {src.dim}")
    return unit_rows(src.vectors[np.asarray(idx, dtype=np.int64)] @ lmap.matrix.T)


def retrieve(
    query_word: str,
    lmap: "LinearMap",
    src: EmbeddingMatrix,
    tgt: EmbeddingMatrix,
    method: str = "csls",
    k: int = 10,
    top: int = 10,
) -> list[tuple[str, float]]:
    """Rank target words for one source word; returns `top` candidates."""
    src = ensure_unit(src, "retrieve source")
    tgt = ensure_unit(tgt, "retrieve target")
    if query_word not in src.vocab:
        raise KeyError(f"query word {query_word!r} not in source vocabulary")
    if method not in ("nn", "csls"):
        raise ValueError(f"unknown retrieval method {method!r}")
    q = _mapped_queries(lmap, src, [src.vocab.index(query_word)])
    if method == "nn":
        scores = (q @ tgt.vectors.T)[0]
    else:
        mapped_all = unit_rows(src.vectors @ lmap.matrix.T)
        scores = CslsScorer(tgt.vectors, mapped_all, k).scores(q)[0]
    order = _ranked_indices(scores)[: max(0, top)]
    return [(tgt.vocab.word(int(j)), float(scores[j])) for j in order]


def evaluate(
    lmap: "LinearMap",
    lex: BilingualLexicon,
    src: EmbeddingMatrix,
    tgt: EmbeddingMatrix,
    method: str = "csls",
    k: int = 10,
    ks: Sequence[int] = (1, 5, 10),
    keep_per_query: bool = True,
) -> RetrievalReport:
    """P@k over the lexicon's distinct source words.

    A query counts correct at rank r when ANY of its reference targets
    appears in the top r. Multi-translation sources form one query.
    """
    if method not in ("nn", "csls"):
        raise ValueError(f"unknown retrieval method {method!r}")
    src = ensure_unit(src, "evaluate source")
    tgt = ensure_unit(tgt, "evaluate target")
    usable = [(s, t) for s, t in lex if s in src.vocab and t in tgt.vocab]
    if len(usable) < len(lex):
        log.warning(
            "evaluate: %d lexicon pairs outside vocabularies ignored",
            len(lex) - len(usable),
        )
    if not usable:
        raise EvaluationError("no lexicon pairs covered by both vocabularies")
    refs: dict[str, list[int]] = {}
    queries: list[str] = []
    for s, t in usable:
        if s not in refs:
            refs[s] = []
            queries.append(s)
        refs[s].append(tgt.vocab.index(t))

    q_idx = [src.vocab.index(s) for s in queries]
    mapped = _mapped_queries(lmap, src, q_idx)
    if method == "nn":
        scores = mapped @ tgt.vectors.T
    else:
        mapped_all = unit_rows(src.vectors @ lmap.matrix.T)
        scores = CslsScorer(tgt.vectors, mapped_all, k).scores(mapped)

    ks = sorted(set(int(kk) for kk in ks) | {1})
    max_k = min(max(ks), len(tgt))
    hits = {kk: 0 for kk in ks}
    per_query: list[QueryResult] = []
    for qi, word in enumerate(queries):
        order = _ranked_indices(scores[qi])
        ref_set = set(refs[word])
        # rank (0-based) of the best-ranked reference target
        best_rank = next(
            (r for r, j in enumerate(order) if int(j) in ref_set), len(order)
        )
        for kk in ks:
            if best_rank < kk:
                hits[kk] += 1
        if keep_per_query:
            cands = [
                (tgt.vocab.word(int(j)), float(scores[qi][j])) for j in order[:max_k]
            ]
            per_query.append(QueryResult(word, cands, best_rank < 1))
    n = len(queries)
    p_at_k = {kk: hits[kk] / n for kk in ks}
    return RetrievalReport(p_at_k[1], p_at_k, n, per_query)


@dataclass(frozen=True)
class RandomBaseline:
    analytic: float
    monte_carlo: float
    trials: int


def random_baseline(lex: BilingualLexicon, trials: int, seed: int) -> RandomBaseline:
    """Chance P@1 when guessing uniformly from the lexicon's target set.

    Analytic value: mean over queries of m / |targets| with m the
    number of correct targets of that query. The Monte-Carlo estimate
    redraws one guess per query per trial.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if len(lex) == 0:
        raise EvaluationError("empty lexicon")
    pool = lex.target_set()
    pool_index = {t: i for i, t in enumerate(pool)}
    groups = lex.grouped()
    queries = lex.source_words()
    ref_sets = [frozenset(pool_index[t] for t in set(groups[s])) for s in queries]

    analytic = float(np.mean([len(r) / len(pool) for r in ref_sets]))

    rng = np.random.default_rng(seed)
    member = np.zeros((len(queries), len(pool)), dtype=bool)
    for qi, r in enumerate(ref_sets):
        member[qi, list(r)] = True
    draws = rng.integers(0, len(pool), size=(trials, len(queries)))
    correct = member[np.arange(len(queries))[None, :], draws]
    return RandomBaseline(analytic, float(correct.mean()), trials)
