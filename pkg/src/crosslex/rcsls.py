"""Supervised alignment by direct optimization of a retrieval criterion.

Maximizes the relaxed CSLS objective over the mapping matrix by
full-batch gradient ascent: for each training pair (x, y),

    2 x^T W^T y
      - mean over the k nearest targets t of Wx      of  x^T W^T t
      - mean over the k nearest mapped sources Ws of y of  s^T W^T y

Vectors are unit-normalized inputs and similarities are taken as dot
products; the orthogonality constraint is relaxed to an optional
projection of W onto the unit spectral ball after every step. Neighbor
sets are recomputed every `neighborhood_refresh` epochs, so the
objective is piecewise linear in W and the gradient is exact between
refreshes. The returned iterate is the one (including the initial map)
with the best exact objective.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .alignment import LinearMap, procrustes
from .corpus import BilingualLexicon
from .embedding import EmbeddingMatrix, ensure_unit
from .errors import AlignmentError, NumericalError
from .retrieval import _mean_topk_rows

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RcslsConfig:
    k: int = 10
    lr: float = 1.0
    epochs: int = 10
    neighborhood_refresh: int = 1
    spectral: bool = True
    seed: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.lr <= 0:
            raise ValueError("lr must be > 0")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.neighborhood_refresh < 1:
            raise ValueError("neighborhood_refresh must be >= 1")


def _topk_indices(sim: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest entries per row (order irrelevant)."""
    k = min(k, sim.shape[1])
    return np.argpartition(sim, sim.shape[1] - k, axis=1)[:, -k:]


def rcsls_objective(
    w: np.ndarray,
    x: np.ndarray,
    y: np.ndarray,
    src_pool: np.ndarray,
    tgt_pool: np.ndarray,
    k: int,
) -> float:
    """Exact objective under fresh neighbor sets (higher is better)."""
    mx = x @ w.T
    r_tgt = _mean_topk_rows(mx @ tgt_pool.T, k)
    mapped_pool = src_pool @ w.T
    r_src = _mean_topk_rows(y @ mapped_pool.T, k)
    return float(np.mean(2.0 * np.sum(mx * y, axis=1) - r_tgt - r_src))


def _spectral_clip(w: np.ndarray) -> np.ndarray:
    u, s, vt = np.linalg.svd(w)
    return u @ np.diag(np.minimum(s, 1.0)) @ vt


def rcsls_align(
    src: EmbeddingMatrix,
    tgt: EmbeddingMatrix,
    train_lex: BilingualLexicon,
    config: RcslsConfig = RcslsConfig(),
    initial: LinearMap | None = None,
) -> LinearMap:
    """Refine a map by gradient ascent on the retrieval criterion.

    `initial` defaults to the Procrustes solution on train_lex. The
    result's orthogonal flag is not set (the constraint is relaxed).
    """
    src = ensure_unit(src, "rcsls source")
    tgt = ensure_unit(tgt, "rcsls target")
    if len(train_lex) == 0:
        raise AlignmentError("rcsls: empty training lexicon")
    if config.k > len(src) or config.k > len(tgt):
        raise ValueError(f"k={config.k} exceeds vocabulary sizes")
    if initial is None:
        initial = procrustes(src, tgt, train_lex)
    if config.epochs == 0:
        return initial

    rows_s, rows_t = [], []
    for s_word, t_word in train_lex:
        if s_word in src.vocab and t_word in tgt.vocab:
            rows_s.append(src.vocab.index(s_word))
            rows_t.append(tgt.vocab.index(t_word))
    if not rows_s:
        raise AlignmentError("rcsls: no training pairs covered by both vocabularies")
    x = src.vectors[rows_s]
    y = tgt.vectors[rows_t]
    src_pool = src.vectors
    tgt_pool = tgt.vectors
    n, k = x.shape[0], config.k

    w = initial.matrix.copy()
    best_w = initial.matrix.copy()
    best_obj = rcsls_objective(w, x, y, src_pool, tgt_pool, k)
    log.info("rcsls: initial objective %.6f", best_obj)

    nt_sum = ns_sum = None
    for epoch in range(config.epochs):
        if epoch % config.neighborhood_refresh == 0:
            mx = x @ w.T
            nt = _topk_indices(mx @ tgt_pool.T, k)
            nt_sum = tgt_pool[nt].sum(axis=1)  # (n, d)
            mapped_pool = src_pool @ w.T
            ns = _topk_indices(y @ mapped_pool.T, k)
            ns_sum = src_pool[ns].sum(axis=1)  # (n, d)
        grad = (2.0 * y.T @ x - (nt_sum.T @ x) / k - (y.T @ ns_sum) / k) / n
        w += config.lr * grad
        if config.spectral:
            w = _spectral_clip(w)
        if not np.all(np.isfinite(w)):
            raise NumericalError(f"rcsls diverged at epoch {epoch + 1}")
        obj = rcsls_objective(w, x, y, src_pool, tgt_pool, k)
        if not np.isfinite(obj):
            raise NumericalError(f"rcsls loss non-finite at epoch {epoch + 1}")
        log.info("rcsls epoch %d/%d: objective %.6f", epoch + 1, config.epochs, obj)
        if obj > best_obj:
            best_obj = obj
            best_w = w.copy()
    return LinearMap(best_w, orthogonal=False)
