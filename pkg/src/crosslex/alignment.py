"""Linear maps between embedding spaces: Procrustes and refinement.

The supervised closed form: W = U V^T where U S V^T is the SVD of
Y X^T (X, Y the paired source/target vectors as columns), the
orthogonal minimizer of ||W X - Y||_F. Unsupervised refinement
alternates between inducing a synthetic dictionary from mutual CSLS
nearest neighbors and re-solving Procrustes on it, keeping the iterate
with the best unsupervised proxy score (mean CSLS over mutual pairs).
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .corpus import BilingualLexicon
from .embedding import EmbeddingMatrix, ensure_unit, unit_rows
from .errors import AlignmentError, DataFormatError
from .retrieval import _mean_topk_rows

log = logging.getLogger(__name__)

ORTHO_TOL = 1e-6


def orthogonality_defect(matrix: np.ndarray) -> float:
    """max |W^T W - I|."""
    d = matrix.shape[0]
    return float(np.abs(matrix.T @ matrix - np.eye(d)).max())


@dataclass
class LinearMap:
    """d x d map from source space into target space (rows map as x -> W x)."""

    matrix: np.ndarray
    orthogonal: bool = False

    def __post_init__(self):
        self.matrix = np.ascontiguousarray(self.matrix, dtype=np.float64)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != self.matrix.shape[1]:
            raise ValueError(f"map must be square, got shape {self.matrix.shape}")
        if self.orthogonal and orthogonality_defect(self.matrix) > ORTHO_TOL:
            raise ValueError(
                f"orthogonal flag set but defect {orthogonality_defect(self.matrix):.3g} "
                f"> {ORTHO_TOL}"
            )

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def save(self, sink) -> None:
        """Text format: first line "d", then d rows of d decimals."""
        own = isinstance(sink, (str, os.PathLike))
        out = open(sink, "w", encoding="utf-8", newline="\n") if own else sink
        try:
            out.write(f"{self.dim}\n")
            for row in self.matrix:
                out.write(" ".join(repr(v) for v in row.tolist()) + "\n")
        finally:
            if own:
                out.close()

    @classmethod
    def load(cls, source) -> "LinearMap":
        own = isinstance(source, (str, os.PathLike))
        inp = open(source, "r", encoding="utf-8") if own else source
        try:
            lines = [ln for ln in (l.strip() for l in inp) if ln]
        finally:
            if own:
                inp.close()
        if not lines:
            raise DataFormatError("empty map file")
        try:
            d = int(lines[0])
        except ValueError as e:
            raise DataFormatError(f"map header must be an integer, got {lines[0]!r}") from e
        if len(lines) != d + 1:
            raise DataFormatError(f"expected {d} map rows, found {len(lines) - 1}")
        try:
            matrix = np.array([[float(x) for x in ln.split()] for ln in lines[1:]])
        except ValueError as e:
            raise DataFormatError(f"non-numeric map entry ({e})") from e
        if matrix.shape != (d, d):
            raise DataFormatError(f"map rows do not form a {d}x{d} matrix")
        return cls(matrix, orthogonal=orthogonality_defect(matrix) <= ORTHO_TOL)


def _paired_vectors(
    src: EmbeddingMatrix, tgt: EmbeddingMatrix, lex: Iterable[tuple[str, str]]
) -> tuple[np.ndarray, np.ndarray]:
    rows_s, rows_t = [], []
    dropped = 0
    for s, t in lex:
        if s in src.vocab and t in tgt.vocab:
            rows_s.append(src.vocab.index(s))
            rows_t.append(tgt.vocab.index(t))
        else:
            dropped += 1
    if dropped:
        log.warning("alignment: %d lexicon pairs outside vocabularies ignored", dropped)
    if not rows_s:
        raise AlignmentError("no training pairs covered by both vocabularies")
    return src.vectors[rows_s], tgt.vectors[rows_t]


def procrustes(
    src: EmbeddingMatrix, tgt: EmbeddingMatrix, train_lex: BilingualLexicon
) -> LinearMap:
    """Closed-form orthogonal map fitted on the training lexicon."""
    src = ensure_unit(src, "procrustes source")
    tgt = ensure_unit(tgt, "procrustes target")
    a, b = _paired_vectors(src, tgt, train_lex)
    if a.shape[0] < src.dim:
        log.warning(
            "procrustes: only %d pairs for dimension %d; solution may be unstable",
            a.shape[0], src.dim,
        )
    u, _, vt = np.linalg.svd(b.T @ a)
    return LinearMap(u @ vt, orthogonal=True)


def apply_map(lmap: LinearMap, emb: EmbeddingMatrix) -> EmbeddingMatrix:
    """Replace each row x by W x; vocabulary unchanged."""
    if lmap.dim != emb.dim:
        raise ValueError(f"map dim {lmap.dim} != embedding dim {emb.dim}")
    return EmbeddingMatrix(emb.vocab, emb.vectors @ lmap.matrix.T)


def _mutual_csls_pairs(
    mapped: np.ndarray, targets: np.ndarray, k: int
) -> tuple[list[tuple[int, int]], np.ndarray]:
    """Mutual CSLS nearest neighbors between two unit-row matrices.

    Returns (index pairs, full CSLS score matrix). The CSLS penalty
    terms are shared between directions, so one matrix serves both.
    """
    k = min(k, mapped.shape[0], targets.shape[0])
    sims = mapped @ targets.T
    r_fwd = _mean_topk_rows(sims, k)
    r_bwd = _mean_topk_rows(sims.T, k)
    scores = 2.0 * sims - r_fwd[:, None] - r_bwd[None, :]
    fwd = scores.argmax(axis=1)
    bwd = scores.argmax(axis=0)
    pairs = [(i, int(fwd[i])) for i in range(scores.shape[0]) if bwd[fwd[i]] == i]
    return pairs, scores


def build_synthetic_lexicon(
    src_mapped: EmbeddingMatrix,
    tgt: EmbeddingMatrix,
    k: int = 10,
    max_rank: int = 10000,
) -> BilingualLexicon:
    """Word pairs that are mutual CSLS nearest neighbors.

    Only the max_rank most frequent words of each side participate.
    May return an empty lexicon when no mutual neighbors exist.
    """
    if max_rank < 1:
        raise ValueError("max_rank must be >= 1")
    src_mapped = ensure_unit(src_mapped, "build_synthetic_lexicon source")
    tgt = ensure_unit(tgt, "build_synthetic_lexicon target")
    cap_s = min(max_rank, len(src_mapped))
    cap_t = min(max_rank, len(tgt))
    pairs, _ = _mutual_csls_pairs(src_mapped.vectors[:cap_s], tgt.vectors[:cap_t], k)
    return BilingualLexicon(
        (src_mapped.vocab.word(i), tgt.vocab.word(j)) for i, j in pairs
    )


def csls_proxy_score(
    lmap: LinearMap,
    src: EmbeddingMatrix,
    tgt: EmbeddingMatrix,
    k: int = 10,
    max_rank: int = 10000,
) -> float:
    """Unsupervised model-selection criterion: mean CSLS of mutual pairs."""
    cap_s = min(max_rank, len(src))
    cap_t = min(max_rank, len(tgt))
    mapped = unit_rows(src.vectors[:cap_s] @ lmap.matrix.T)
    pairs, scores = _mutual_csls_pairs(mapped, tgt.vectors[:cap_t], k)
    if not pairs:
        return float("-inf")
    return float(np.mean([scores[i, j] for i, j in pairs]))


def refine(
    src: EmbeddingMatrix,
    tgt: EmbeddingMatrix,
    initial: LinearMap,
    iterations: int,
    k: int = 10,
    max_rank: int = 10000,
) -> LinearMap:
    """Iterative Procrustes refinement from an initial map.

    Alternates synthetic-dictionary induction and Procrustes, returning
    the iterate (including the initial map) with the highest proxy
    score. Stops early with a warning if the synthetic lexicon comes
    out empty.
    """
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    src = ensure_unit(src, "refine source")
    tgt = ensure_unit(tgt, "refine target")
    if iterations == 0:
        return initial
    best = initial
    best_score = csls_proxy_score(initial, src, tgt, k=k, max_rank=max_rank)
    current = initial
    for it in range(iterations):
        lex = build_synthetic_lexicon(apply_map(current, src), tgt, k=k, max_rank=max_rank)
        if len(lex) == 0:
            log.warning("refine: empty synthetic lexicon at iteration %d; stopping", it + 1)
            break
        current = procrustes(src, tgt, lex)
        score = csls_proxy_score(current, src, tgt, k=k, max_rank=max_rank)
        log.info("refine iteration %d: %d pairs, proxy score %.6f", it + 1, len(lex), score)
        if score > best_score:
            best, best_score = current, score
    return best
