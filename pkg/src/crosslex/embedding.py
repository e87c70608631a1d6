"""Word embedding matrices: text format codec, warm-start init, normalization.

Text format: optional header line "N d" (two integer tokens), then one
"word v1 ... vd" line per word. Numbers are written in shortest
round-trip decimal form, so write -> read recovers vectors exactly up
to decimal-print precision.
"""

from __future__ import annotations

import io
import logging
import os
from typing import Iterable

import numpy as np

from .corpus import Vocabulary
from .errors import DataFormatError

log = logging.getLogger(__name__)


class EmbeddingMatrix:
    """An N x d real matrix whose rows are bound to a Vocabulary."""

    __slots__ = ("vocab", "vectors")

    def __init__(self, vocab: Vocabulary, vectors: np.ndarray):
        vectors = np.ascontiguousarray(vectors, dtype=np.float64)
        if vectors.ndim != 2:
            raise ValueError(f"vectors must be 2-D, got shape {vectors.shape}")
        if vectors.shape[0] != len(vocab):
            raise ValueError(
                f"row count {vectors.shape[0]} != vocabulary size {len(vocab)}"
            )
        if vectors.shape[1] < 1:
            raise ValueError("embedding dimension must be >= 1")
        if not np.all(np.isfinite(vectors)):
            raise ValueError("embedding contains non-finite entries")
        self.vocab = vocab
        self.vectors = vectors

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.vocab)

    def vector(self, word: str) -> np.ndarray:
        return self.vectors[self.vocab.index(word)]

    def __repr__(self) -> str:
        return f"EmbeddingMatrix({len(self)} x {self.dim})"


def _open_lines(source) -> Iterable[str | bytes]:
    if isinstance(source, (str, os.PathLike)):
        return open(source, "rb")
    return source


def read_embedding(source) -> EmbeddingMatrix:
    """Read an embedding from a path or an iterable of text lines.

    The dimension is inferred from the first vector line; every row must
    match it. An optional leading "N d" header (two integer tokens) is
    skipped. Duplicate words keep their first occurrence; the number of
    duplicates is logged.
    """
    lines = _open_lines(source)
    words: list[str] = []
    rows: list[np.ndarray] = []
    index: dict[str, int] = {}
    dim: int | None = None
    header_dim: int | None = None
    n_dup = 0
    try:
        for lineno, raw in enumerate(lines, start=1):
            if isinstance(raw, bytes):
                try:
                    line = raw.decode("utf-8")
                except UnicodeDecodeError as e:
                    raise DataFormatError(f"line {lineno}: invalid UTF-8 ({e})") from e
            else:
                line = raw
            parts = line.split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                    header_dim = int(parts[1])
                    continue  # header line
                except ValueError:
                    pass
            word = parts[0]
            try:
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError as e:
                raise DataFormatError(f"line {lineno}: non-numeric component ({e})") from e
            if dim is None:
                dim = vec.shape[0]
                if dim < 1:
                    raise DataFormatError(f"line {lineno}: vector has no components")
            elif vec.shape[0] != dim:
                raise DataFormatError(
                    f"line {lineno}: dimension {vec.shape[0]} != expected {dim}"
                )
            if word in index:
                n_dup += 1
                continue
            index[word] = len(words)
            words.append(word)
            rows.append(vec)
    finally:
        if hasattr(lines, "close"):
            lines.close()
    if n_dup:
        log.warning("read_embedding: skipped %d duplicate words", n_dup)
    if dim is None:
        if header_dim is None:
            raise DataFormatError("embedding source holds no vector lines")
        dim = header_dim
    vocab = Vocabulary(words, [1] * len(words), min_count=1)
    matrix = np.vstack(rows) if rows else np.zeros((0, dim))
    return EmbeddingMatrix(vocab, matrix)


def write_embedding(emb: EmbeddingMatrix, sink) -> None:
    """Write the "N d" header then one line per word in vocabulary order.

    Accepts a path or a writable text stream. A word containing
    whitespace cannot be encoded in this format and raises
    DataFormatError.
    """
    own = isinstance(sink, (str, os.PathLike))
    out = open(sink, "w", encoding="utf-8", newline="\n") if own else sink
    try:
        out.write(f"{len(emb)} {emb.dim}\n")
        for i, word in enumerate(emb.vocab.words):
            if any(c.isspace() for c in word):
                raise DataFormatError(f"word {word!r} contains whitespace")
            comps = " ".join(repr(v) for v in emb.vectors[i].tolist())
            out.write(f"{word} {comps}\n")
    finally:
        if own:
            out.close()


def embedding_to_text(emb: EmbeddingMatrix) -> str:
    buf = io.StringIO()
    write_embedding(emb, buf)
    return buf.getvalue()


def init_from_pretrained(
    pretrained: EmbeddingMatrix, target_vocab: Vocabulary, dim: int, seed: int
) -> tuple[EmbeddingMatrix, float]:
    """Build an init matrix for target_vocab, copying pretrained rows.

    Words present in the pretrained vocabulary copy their vector
    bit-exactly; the rest draw i.i.d. uniform entries in
    [-0.5/dim, +0.5/dim] from the seeded generator. Returns the matrix
    and the covered fraction of target_vocab.
    """
    if pretrained.dim != dim:
        raise ValueError(f"pretrained dim {pretrained.dim} != requested dim {dim}")
    rng = np.random.default_rng(seed)
    bound = 0.5 / dim
    vectors = np.empty((len(target_vocab), dim), dtype=np.float64)
    n_copied = 0
    for i, word in enumerate(target_vocab.words):
        if word in pretrained.vocab:
            vectors[i] = pretrained.vector(word)
            n_copied += 1
        else:
            vectors[i] = rng.uniform(-bound, bound, size=dim)
    coverage = n_copied / len(target_vocab) if len(target_vocab) else 0.0
    log.info("init_from_pretrained: coverage %.4f (%d/%d words)",
             coverage, n_copied, len(target_vocab))
    return EmbeddingMatrix(target_vocab, vectors), coverage


def normalize(emb: EmbeddingMatrix, scheme: str = "unit") -> EmbeddingMatrix:
    """Return a row-normalized copy: 'unit', 'center_unit', or 'none'.

    Zero-norm rows are left as zero with a warning.
    """
    if scheme == "none":
        return EmbeddingMatrix(emb.vocab, emb.vectors.copy())
    if scheme not in ("unit", "center_unit"):
        raise ValueError(f"unknown normalization scheme {scheme!r}")
    vectors = emb.vectors.copy()
    if scheme == "center_unit" and len(emb):
        vectors -= vectors.mean(axis=0, keepdims=True)
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    zero = norms[:, 0] == 0.0
    if zero.any():
        log.warning("normalize: %d zero-norm rows left as zero", int(zero.sum()))
        norms[zero] = 1.0
    return EmbeddingMatrix(emb.vocab, vectors / norms)


def unit_rows(matrix: np.ndarray) -> np.ndarray:
    """Unit-normalize rows of a bare array (zero rows stay zero)."""
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return matrix / norms


def ensure_unit(emb: EmbeddingMatrix, what: str) -> EmbeddingMatrix:
    """Return emb unit-normalized, warning if it was not already."""
    norms = np.linalg.norm(emb.vectors, axis=1)
    nonzero = norms > 0
    if nonzero.any() and not np.allclose(norms[nonzero], 1.0, atol=1e-6):
        log.warning("%s: input rows were not unit-normalized; normalizing", what)
        return normalize(emb, "unit")
    return emb
