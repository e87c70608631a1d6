"""Synthetic embedding pairs with a known ground-truth orthogonal map.

Source vectors are i.i.d. Gaussian rows, unit-normalized; target row i
is unit-normalize(Q src_i + noise) for a random orthogonal Q. The
identity pairing (s_i, t_i) is the gold lexicon, so every alignment
method can be scored against the truth at desk scale.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .alignment import LinearMap
from .corpus import BilingualLexicon, Vocabulary
from .embedding import EmbeddingMatrix, unit_rows, write_embedding


@dataclass(frozen=True)
class SynthInstance:
    src: EmbeddingMatrix
    tgt: EmbeddingMatrix
    truth: LinearMap
    lexicon: BilingualLexicon
    noise_sigma: float


def random_orthogonal(d: int, rng: np.random.Generator) -> np.ndarray:
    """Orthogonalize a Gaussian matrix (QR with sign fix)."""
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def generate(n: int, d: int, noise_sigma: float, seed: int) -> SynthInstance:
    """Deterministic instance of n word pairs in dimension d.

    The noise draw is consumed even at sigma 0, so instances with the
    same seed share src and Q across noise levels.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if n < d:
        raise ValueError(f"n={n} must be >= d={d}")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be >= 0")
    rng = np.random.default_rng(seed)
    src_vecs = unit_rows(rng.standard_normal((n, d)))
    q = random_orthogonal(d, rng)
    noise = noise_sigma * rng.standard_normal((n, d))
    tgt_vecs = unit_rows(src_vecs @ q.T + noise)

    # Strictly descending counts keep "most frequent" = lowest index.
    src_vocab = Vocabulary([f"s{i}" for i in range(n)], list(range(n, 0, -1)))
    tgt_vocab = Vocabulary([f"t{i}" for i in range(n)], list(range(n, 0, -1)))
    lexicon = BilingualLexicon((f"s{i}", f"t{i}") for i in range(n))
    return SynthInstance(
        src=EmbeddingMatrix(src_vocab, src_vecs),
        tgt=EmbeddingMatrix(tgt_vocab, tgt_vecs),
        truth=LinearMap(q, orthogonal=True),
        lexicon=lexicon,
        noise_sigma=noise_sigma,
    )


def write_instance(inst: SynthInstance, out_dir: str | os.PathLike) -> dict[str, Path]:
    """Write src.vec, tgt.vec, lexicon.txt and truth_map.txt into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "src": out / "src.vec",
        "tgt": out / "tgt.vec",
        "lexicon": out / "lexicon.txt",
        "truth": out / "truth_map.txt",
    }
    write_embedding(inst.src, paths["src"])
    write_embedding(inst.tgt, paths["tgt"])
    with open(paths["lexicon"], "w", encoding="utf-8", newline="\n") as f:
        for s, t in inst.lexicon:
            f.write(f"{s}\t{t}\n")
    inst.truth.save(paths["truth"])
    return paths
