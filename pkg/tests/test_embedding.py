import io

import numpy as np
import pytest

from crosslex.corpus import Vocabulary, build_vocabulary
from crosslex.embedding import (
    EmbeddingMatrix,
    init_from_pretrained,
    normalize,
    read_embedding,
    write_embedding,
)
from crosslex.errors import DataFormatError


def emb_of(words, vectors):
    vocab = Vocabulary(list(words), [1] * len(words))
    return EmbeddingMatrix(vocab, np.asarray(vectors, dtype=float))


class TestReadEmbedding:
    def test_plain(self):
        emb = read_embedding(io.StringIO("a 1.0 0.0\nb 0.0 1.0\n"))
        assert emb.vocab.words == ["a", "b"]
        np.testing.assert_array_equal(emb.vectors, np.eye(2))

    def test_header_skipped(self):
        emb = read_embedding(io.StringIO("2 2\na 1 0\nb 0 1\n"))
        assert emb.vocab.words == ["a", "b"]
        np.testing.assert_array_equal(emb.vectors, np.eye(2))

    def test_inconsistent_dimension_names_line(self):
        with pytest.raises(DataFormatError, match="line 2"):
            read_embedding(io.StringIO("a 1 0\nb 0 1 2\n"))

    def test_non_numeric_component(self):
        with pytest.raises(DataFormatError, match="line 1"):
            read_embedding(io.StringIO("a 1 oops\n"))

    def test_duplicate_words_keep_first(self):
        emb = read_embedding(io.StringIO("a 1 0\na 9 9\nb 0 1\n"))
        assert emb.vocab.words == ["a", "b"]
        np.testing.assert_array_equal(emb.vector("a"), [1.0, 0.0])

    def test_empty_source_rejected(self):
        with pytest.raises(DataFormatError):
            read_embedding(io.StringIO(""))

    def test_header_only_gives_empty_matrix(self):
        emb = read_embedding(io.StringIO("0 300\n"))
        assert len(emb) == 0 and emb.dim == 300


class TestWriteEmbedding:
    def test_round_trip(self):
        rng = np.random.default_rng(0)
        emb = emb_of(["a", "b", "c"], rng.standard_normal((3, 5)))
        buf = io.StringIO()
        write_embedding(emb, buf)
        back = read_embedding(io.StringIO(buf.getvalue()))
        assert back.vocab.words == emb.vocab.words
        np.testing.assert_allclose(back.vectors, emb.vectors, atol=1e-8)
        # repr() prints shortest round-trip decimals, so this is exact
        np.testing.assert_array_equal(back.vectors, emb.vectors)

    def test_header_written(self):
        emb = emb_of(["a"], [[1.0, 2.0]])
        buf = io.StringIO()
        write_embedding(emb, buf)
        assert buf.getvalue().splitlines()[0] == "1 2"

    def test_empty_vocab_header_only(self):
        emb = EmbeddingMatrix(Vocabulary([], []), np.zeros((0, 4)))
        buf = io.StringIO()
        write_embedding(emb, buf)
        assert buf.getvalue() == "0 4\n"

    def test_word_with_space_rejected(self):
        emb = emb_of(["a b"], [[1.0]])
        with pytest.raises(DataFormatError):
            write_embedding(emb, io.StringIO())

    def test_path_round_trip(self, tmp_path):
        emb = emb_of(["x", "y"], [[0.25, -1.5], [3.0, 1e-9]])
        p = tmp_path / "emb.vec"
        write_embedding(emb, p)
        back = read_embedding(p)
        np.testing.assert_array_equal(back.vectors, emb.vectors)


class TestInitFromPretrained:
    def setup_method(self):
        rng = np.random.default_rng(1)
        self.pre = emb_of(["water", "fire", "earth"], rng.standard_normal((3, 4)))

    def test_present_word_copied_bit_exact(self):
        tv = build_vocabulary([["water", "gbege"]], 1)
        emb, cov = init_from_pretrained(self.pre, tv, dim=4, seed=0)
        assert np.array_equal(emb.vector("water"), self.pre.vector("water"))
        assert cov == pytest.approx(0.5)

    def test_absent_word_in_uniform_range(self):
        tv = build_vocabulary([["gbege"] * 3], 1)
        emb, _ = init_from_pretrained(self.pre, tv, dim=4, seed=0)
        v = emb.vector("gbege")
        assert np.all(np.abs(v) <= 0.5 / 4)

    def test_disjoint_coverage_zero(self):
        tv = build_vocabulary([["x", "y"]], 1)
        _, cov = init_from_pretrained(self.pre, tv, dim=4, seed=0)
        assert cov == 0.0

    def test_dim_mismatch(self):
        tv = build_vocabulary([["water"]], 1)
        with pytest.raises(ValueError):
            init_from_pretrained(self.pre, tv, dim=5, seed=0)

    def test_seed_determinism(self):
        tv = build_vocabulary([["gbege", "yawa"]], 1)
        a, _ = init_from_pretrained(self.pre, tv, dim=4, seed=9)
        b, _ = init_from_pretrained(self.pre, tv, dim=4, seed=9)
        np.testing.assert_array_equal(a.vectors, b.vectors)


class TestNormalize:
    def test_unit(self):
        emb = emb_of(["a"], [[3.0, 4.0]])
        out = normalize(emb, "unit")
        np.testing.assert_allclose(out.vector("a"), [0.6, 0.8])

    def test_none_is_identity(self):
        emb = emb_of(["a", "b"], [[3.0, 4.0], [1.0, 7.0]])
        out = normalize(emb, "none")
        np.testing.assert_array_equal(out.vectors, emb.vectors)

    def test_center_unit_symmetric_rows_unchanged(self):
        emb = emb_of(["a", "b"], [[1.0, 0.0], [-1.0, 0.0]])
        out = normalize(emb, "center_unit")
        np.testing.assert_allclose(out.vectors, emb.vectors, atol=1e-12)

    def test_unit_norms_close_to_one(self):
        rng = np.random.default_rng(5)
        emb = emb_of([f"w{i}" for i in range(40)], rng.standard_normal((40, 7)) * 3)
        out = normalize(emb, "unit")
        np.testing.assert_allclose(np.linalg.norm(out.vectors, axis=1), 1.0, atol=1e-9)

    def test_zero_row_left_zero(self):
        emb = emb_of(["a", "z"], [[3.0, 4.0], [0.0, 0.0]])
        out = normalize(emb, "unit")
        np.testing.assert_array_equal(out.vector("z"), [0.0, 0.0])

    def test_unknown_scheme(self):
        emb = emb_of(["a"], [[1.0]])
        with pytest.raises(ValueError):
            normalize(emb, "l1")


class TestEmbeddingMatrixInvariants:
    def test_row_count_mismatch(self):
        with pytest.raises(ValueError):
            EmbeddingMatrix(Vocabulary(["a"], [1]), np.zeros((2, 3)))

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            EmbeddingMatrix(Vocabulary(["a"], [1]), np.array([[np.nan, 1.0]]))
