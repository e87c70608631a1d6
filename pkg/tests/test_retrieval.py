import numpy as np
import pytest

from crosslex.alignment import LinearMap, apply_map
from crosslex.corpus import BilingualLexicon, Vocabulary
from crosslex.embedding import EmbeddingMatrix, unit_rows
from crosslex.errors import EvaluationError
from crosslex.retrieval import (
    CslsScorer,
    csls_score,
    evaluate,
    random_baseline,
    retrieve,
)
from crosslex.synthbench import generate


def emb_of(words, vectors):
    return EmbeddingMatrix(Vocabulary(list(words), [1] * len(words)), np.asarray(vectors, float))


def csls_brute(query, targets, sources_mapped, k):
    """Naive O(N^2) CSLS: independent of the vectorized path."""
    n_t = targets.shape[0]
    sims_q = sorted((float(query @ targets[m]) for m in range(n_t)), reverse=True)
    r_t = sum(sims_q[:k]) / k
    out = []
    for j in range(n_t):
        sims_y = sorted(
            (float(targets[j] @ sources_mapped[s]) for s in range(sources_mapped.shape[0])),
            reverse=True,
        )
        r_s = sum(sims_y[:k]) / k
        out.append(2.0 * float(query @ targets[j]) - r_t - r_s)
    return np.array(out)


class TestCslsScore:
    def test_self_retrieval_identical_sets(self):
        rng = np.random.default_rng(0)
        vecs = unit_rows(rng.standard_normal((20, 6)))
        tgt = emb_of([f"t{i}" for i in range(20)], vecs)
        src = emb_of([f"s{i}" for i in range(20)], vecs)
        for i in (0, 7, 19):
            scores = csls_score(vecs[i], tgt, src, k=1)
            assert scores[i] == pytest.approx(0.0, abs=1e-12)
            assert int(np.argmax(scores)) == i
            others = np.delete(scores, i)
            assert np.all(others < 0)

    def test_identical_targets_tie(self):
        row = unit_rows(np.ones((1, 4)))[0]
        tgt = emb_of(["t0", "t1", "t2"], np.tile(row, (3, 1)))
        src = emb_of(["s0"], [row])
        scores = csls_score(row, tgt, src, k=1)
        assert np.ptp(scores) == pytest.approx(0.0, abs=1e-12)

    def test_matches_brute_force_random_instance(self):
        rng = np.random.default_rng(1)
        for trial in range(5):
            n = 50
            t = unit_rows(rng.standard_normal((n, 8)))
            s = unit_rows(rng.standard_normal((n, 8)))
            tgt = emb_of([f"t{i}" for i in range(n)], t)
            src = emb_of([f"s{i}" for i in range(n)], s)
            q = s[int(rng.integers(n))]
            fast = csls_score(q, tgt, src, k=10)
            slow = csls_brute(q, t, s, k=10)
            np.testing.assert_allclose(fast, slow, atol=1e-10)
            assert int(np.argmax(fast)) == int(np.argmax(slow))

    def test_k_out_of_range(self):
        vecs = unit_rows(np.random.default_rng(2).standard_normal((5, 3)))
        tgt = emb_of([f"t{i}" for i in range(5)], vecs)
        src = emb_of([f"s{i}" for i in range(5)], vecs)
        with pytest.raises(ValueError):
            csls_score(vecs[0], tgt, src, k=0)
        with pytest.raises(ValueError):
            csls_score(vecs[0], tgt, src, k=6)


class TestRetrieve:
    def setup_method(self):
        rng = np.random.default_rng(3)
        self.vecs = unit_rows(rng.standard_normal((15, 5)))
        self.src = emb_of([f"w{i}" for i in range(15)], self.vecs)
        self.tgt = emb_of([f"w{i}" for i in range(15)], self.vecs)
        self.eye = LinearMap(np.eye(5), orthogonal=True)

    def test_nn_self_retrieval(self):
        out = retrieve("w3", self.eye, self.src, self.tgt, method="nn", top=3)
        assert out[0][0] == "w3"
        assert out[0][1] == pytest.approx(1.0)

    def test_csls_self_retrieval(self):
        out = retrieve("w3", self.eye, self.src, self.tgt, method="csls", k=3, top=3)
        assert out[0][0] == "w3"

    def test_synthetic_truth_rank_one(self):
        inst = generate(n=120, d=8, noise_sigma=0.0, seed=4)
        for s, t in inst.lexicon.pairs[:20]:
            out = retrieve(s, inst.truth, inst.src, inst.tgt, method="nn", top=1)
            assert out[0][0] == t

    def test_top_beyond_vocab_returns_full_ranking(self):
        out = retrieve("w0", self.eye, self.src, self.tgt, method="nn", top=1000)
        assert len(out) == 15

    def test_unknown_word(self):
        with pytest.raises(KeyError):
            retrieve("nope", self.eye, self.src, self.tgt)

    def test_tie_break_ascending_index(self):
        row = unit_rows(np.ones((1, 3)))[0]
        tgt = emb_of(["b", "a", "c"], np.tile(row, (3, 1)))
        src = emb_of(["q"], [row])
        out = retrieve("q", LinearMap(np.eye(3)), src, tgt, method="nn", top=3)
        assert [w for w, _ in out] == ["b", "a", "c"]  # vocab order on ties


class TestEvaluate:
    def test_perfect_map_p1(self):
        inst = generate(n=200, d=10, noise_sigma=0.0, seed=5)
        rep = evaluate(inst.truth, inst.lexicon, inst.src, inst.tgt, method="csls", k=10)
        assert rep.p_at_1 == 1.0
        assert rep.n_queries == 200
        assert all(rep.p_at_k[k] == 1.0 for k in rep.p_at_k)

    def test_degenerate_map_near_zero(self):
        inst = generate(n=100, d=6, noise_sigma=0.0, seed=6)
        w = LinearMap(np.zeros((6, 6)))
        w.matrix[0, 0] = 1.0  # rank-1: every query lands on the same axis
        rep = evaluate(w, inst.lexicon, inst.src, inst.tgt, method="nn")
        assert rep.p_at_1 <= 0.05

    def test_p_at_k_non_decreasing(self):
        inst = generate(n=150, d=8, noise_sigma=0.3, seed=7)
        w = procrustes_on_half(inst)
        rep = evaluate(w, inst.lexicon, inst.src, inst.tgt, method="nn", ks=(1, 5, 10, 20))
        vals = [rep.p_at_k[k] for k in sorted(rep.p_at_k)]
        assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))
        assert rep.p_at_1 == rep.p_at_k[1]

    def test_multi_translation_any_hit_counts(self):
        vecs = np.eye(3)
        src = emb_of(["q"], [vecs[0]])
        tgt = emb_of(["t0", "t1", "t2"], vecs)
        lex = BilingualLexicon([("q", "t2"), ("q", "t0")])
        rep = evaluate(LinearMap(np.eye(3)), lex, src, tgt, method="nn")
        assert rep.n_queries == 1
        assert rep.p_at_1 == 1.0  # t0 is the nn and is one of the references

    def test_deterministic(self):
        inst = generate(n=80, d=6, noise_sigma=0.2, seed=8)
        r1 = evaluate(inst.truth, inst.lexicon, inst.src, inst.tgt, method="csls")
        r2 = evaluate(inst.truth, inst.lexicon, inst.src, inst.tgt, method="csls")
        assert r1 == r2

    def test_target_scaling_invariance(self):
        inst = generate(n=100, d=6, noise_sigma=0.1, seed=9)
        scaled = EmbeddingMatrix(inst.tgt.vocab, inst.tgt.vectors * 4.2)
        r1 = evaluate(inst.truth, inst.lexicon, inst.src, inst.tgt, method="nn")
        r2 = evaluate(inst.truth, inst.lexicon, inst.src, scaled, method="nn")
        assert r1.p_at_k == r2.p_at_k

    def test_empty_filtered_lexicon(self):
        inst = generate(n=20, d=4, noise_sigma=0.0, seed=10)
        with pytest.raises(EvaluationError):
            evaluate(inst.truth, BilingualLexicon([("xx", "yy")]), inst.src, inst.tgt)


def procrustes_on_half(inst):
    from crosslex.alignment import procrustes
    from crosslex.corpus import BilingualLexicon

    half = BilingualLexicon(inst.lexicon.pairs[: len(inst.lexicon) // 2])
    return procrustes(inst.src, inst.tgt, half)


class TestRandomBaseline:
    def test_analytic_unique_pairs(self):
        lex = BilingualLexicon((f"s{i}", f"t{i}") for i in range(108))
        rb = random_baseline(lex, trials=10, seed=0)
        assert rb.analytic == pytest.approx(1 / 108, abs=1e-12)
        assert round(rb.analytic, 4) == 0.0093

    def test_single_pair(self):
        rb = random_baseline(BilingualLexicon([("a", "x")]), trials=10, seed=0)
        assert rb.analytic == 1.0
        assert rb.monte_carlo == 1.0

    def test_monte_carlo_concentrates(self):
        lex = BilingualLexicon((f"s{i}", f"t{i}") for i in range(108))
        rb = random_baseline(lex, trials=100_000, seed=1)
        assert abs(rb.monte_carlo - rb.analytic) <= 2e-3

    def test_multi_target_queries(self):
        lex = BilingualLexicon([("a", "x"), ("a", "y"), ("b", "z")])
        rb = random_baseline(lex, trials=50_000, seed=2)
        expected = (2 / 3 + 1 / 3) / 2
        assert rb.analytic == pytest.approx(expected, abs=1e-12)
        assert abs(rb.monte_carlo - expected) <= 0.01


class TestCslsScorerCache:
    def test_cached_r_source_matches_direct(self):
        rng = np.random.default_rng(11)
        t = unit_rows(rng.standard_normal((40, 5)))
        s = unit_rows(rng.standard_normal((35, 5)))
        scorer = CslsScorer(t, s, k=7)
        q = unit_rows(rng.standard_normal((3, 5)))
        batch = scorer.scores(q)
        for i in range(3):
            one = csls_brute(q[i], t, s, k=7)
            np.testing.assert_allclose(batch[i], one, atol=1e-10)
