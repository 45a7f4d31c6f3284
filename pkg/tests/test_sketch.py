import numpy as np
import pytest

from ipm_lab.errors import SketchTooWideError
from ipm_lab.harness import generate_synthetic_lp
from ipm_lab.normal_eq import scaling_d2
from ipm_lab.sketch import (build_sketch, embedding_check, identity_sketch,
                            sketch_dims)


def scaled_constraints(m, n, seed=0):
    lp, p0 = generate_synthetic_lp(m, n, seed=seed)
    return lp.a * np.sqrt(scaling_d2(p0))


class TestConstruction:
    def test_explicit_width_override(self):
        w = build_sketch(70, 20, 0.5, 0.1, seed=1, cols_override=60)
        assert w.n_cols == 60 and w.n_rows == 70
        _, s = sketch_dims(20, 0.5, 0.1)
        assert w.nnz_per_row == s

    def test_row_structure(self):
        w = build_sketch(100, 10, 0.5, 0.1, seed=2, cols_override=50)
        s = w.nnz_per_row
        assert w.idx.shape == (100, s)
        # distinct column indices per row, entries +-scale
        for row in w.idx:
            assert len(set(row.tolist())) == s
        assert np.all(np.isin(w.signs, [-1, 1]))
        assert w.scale == pytest.approx(1.0 / np.sqrt(s))

    def test_determinism(self):
        w1 = build_sketch(80, 10, 0.5, 0.1, seed=7, cols_override=40)
        w2 = build_sketch(80, 10, 0.5, 0.1, seed=7, cols_override=40)
        np.testing.assert_array_equal(w1.idx, w2.idx)
        np.testing.assert_array_equal(w1.signs, w2.signs)

    def test_too_wide_errors(self):
        with pytest.raises(SketchTooWideError):
            build_sketch(30, 20, 0.5, 0.1, seed=0)

    def test_ones_vector_bound(self):
        w = build_sketch(90, 10, 0.5, 0.1, seed=3, cols_override=45)
        out = w.apply_t(np.ones(90))
        assert np.max(np.abs(out)) <= 90 * w.scale + 1e-12


class TestApply:
    def test_adjointness(self):
        rng = np.random.default_rng(4)
        w = build_sketch(60, 10, 0.5, 0.1, seed=4, cols_override=30)
        a, b = rng.standard_normal(60), rng.standard_normal(30)
        lhs = float(w.apply_t(a) @ b)
        rhs = float(a @ w.apply(b))
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_right_multiply_matches_apply(self):
        rng = np.random.default_rng(5)
        w = build_sketch(40, 5, 0.5, 0.1, seed=5, cols_override=20)
        mat = rng.standard_normal((5, 40))
        expected = np.vstack([w.apply_t(row) for row in mat])
        np.testing.assert_allclose(w.right_multiply(mat), expected, rtol=1e-12)


class TestEmbedding:
    def test_identity_sketch_is_exact_zero(self):
        ad = scaled_constraints(4, 30)
        assert embedding_check(identity_sketch(30), ad) == 0.0

    def test_one_row_reduction(self):
        # m = 1: the check collapses to |sum of squared sketched entries - 1|
        ad = scaled_constraints(1, 40)
        w = build_sketch(40, 1, 0.5, 0.1, seed=6, cols_override=20)
        v = ad / np.linalg.norm(ad)  # the 1-row V of the thin SVD, up to sign
        expected = abs(float(np.sum(w.right_multiply(v) ** 2)) - 1.0)
        assert embedding_check(w, ad) == pytest.approx(expected, rel=1e-10)

    def test_monte_carlo_failure_rate(self):
        # at the formula sizes, the embedding holds in >= (1 - eta) of seeds
        m, zeta, eta = 5, 0.5, 0.3
        w_size, _ = sketch_dims(m, zeta, eta)
        n = 2 * w_size
        ad = scaled_constraints(m, n)
        fails = 0
        seeds = 40
        for seed in range(seeds):
            w = build_sketch(n, m, zeta, eta, seed)
            if embedding_check(w, ad) > zeta / 2:
                fails += 1
        assert fails <= eta * seeds
