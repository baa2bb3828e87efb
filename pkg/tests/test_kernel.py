"""Kernel module: closed forms, Gram construction, backend parity."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsbandits import kernel
from nsbandits.kernel import KernelSpec, as_point_matrix, gram, kernel_eval, sup_norm

ALPHAS = (0.5, 1.5, 2.5)


class TestKernelSpec:
    def test_defaults(self):
        spec = KernelSpec()
        assert spec.alpha == 2.5 and spec.lengthscale == 1.0

    @pytest.mark.parametrize("alpha", [0.0, 1.0, 2.0, 3.5, -0.5])
    def test_invalid_alpha_rejected(self, alpha):
        with pytest.raises(ValueError):
            KernelSpec(alpha=alpha)

    @pytest.mark.parametrize("ls", [0.0, -1.0])
    def test_invalid_lengthscale_rejected(self, ls):
        with pytest.raises(ValueError):
            KernelSpec(lengthscale=ls)


class TestEval:
    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_zero_distance_is_one(self, alpha):
        spec = KernelSpec(alpha=alpha, lengthscale=1.0)
        assert kernel_eval(spec, 0.7, 0.7) == 1.0

    def test_exponential_closed_form_at_unit_distance(self):
        # k(r) = exp(-r/l) for alpha = 1/2
        spec = KernelSpec(alpha=0.5, lengthscale=1.0)
        assert kernel_eval(spec, 0.0, 1.0) == pytest.approx(math.exp(-1.0), abs=1e-12)

    def test_matern52_closed_form_at_unit_distance(self):
        # (1 + sqrt5 + 5/3) * exp(-sqrt5), hand-checked high-precision value
        spec = KernelSpec(alpha=2.5, lengthscale=1.0)
        expected = 0.5239941088318203
        assert kernel_eval(spec, 0.0, 1.0) == pytest.approx(expected, abs=1e-15)

    def test_matern32_closed_form(self):
        spec = KernelSpec(alpha=1.5, lengthscale=2.0)
        r = 1.3
        expected = (1 + math.sqrt(3) * r / 2) * math.exp(-math.sqrt(3) * r / 2)
        assert kernel_eval(spec, 0.0, r) == pytest.approx(expected, rel=1e-14)

    @settings(max_examples=50, deadline=None)
    @given(x=st.floats(-10, 10), y=st.floats(-10, 10),
           alpha=st.sampled_from(ALPHAS),
           ls=st.floats(0.1, 10))
    def test_symmetry_and_bounds(self, x, y, alpha, ls):
        spec = KernelSpec(alpha=alpha, lengthscale=ls)
        a = kernel_eval(spec, x, y)
        assert a == kernel_eval(spec, y, x)
        assert 0.0 < a <= 1.0
        if x == y:
            assert a == 1.0
        elif abs(x - y) > 1e-6 * ls:
            # strictly below 1 away from the diagonal (near-coincident
            # points can round to 1.0 in double precision)
            assert a < 1.0

    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_monotone_decay_in_distance(self, alpha):
        spec = KernelSpec(alpha=alpha, lengthscale=1.3)
        rs = np.linspace(0.0, 8.0, 40)
        vals = [kernel_eval(spec, 0.0, r) for r in rs]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_multidimensional_points_use_euclidean_distance(self):
        spec = KernelSpec(alpha=2.5, lengthscale=1.0)
        a = kernel_eval(spec, [0.0, 0.0], [3.0, 4.0])
        b = kernel_eval(spec, 0.0, 5.0)
        assert a == pytest.approx(b, rel=1e-14)


class TestGram:
    def test_single_point(self):
        spec = KernelSpec()
        assert gram(spec, [0.3], 0.0).tolist() == [[1.0]]

    def test_duplicate_point_with_diag(self):
        spec = KernelSpec()
        G = gram(spec, [0.3, 0.3], 0.5)
        np.testing.assert_array_equal(G, [[1.5, 1.0], [1.0, 1.5]])

    def test_exact_symmetry_and_positive_definite(self):
        spec = KernelSpec()
        rng = np.random.default_rng(7)
        xs = rng.uniform(0, 5, 50)
        G = gram(spec, xs, 0.1)
        np.testing.assert_array_equal(G, G.T)  # exact, not approximate
        assert np.linalg.eigvalsh(G).min() > 0  # dense eigensolver oracle

    def test_three_point_eigenvalues(self):
        spec = KernelSpec()
        G = gram(spec, [0.0, 1.0, 2.5], 0.1)
        np.testing.assert_array_equal(G, G.T)
        assert np.linalg.eigvalsh(G).min() > 0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            gram(KernelSpec(), np.empty((0, 1)), 0.1)

    def test_negative_diag_rejected(self):
        with pytest.raises(ValueError):
            gram(KernelSpec(), [0.0, 1.0], -0.1)

    def test_matches_pairwise_eval(self):
        spec = KernelSpec(alpha=1.5, lengthscale=0.8)
        xs = np.array([0.0, 0.7, 1.9, 4.2])
        G = gram(spec, xs, 0.25)
        for i, xi in enumerate(xs):
            for j, xj in enumerate(xs):
                expected = kernel_eval(spec, xi, xj) + (0.25 if i == j else 0.0)
                assert G[i, j] == pytest.approx(expected, abs=1e-15)


class TestSupNorm:
    @pytest.mark.parametrize("alpha", ALPHAS)
    def test_is_one(self, alpha):
        assert sup_norm(KernelSpec(alpha=alpha)) == 1.0


class TestAsPointMatrix:
    def test_scalar_and_vector_coercion(self):
        assert as_point_matrix(3.0).shape == (1, 1)
        assert as_point_matrix([1.0, 2.0, 3.0]).shape == (3, 1)
        assert as_point_matrix([[1.0, 2.0]]).shape == (1, 2)

    def test_higher_rank_rejected(self):
        with pytest.raises(ValueError):
            as_point_matrix(np.zeros((2, 2, 2)))


class TestBackendParity:
    """The compiled extension and the NumPy fallback must agree closely."""

    def test_backend_name_is_known(self):
        assert kernel.backend_name() in ("compiled", "numpy")

    @pytest.mark.parametrize("case", [0, 1, 2])
    def test_cross_and_gram_match(self, case):
        try:
            from nsbandits import _ckern
        except ImportError:
            pytest.skip("compiled backend not built")
        from nsbandits import _nkern
        rng = np.random.default_rng(11)
        X = rng.uniform(0, 5, (40, 2))
        Y = rng.uniform(0, 5, (17, 2))
        inv_l = 1.0 / 0.9
        np.testing.assert_allclose(_ckern.cross(case, inv_l, X, Y),
                                   _nkern.cross(case, inv_l, X, Y),
                                   rtol=1e-14, atol=1e-15)
        np.testing.assert_allclose(_ckern.gram(case, inv_l, X, 0.3),
                                   _nkern.gram(case, inv_l, X, 0.3),
                                   rtol=1e-14, atol=1e-15)
