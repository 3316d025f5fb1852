import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dunklsob.constants import macdonald_mehta
from dunklsob.errors import (ArgumentTooLargeError, NonpositiveTimeError, UnsupportedRootSystemError,
                             ValidationError)
from dunklsob.fields import ScalarField, constant, coordinate_times_gaussian, gaussian, gaussian_mixture
from dunklsob.kernel import (HeatOperator, Rank1Kernel, besov_norm, default_t_grid, dunkl_transform,
                             heat_apply, heat_field, heat_kernel, heat_kernel_bound, heat_sup_norm,
                             product_kernel_eval, rank1_kernel, rank1_kernel_eval, transform_l2_norm)
from dunklsob.quadrature import WeightedDomain, integrate_weighted, lp_norm
from dunklsob.rootsys import build_root_system

from conftest import SYSTEMS

A1 = SYSTEMS["a1"]
A1X2 = SYSTEMS["a1x2"]


class TestRank1Kernel:
    def test_coefficients(self):
        c = Rank1Kernel(1.0).coefficients
        np.testing.assert_allclose(c[:4], [1.0, 1 / 3, 1 / 6, 1 / 30], rtol=1e-15)

    def test_exponential_limit(self):
        c = Rank1Kernel(0.0).coefficients[:20]
        np.testing.assert_allclose(c, [1 / math.factorial(m) for m in range(20)], rtol=1e-14)
        assert rank1_kernel_eval(0.0, 1.0, 2.0) == pytest.approx(math.exp(2.0), rel=1e-12)

    @pytest.mark.parametrize("k", [0.0, 0.5, 1.0, 2.5])
    def test_origin(self, k):
        assert rank1_kernel_eval(k, 0.0, 7.0) == 1.0

    def test_argument_cap(self):
        with pytest.raises(ArgumentTooLargeError):
            rank1_kernel_eval(1.0, 10.0, 6.0)

    def test_negative_multiplicity(self):
        with pytest.raises(ValidationError):
            Rank1Kernel(-1.0)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.0, 3.0), st.floats(-7.0, 7.0))
    def test_positive(self, k, z):
        assert rank1_kernel_eval(k, z, 1.0) > 0

    @pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
    def test_eigen_relation(self, k, rng):
        # T_x E(xy) = y E(xy) with T f(x) = f'(x) + k (f(x) - f(-x)) / x
        ker = rank1_kernel(k)
        x = rng.uniform(-3.0, 3.0, 200)
        y = rng.uniform(-3.0, 3.0, 200)
        keep = np.abs(x * y) <= 10
        x, y = x[keep], y[keep]
        z = x * y
        lhs = y * ker.series_derivative(z) + k * (ker.series(z) - ker.series(-z)) / x
        rhs = y * ker.series(z)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-8, atol=1e-12)

    @pytest.mark.parametrize("k", [0.5, 1.0, 3.0])
    def test_bessel_branch_continuity(self, k):
        ker = rank1_kernel(k)
        z = np.array([0.999999, 1.000001, 5.0, -5.0, 20.0])
        np.testing.assert_allclose(ker.real(z), ker.series(z), rtol=1e-12)

    @pytest.mark.parametrize("k", [0.5, 1.0])
    def test_imaginary_branch(self, k):
        ker = rank1_kernel(k)
        u = np.array([0.5, 2.0, -4.0, 9.0])
        np.testing.assert_allclose(ker.imaginary(u), ker.series(1j * u), rtol=1e-10, atol=1e-12)


class TestProductKernel:
    def test_origin(self):
        assert product_kernel_eval(A1X2, np.zeros(2), np.array([1.0, 3.0])) == 1.0

    def test_classical(self, rng):
        rs = build_root_system("A1_PRODUCT", 2, 0.0)
        x, y = rng.normal(size=(2, 20, 2))
        np.testing.assert_allclose(product_kernel_eval(rs, x, y), np.exp(np.sum(x * y, axis=1)), rtol=1e-12)

    def test_imaginary_bounded(self, rng):
        x, y = rng.uniform(-5, 5, size=(2, 1000, 2))
        assert np.all(np.abs(product_kernel_eval(A1X2, -1j * x, y)) <= 1 + 1e-12)

    def test_growth(self, rng):
        x, y = rng.uniform(-3, 3, size=(2, 1000, 2))
        bound = np.exp(np.sum(np.abs(x * y), axis=1))
        assert np.all(product_kernel_eval(A1X2, x, y) <= bound * (1 + 1e-12))

    @pytest.mark.parametrize("key", ["a2", "b2", "i2_5"])
    def test_unsupported(self, key):
        with pytest.raises(UnsupportedRootSystemError):
            product_kernel_eval(SYSTEMS[key], np.ones(2), np.ones(2))


class TestHeatKernel:
    @pytest.mark.parametrize("t", [0.1, 1.0, 3.0])
    def test_origin(self, t):
        expected = 1 / (2 * math.sqrt(2 * math.pi) * (2 * t) ** 1.5)
        assert heat_kernel(A1, t, np.zeros(1), np.zeros(1)) == pytest.approx(expected, rel=1e-14)

    @pytest.mark.parametrize("x", [0.0, 1.0])
    @pytest.mark.parametrize("t", [0.1, 1.0])
    def test_mass(self, x, t):
        f = lambda y: heat_kernel(A1, t, np.full((y.shape[0], 1), x), y)  # noqa: E731
        res = integrate_weighted(f, WeightedDomain.full_space(A1), 1e-10,
                                 radius=abs(x) + 12 * math.sqrt(t), r_breaks=(abs(x),))
        assert res.value == pytest.approx(1.0, abs=1e-6)

    def test_symmetry(self, rng):
        x, y = rng.normal(size=(2, 100, 2))
        np.testing.assert_allclose(heat_kernel(A1X2, 0.3, x, y), heat_kernel(A1X2, 0.3, y, x), rtol=1e-12)

    def test_bound(self, rng):
        for rs in (A1, A1X2):
            t = np.exp(rng.uniform(np.log(1e-2), np.log(1e2), 1000))
            x = rng.uniform(-4, 4, size=(1000, rs.dimension))
            y = rng.uniform(-4, 4, size=(1000, rs.dimension))
            for ti, xi, yi in zip(t, x, y):
                h = heat_kernel(rs, ti, xi, yi)
                b = heat_kernel_bound(rs, ti, xi, yi)
                assert 0 <= h <= b * (1 + 1e-10)
                # positivity is only visible where the value is representable
                assert h > 0 or b < 1e-290

    def test_nonpositive_time(self):
        with pytest.raises(NonpositiveTimeError):
            heat_kernel(A1, 0.0, np.zeros(1), np.zeros(1))


class TestHeatSemigroup:
    def test_time_zero(self, rng):
        f = gaussian_mixture(1, 4)
        x = rng.normal(size=(10, 1))
        np.testing.assert_array_equal(heat_apply(A1, f, 0.0, x), f(x))

    @pytest.mark.parametrize("t", [0.1, 1.0, 4.0])
    def test_constant(self, t):
        x = np.linspace(-2, 2, 9)[:, None]
        np.testing.assert_allclose(heat_apply(A1, constant(1), t, x), 1.0, atol=1e-6)

    def test_gaussian_closed_form(self):
        # P_t e^{-x^2/2} = (1 + 2t)^{-d/2} e^{-x^2 / (2(1 + 2t))}
        x = np.linspace(-3, 3, 13)[:, None]
        for t in (0.05, 0.5, 2.0):
            exact = (1 + 2 * t) ** -1.5 * np.exp(-x[:, 0] ** 2 / (2 * (1 + 2 * t)))
            np.testing.assert_allclose(heat_apply(A1, gaussian(1), t, x), exact, rtol=1e-8, atol=1e-14)

    def test_grid_matches_adaptive(self):
        f = coordinate_times_gaussian(1)
        x = np.array([[-1.3], [0.2], [2.0]])
        a = heat_apply(A1, f, 0.3, x)
        b = heat_apply(A1, f, 0.3, x, method="adaptive")
        np.testing.assert_allclose(a, b, rtol=1e-7, atol=1e-12)

    def test_semigroup_law(self):
        f = gaussian_mixture(1, 8)
        x = np.linspace(-2, 2, 7)[:, None]
        once = heat_apply(A1, f, 0.5, x)
        twice = HeatOperator(A1, 0.25).apply(heat_field(A1, f, 0.25), x)
        np.testing.assert_allclose(twice, once, rtol=1e-4)

    def test_linear_and_positive(self, rng):
        f, g = gaussian(1, 0.7), gaussian_mixture(1, 3)
        x = rng.normal(size=(8, 1))
        both = ScalarField(lambda y: 2 * f(y) + g(y), 1, decay=g.decay,
                           name="2f+g")
        np.testing.assert_allclose(heat_apply(A1, both, 0.4, x),
                                   2 * heat_apply(A1, f, 0.4, x) + heat_apply(A1, g, 0.4, x), rtol=1e-8)
        assert np.all(heat_apply(A1, gaussian(1, 0.3, center=[1.0]), 0.2, x) >= 0)

    def test_rank_two(self):
        # P_t of the standard Gaussian is (1 + 2t)^{-d/2} exp(-|x|^2 / (2 (1 + 2t)))
        x = np.array([[0.3, -0.4], [1.0, 1.0]])
        d = A1X2.effective_dimension
        exact = 2.0 ** (-d / 2) * np.exp(-np.sum(x ** 2, axis=1) / 4)
        np.testing.assert_allclose(heat_apply(A1X2, gaussian(2), 0.5, x), exact, rtol=1e-7)

    def test_negative_time(self):
        with pytest.raises(NonpositiveTimeError):
            heat_apply(A1, gaussian(1), -0.1, np.zeros(1))

    def test_ultracontractive_pinf(self):
        f = gaussian_mixture(1, 5)
        for t in (0.01, 1.0, 100.0):
            assert heat_sup_norm(A1, f, t) <= lp_norm(f, np.inf, WeightedDomain.full_space(A1)) * (1 + 1e-8)


class TestTransform:
    def test_gaussian_at_zero(self):
        assert dunkl_transform(A1, gaussian(1), np.zeros(1)) == pytest.approx(1.0, rel=1e-10)

    def test_gaussian_self_dual(self):
        xi = np.linspace(-3, 3, 7)[:, None]
        np.testing.assert_allclose(dunkl_transform(A1, gaussian(1), xi), np.exp(-xi[:, 0] ** 2 / 2),
                                   atol=1e-10)

    def test_zero(self):
        assert dunkl_transform(A1, constant(1, 0.0, radius=1.0), np.ones(1)) == 0

    def test_positive_at_zero(self):
        f = gaussian(1, 0.6, center=[0.4])
        l1 = lp_norm(f, 1, WeightedDomain.full_space(A1))
        assert dunkl_transform(A1, f, np.zeros(1)).real == pytest.approx(l1 / macdonald_mehta(A1), rel=1e-9)

    @pytest.mark.parametrize("f", [gaussian(1), coordinate_times_gaussian(1), gaussian(1, 0.7, center=[0.5])],
                             ids=lambda f: f.name)
    def test_plancherel(self, f):
        lhs = transform_l2_norm(A1, f, 12.0)
        assert lhs == pytest.approx(lp_norm(f, 2, WeightedDomain.full_space(A1)), rel=1e-4)

    def test_unsupported(self):
        with pytest.raises(UnsupportedRootSystemError):
            dunkl_transform(SYSTEMS["a2"], gaussian(2), np.zeros(2))


class TestBesov:
    def test_default_grid(self):
        g = default_t_grid()
        assert g.size == 61 and g[0] == pytest.approx(1e-3) and g[-1] == pytest.approx(1e3)

    def test_zero(self):
        assert besov_norm(A1, constant(1, 0.0, radius=1.0), -0.5) == 0.0

    def test_homogeneous(self):
        f = gaussian(1)
        grid = default_t_grid(13)
        assert besov_norm(A1, f.scaled(-3.0), -0.5, grid) == pytest.approx(3 * besov_norm(A1, f, -0.5, grid),
                                                                           rel=1e-12)

    def test_refinement(self):
        f = gaussian(1)
        base = besov_norm(A1, f, -0.5)
        fine = besov_norm(A1, f, -0.5, default_t_grid(121))
        assert math.isfinite(base)
        assert fine == pytest.approx(base, rel=1e-2)

    def test_gaussian_value(self):
        # sup_t t^{1/4} (1 + 2t)^{-3/2} is attained at t = 1/10
        t = 0.1
        exact = t ** 0.25 * (1 + 2 * t) ** -1.5
        assert besov_norm(A1, gaussian(1), -0.5, default_t_grid(121)) == pytest.approx(exact, rel=1e-3)

    def test_positive_s(self):
        with pytest.raises(ValidationError):
            besov_norm(A1, gaussian(1), 0.5)
