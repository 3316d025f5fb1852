import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dunklsob.constants import (ball_measure, chamber_sphere_constant, classical_constant,
                                constants_report, dunkl_constant_bounds, extremal_profile,
                                gamma_bound_constant, group_order, macdonald_mehta,
                                macdonald_mehta_product, nash_bound_closed, nash_bound_numeric,
                                nash_constant, sharp_gamma_bound_constant, sobolev_exponent,
                                sobolev_from_nash, sphere_constant, talenti_bound, talenti_functional,
                                weyl_constant, weyl_constant_via_sphere)
from dunklsob.errors import DivergentIntegralError, ParameterRangeError
from dunklsob.rootsys import build_root_system, generate_group

from conftest import SYSTEMS

SQRT2PI = math.sqrt(2 * math.pi)


def a1(n=1, k=1.0):
    return build_root_system("A1_PRODUCT", n, k)


class TestMacdonaldMehta:
    @pytest.mark.parametrize("n, k, expected", [
        (1, 1.0, 2 * SQRT2PI),
        (2, (1.0, 1.0), 8 * math.pi),
        (1, 0.0, SQRT2PI),
        (3, 0.0, (2 * math.pi) ** 1.5),
    ])
    def test_product_systems(self, n, k, expected):
        rs = a1(n, k)
        assert macdonald_mehta(rs) == pytest.approx(expected, rel=1e-14)
        assert macdonald_mehta_product(rs) == pytest.approx(expected, rel=1e-14)

    # values from direct quadrature of exp(-|x|^2/2) w_k on the plane
    @pytest.mark.parametrize("key, expected", [("a2", 24 * math.pi), ("b2", 64.0)])
    def test_rank_two(self, key, expected):
        assert macdonald_mehta(SYSTEMS[key]) == pytest.approx(expected, rel=1e-12)

    def test_b2_equal(self):
        rs = build_root_system("B2", multiplicities=1.0)
        assert macdonald_mehta(rs) == pytest.approx(96 * math.pi, rel=1e-12)


class TestSphere:
    def test_a1(self):
        assert sphere_constant(a1()) == pytest.approx(4.0, rel=1e-14)
        assert chamber_sphere_constant(a1()) == pytest.approx(2.0, rel=1e-14)

    def test_circle(self):
        assert sphere_constant(a1(2, 0.0)) == pytest.approx(2 * math.pi, rel=1e-14)

    def test_ball_measure(self):
        assert ball_measure(a1(), 2.0) == pytest.approx(4 * 8 / 3, rel=1e-14)

    def test_group_order_trivial(self):
        assert group_order(a1(2, 0.0)) == 1
        assert group_order(SYSTEMS["b2"]) == generate_group(SYSTEMS["b2"]).order


class TestTalenti:
    def test_extremal_value(self):
        assert talenti_functional(extremal_profile(3, 2), 3, 2) == pytest.approx(talenti_bound(3, 2), rel=1e-6)

    @pytest.mark.parametrize("d, p", [(3, 1.5), (4, 2), (5, 3), (8, 2), (3.5, 2.5)])
    def test_extremal_attains(self, d, p):
        assert talenti_functional(extremal_profile(d, p, 2.0, 0.5), d, p) == pytest.approx(
            talenti_bound(d, p), rel=1e-6)

    def test_profile_shape(self):
        phi = extremal_profile(3, 2, 1.0, 1.0)
        r = np.linspace(0, 5, 11)
        np.testing.assert_allclose(phi(r), (1 + r ** 2) ** -0.5, rtol=1e-15)
        assert extremal_profile(4, 2, 3.0, 1.0)(0.0) == pytest.approx(3.0 ** (1 - 4 / 2))

    def test_scale_pair_invariance(self):
        j1 = talenti_functional(extremal_profile(4, 2, 1.0, 2.0), 4, 2)
        j2 = talenti_functional(extremal_profile(4, 2, 3.0, 6.0), 4, 2)
        assert j1 == pytest.approx(j2, rel=1e-8)

    @settings(max_examples=10, deadline=None)
    @given(st.floats(0.1, 10.0), st.floats(0.2, 5.0))
    def test_scaling_and_dilation(self, lam, mu):
        g, dg = (lambda r: np.exp(-r * r), lambda r: -2 * r * np.exp(-r * r))
        base = talenti_functional((g, dg), 3, 2)
        scaled = talenti_functional((lambda r: lam * g(r), lambda r: lam * dg(r)), 3, 2)
        dilated = talenti_functional((lambda r: g(mu * r), lambda r: mu * dg(mu * r)), 3, 2)
        assert scaled == pytest.approx(base, rel=1e-8)
        assert dilated == pytest.approx(base, rel=1e-8)
        assert base <= talenti_bound(3, 2)

    def test_divergent(self):
        with pytest.raises(DivergentIntegralError):
            talenti_functional((lambda r: (1 + r) ** -0.3, lambda r: -0.3 * (1 + r) ** -1.3), 3, 2)

    @pytest.mark.parametrize("p, d", [(1.0, 3), (3.0, 3), (0.5, 2)])
    def test_range(self, p, d):
        with pytest.raises(ParameterRangeError):
            talenti_bound(d, p)
        with pytest.raises(ParameterRangeError):
            extremal_profile(d, p)

    def test_conjugate_exponent(self):
        assert sobolev_exponent(2, 3) == 6


class TestWeyl:
    def test_a1(self):
        assert weyl_constant(a1(), 2) == pytest.approx(0.7884111254376629, rel=1e-12)

    def test_classical_r3(self):
        # Aubin-Talenti constant in R^3: sqrt(4 / (n (n - 2) |S^n|^{2/n}))
        expected = math.sqrt(4 / (3 * (2 * math.pi ** 2) ** (2 / 3)))
        assert weyl_constant(a1(3, 0.0), 2) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("p", [1.5, 2.0, 2.5])
    def test_two_routes(self, rs, p):
        if p >= rs.effective_dimension:
            pytest.skip("p outside (1, d)")
        assert weyl_constant(rs, p) == pytest.approx(weyl_constant_via_sphere(rs, p), rel=1e-10)

    def test_matches_upper_bound(self, rs):
        if rs.effective_dimension <= 2:
            pytest.skip("needs d > 2")
        assert classical_constant(rs, 2) == pytest.approx(dunkl_constant_bounds(rs)[1], rel=1e-12)


class TestDunklBounds:
    def test_a1(self):
        lo, hi = dunkl_constant_bounds(a1())
        assert lo == pytest.approx(0.6257623249515891, rel=1e-12)
        assert hi == pytest.approx(0.7884111254376629, rel=1e-12)
        assert hi / lo == pytest.approx(2 ** (1 / 3), rel=1e-14)

    def test_ratio(self, rs):
        d = rs.effective_dimension
        lo, hi = dunkl_constant_bounds(rs)
        assert hi / lo == pytest.approx(group_order(rs) ** (1 / d), rel=1e-13)

    def test_classical(self):
        lo, hi = dunkl_constant_bounds(a1(3, 0.0))
        assert lo == hi

    def test_range(self):
        with pytest.raises(ParameterRangeError):
            dunkl_constant_bounds(a1(2, 0.0))


class TestNash:
    def test_a1(self):
        assert nash_constant(a1()) == pytest.approx(0.658370965486288, rel=1e-12)

    def test_symbolic_form(self, rs):
        d = rs.effective_dimension
        expected = (((d + 2) / d) ** ((d + 2) / (2 * d)) * (d / 2) ** (1 / d)
                    * (sphere_constant(rs) / (d * macdonald_mehta(rs) ** 2)) ** (1 / d))
        assert nash_constant(rs) == pytest.approx(expected, rel=1e-13)

    def test_numeric_minimization(self, rng):
        for _ in range(10):
            A, B = np.exp(rng.uniform(-3, 3, size=2))
            d = rng.uniform(1, 8)
            assert nash_bound_numeric(A, B, d) == pytest.approx(nash_bound_closed(A, B, d), rel=1e-10)

    def test_gaussian_witness(self):
        # moment table: ||f||_2 = pi^{1/4}, ||grad_k f||_2^2 = 1.5 sqrt(pi), ||f||_1 = 2 sqrt(2 pi)
        n2, g, n1 = math.pi ** 0.25, math.sqrt(1.5 * math.sqrt(math.pi)), 2 * SQRT2PI
        q = n2 ** (1 + 2 / 3) / (g * n1 ** (2 / 3))
        assert q == pytest.approx(0.337339, abs=1e-6)
        assert q <= nash_constant(a1())

    def test_sobolev_from_nash(self):
        rs = a1()
        c = nash_constant(rs)
        assert sobolev_from_nash(rs) == pytest.approx(2 ** 5 * 63 ** (1 / 6) * c, rel=1e-13)
        assert sobolev_from_nash(rs, 2 * c) == pytest.approx(2 * sobolev_from_nash(rs, c), rel=1e-14)
        assert sobolev_from_nash(rs) >= dunkl_constant_bounds(rs)[1]


class TestGammaBound:
    def test_a1(self):
        assert gamma_bound_constant(a1()) == pytest.approx(1 / 3, rel=1e-15)

    def test_a1_pair(self):
        c = 0.5 / math.sqrt(2)
        assert gamma_bound_constant(a1(2, (1.0, 1.0))) == pytest.approx(c / (1 + c), rel=1e-14)

    def test_classical(self):
        assert gamma_bound_constant(a1(2, 0.0)) == 1.0

    def test_sharp_not_smaller_for_products(self):
        for n in (1, 2, 3):
            rs = a1(n, 1.0)
            assert sharp_gamma_bound_constant(rs) >= gamma_bound_constant(rs) * (1 - 1e-14)


class TestReport:
    def test_fields(self):
        rep = constants_report(a1())
        assert rep.effective_dimension == 3
        assert rep.nash_constant == pytest.approx(nash_constant(a1()))
        assert set(rep.to_dict()) >= {"gamma", "macdonald_mehta", "weyl_constant"}

    def test_low_dimension(self):
        rep = constants_report(a1(1, 0.0))
        assert rep.talenti_bound is None
