import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dunklsob.constants import macdonald_mehta, sphere_constant
from dunklsob.errors import NoConvergenceError, UnboundedDomainError, UnsupportedShapeError, ValidationError
from dunklsob.fields import (ScalarField, bump, carre_du_champ, constant, coordinate_times_gaussian,
                             dunkl_gradient, gaussian, gaussian_mixture, smoothed_box)
from dunklsob.quadrature import (WeightedDomain, integrate_weighted, level_set_measure, lp_norm,
                                 measure, perimeter, sphere_weight_integral, weak_lq_norm)
from dunklsob.rootsys import build_root_system, generate_group

from conftest import SYSTEMS


def full(rs):
    return WeightedDomain.full_space(rs)


class TestDomain:
    def test_ball_radius(self, a1):
        with pytest.raises(ValidationError):
            WeightedDomain.ball(a1, 0.0)

    def test_box_order(self, a1):
        with pytest.raises(ValidationError):
            WeightedDomain.box(a1, (2.0,), (1.0,))


class TestIntegrate:
    def test_gaussian_full_a1(self, a1):
        f = gaussian(1)
        res = integrate_weighted(f, full(a1), 1e-10)
        assert res.value == pytest.approx(2 * math.sqrt(2 * math.pi), rel=1e-10)
        assert res.error_estimate >= 0
        assert res.cells_used > 0

    def test_unit_ball_a1(self, a1):
        res = integrate_weighted(constant(1), WeightedDomain.ball(a1, 1.0), 1e-12)
        assert res.value == pytest.approx(4 / 3, rel=1e-12)

    def test_zero(self, rs):
        res = integrate_weighted(constant(rs.dimension, 0.0), WeightedDomain.ball(rs, 1.0))
        assert res.value == 0.0

    def test_unbounded_without_decay(self, a1):
        f = ScalarField(lambda x: np.exp(-x[:, 0] ** 2), 1)
        with pytest.raises(UnboundedDomainError):
            integrate_weighted(f, full(a1))

    def test_cell_cap(self, a1):
        f = smoothed_box(1.0, 2.0, 1e-4)
        with pytest.raises(NoConvergenceError):
            integrate_weighted(f, WeightedDomain.ball(a1, 3.0), 1e-14, max_cells=4)

    def test_macdonald_mehta(self, rs):
        res = integrate_weighted(gaussian(rs.dimension), full(rs), 1e-10)
        assert res.value == pytest.approx(macdonald_mehta(rs), rel=1e-8)

    def test_chamber_split(self, rs):
        f = gaussian_mixture(rs.dimension, 9)
        total = integrate_weighted(f, full(rs), 1e-12).value
        parts = [integrate_weighted(f, WeightedDomain.in_chamber(rs, c), 1e-12).value for c in rs.chambers]
        assert math.fsum(parts) == pytest.approx(total, rel=1e-10)

    def test_group_invariance(self, rs):
        f = gaussian_mixture(rs.dimension, 13)
        base = integrate_weighted(f, full(rs), 1e-10).value
        for g in generate_group(rs).elements[:4]:
            moved = integrate_weighted(f.transformed(g), full(rs), 1e-10).value
            assert moved == pytest.approx(base, rel=1e-8)

    def test_recorded_cells_sum(self, a1):
        res = integrate_weighted(gaussian(1), WeightedDomain.ball(a1, 2.0), 1e-10, record_cells=True)
        assert math.fsum(c.value for c in res.cells) == pytest.approx(res.value, rel=1e-13)

    def test_integration_by_parts(self, rs):
        n = rs.dimension
        f = bump(n, np.full(n, 0.3), 1.4)
        g = bump(n, np.full(n, -0.2), 1.6)
        dom = WeightedDomain.ball(rs, 1.6)
        for i in range(n):
            lhs = integrate_weighted(lambda x: dunkl_gradient(rs, f, x)[:, i] * g(x), dom, 1e-8).value
            rhs = -integrate_weighted(lambda x: f(x) * dunkl_gradient(rs, g, x)[:, i], dom, 1e-8).value
            assert lhs == pytest.approx(rhs, rel=1e-4, abs=1e-10)


class TestDirichlet:
    def test_odd_gaussian_a1(self, a1):
        f = coordinate_times_gaussian(1)
        dec = f.decay
        gam = integrate_weighted(lambda x: carre_du_champ(a1, f, x), full(a1), 1e-10, decay=dec).value
        dk = integrate_weighted(lambda x: np.sum(dunkl_gradient(a1, f, x) ** 2, axis=1), full(a1), 1e-10,
                                decay=dec).value
        cl = integrate_weighted(lambda x: np.sum(f.grad(x) ** 2, axis=1), full(a1), 1e-10, decay=dec).value
        assert gam == pytest.approx(15 / 4 * math.sqrt(math.pi), rel=1e-6)
        assert dk == pytest.approx(15 / 4 * math.sqrt(math.pi), rel=1e-6)
        assert cl == pytest.approx(7 / 4 * math.sqrt(math.pi), rel=1e-6)


class TestNorms:
    def test_gaussian_l2(self, a1):
        assert lp_norm(gaussian(1), 2, full(a1)) == pytest.approx(math.pi ** 0.25, rel=1e-9)

    def test_gaussian_l1(self, a1):
        assert lp_norm(gaussian(1), 1, full(a1)) == pytest.approx(2 * math.sqrt(2 * math.pi), rel=1e-9)

    @pytest.mark.parametrize("p", [1, 2, 3.5, np.inf])
    def test_zero(self, rs, p):
        assert lp_norm(constant(rs.dimension, 0.0, radius=1.0), p, WeightedDomain.ball(rs, 1.0)) == 0.0

    def test_sup(self, rs):
        assert lp_norm(gaussian(rs.dimension), np.inf, full(rs)) == pytest.approx(1.0, rel=1e-8)

    @settings(max_examples=15, deadline=None)
    @given(st.floats(-5, 5).filter(lambda v: abs(v) > 1e-3), st.sampled_from([1.0, 2.0, 3.0]))
    def test_homogeneous(self, lam, p):
        rs = SYSTEMS["a1"]
        f = gaussian(1, 0.8)
        assert lp_norm(f.scaled(lam), p, full(rs)) == pytest.approx(abs(lam) * lp_norm(f, p, full(rs)), rel=1e-9)


class TestWeak:
    def test_box_level_mass(self, a1):
        m = level_set_measure(smoothed_box(1.0, 2.0, 0.01), [0.5], full(a1))
        assert m[0] == pytest.approx(14 / 3, rel=1e-3)

    def test_below_strong(self, rs):
        dom = full(rs)
        grid = np.geomspace(1e-4, 1.0, 60)
        for f in (gaussian(rs.dimension), gaussian_mixture(rs.dimension, 2)):
            assert weak_lq_norm(f, 2.0, grid, dom) <= lp_norm(f, 2.0, dom) * (1 + 1e-8)

    def test_zero(self, a1):
        assert weak_lq_norm(constant(1, 0.0, radius=1.0), 2.0, np.geomspace(1e-3, 1, 10),
                            WeightedDomain.ball(a1, 1.0)) == 0.0


class TestSphere:
    def test_a1(self, a1):
        assert sphere_weight_integral(a1) == pytest.approx(4.0, rel=1e-14)

    def test_circle(self):
        rs = build_root_system("A1_PRODUCT", 2, 0.0)
        assert sphere_weight_integral(rs) == pytest.approx(2 * math.pi, rel=1e-12)

    def test_closed_form(self, rs):
        assert sphere_weight_integral(rs) == pytest.approx(sphere_constant(rs), rel=1e-6)

    @pytest.mark.parametrize("radius", [0.5, 1.0, 2.0])
    def test_ball_measure(self, rs, radius):
        d = rs.effective_dimension
        expected = sphere_constant(rs) * radius ** d / d
        assert measure(WeightedDomain.ball(rs, radius)) == pytest.approx(expected, rel=1e-6)


class TestPerimeter:
    def test_box_a1(self, a1):
        assert perimeter(a1, WeightedDomain.box(a1, (1.0,), (2.0,))) == pytest.approx(10.0)

    def test_chamber_ball_a1(self, a1):
        dom = WeightedDomain.chamber_ball(a1, a1.chambers[0], 1.0)
        assert perimeter(a1, dom) == pytest.approx(2.0)

    def test_ratio(self, rs):
        for c in rs.chambers:
            dom = WeightedDomain.chamber_ball(rs, c, 1.0)
            assert perimeter(rs, dom) / measure(dom) == pytest.approx(rs.effective_dimension, rel=1e-6)

    def test_unsupported(self, a1):
        with pytest.raises(UnsupportedShapeError):
            perimeter(a1, full(a1))
