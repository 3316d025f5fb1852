"""Acceptance criteria, one test per criterion, tolerances as specified.

Three literal decimals in the criteria disagree with the closed forms they
are meant to match; those comparisons are strict xfails, and the closed forms
themselves are asserted alongside.  The product formula for the
Macdonald-Mehta integral only holds for product systems; the A2 and B2 cases
against it are strict xfails, with the quadrature checked against the correct
closed form instead.
"""

import math
import time

import numpy as np
import pytest

from dunklsob.cli import main
from dunklsob.constants import (dunkl_constant_bounds, gamma_bound_constant, macdonald_mehta,
                                macdonald_mehta_product, nash_bound_closed, nash_bound_numeric,
                                nash_constant, sphere_constant)
from dunklsob.fields import (carre_du_champ, carre_du_champ_via_definition, coordinate_times_gaussian,
                             dunkl_gradient, gaussian, gaussian_mixture, smoothed_box)
from dunklsob.kernel import (HeatOperator, heat_apply, heat_field, heat_kernel, heat_kernel_bound,
                             rank1_kernel, rank1_kernel_eval, transform_l2_norm)
from dunklsob.quadrature import (WeightedDomain, integrate_weighted, lp_norm, measure,
                                 sphere_weight_integral)
from dunklsob.rearrange import decreasing_rearrangement, set_rearrangement
from dunklsob.rootsys import build_root_system
from dunklsob.verify import (Status, SuiteConfig, _family, report_from_json, run_check)

A1 = build_root_system("A1_PRODUCT", 1, 1.0)

# the systems named in criteria 1 and 2
MM_CASES = {
    "A1 k=0": (build_root_system("A1_PRODUCT", 1, 0.0), False),
    "A1 k=1/2": (build_root_system("A1_PRODUCT", 1, 0.5), False),
    "A1 k=1": (A1, False),
    "A1 k=2": (build_root_system("A1_PRODUCT", 1, 2.0), False),
    "A1xA1 k=(1,1)": (build_root_system("A1_PRODUCT", 2, (1.0, 1.0)), False),
    "A2 k=1": (build_root_system("A2", multiplicities=1.0), True),
    "B2 k=(1,1/2)": (build_root_system("B2", multiplicities=(1.0, 0.5)), True),
}

BUILT_IN = {
    "A1": A1,
    "A1xA1": build_root_system("A1_PRODUCT", 2, (1.0, 0.5)),
    "A2": build_root_system("A2", multiplicities=1.0),
    "B2": build_root_system("B2", multiplicities=(1.0, 0.5)),
    "I2(5)": build_root_system("DIHEDRAL_M", multiplicities=1.0, m=5),
    "I2(6)": build_root_system("DIHEDRAL_M", multiplicities=(1.0, 0.5), m=6),
}

PRODUCT_FORMULA_XFAIL = pytest.mark.xfail(
    strict=True, reason="the product of Gamma ratios is the Macdonald-Mehta integral only for product systems")


def _mm_params():
    out = []
    for key, (rs, non_product) in MM_CASES.items():
        marks = [PRODUCT_FORMULA_XFAIL] if non_product else []
        out.append(pytest.param(rs, id=key, marks=marks))
    return out


def _numeric_mm(rs):
    start = time.perf_counter()
    value = integrate_weighted(gaussian(rs.dimension), WeightedDomain.full_space(rs), 1e-10).value
    return value, time.perf_counter() - start


class TestCriterion1MacdonaldMehta:
    @pytest.mark.parametrize("rs", _mm_params())
    def test_product_closed_form(self, rs):
        value, elapsed = _numeric_mm(rs)
        assert elapsed < 60
        assert value == pytest.approx(macdonald_mehta_product(rs), rel=1e-4)

    @pytest.mark.parametrize("key, expected", [("A1xA1 k=(1,1)", 8 * math.pi), ("A1 k=1", 2 * math.sqrt(2 * math.pi))])
    def test_literal_values(self, key, expected):
        assert macdonald_mehta_product(MM_CASES[key][0]) == pytest.approx(expected, rel=1e-14)

    @pytest.mark.parametrize("key", list(MM_CASES))
    def test_quadrature_matches_integral(self, key):
        rs = MM_CASES[key][0]
        value, elapsed = _numeric_mm(rs)
        assert elapsed < 60
        assert value == pytest.approx(macdonald_mehta(rs), rel=1e-4)


class TestCriterion2SphereMeasure:
    @pytest.mark.parametrize("key", list(MM_CASES))
    def test_sphere(self, key):
        rs = MM_CASES[key][0]
        assert sphere_weight_integral(rs) == pytest.approx(sphere_constant(rs), rel=1e-6)

    @pytest.mark.parametrize("radius", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("key", list(MM_CASES))
    def test_ball_measure(self, key, radius):
        rs = MM_CASES[key][0]
        d = rs.effective_dimension
        assert measure(WeightedDomain.ball(rs, radius)) == pytest.approx(
            sphere_constant(rs) * radius ** d / d, rel=1e-6)


class TestCriterion3Isoperimetry:
    @pytest.mark.parametrize("key", list(BUILT_IN))
    def test_ratio_every_chamber(self, key):
        rs = BUILT_IN[key]
        r = run_check("ISO_RATIO", rs)
        assert r.status is Status.PASS
        assert len(r.rows) == len(rs.chambers)
        for row in r.rows:
            assert row.lhs == pytest.approx(rs.effective_dimension, rel=1e-6)

    @pytest.mark.parametrize("key", list(BUILT_IN))
    def test_inequality_on_boxes(self, key):
        r = run_check("ISOPERIMETRIC", BUILT_IN[key])
        assert r.status is Status.PASS
        boxes = [row for row in r.rows if row.field.startswith("box")]
        assert len(boxes) >= 20
        assert all(row.rhs - row.lhs >= 0 for row in boxes)


class TestCriterion4CarreDuChamp:
    @pytest.mark.parametrize("key", ["A1", "A1xA1", "A2", "B2"])
    def test_pointwise(self, key):
        rs = BUILT_IN[key]
        rng = np.random.default_rng(4)
        fields = [f for f in _family(SuiteConfig(rs)) if f.has_analytic_derivatives]
        assert fields
        for f in fields:
            x = rng.uniform(-3, 3, size=(100, rs.dimension))
            np.testing.assert_allclose(carre_du_champ_via_definition(rs, f, x), carre_du_champ(rs, f, x),
                                       rtol=1e-8, atol=0)

    @pytest.mark.parametrize("key", ["A1", "A2"])
    def test_dirichlet_form(self, key):
        r = run_check("DIRICHLET_EQ", BUILT_IN[key])
        assert r.status is Status.PASS
        assert all(abs(row.ratio - 1) <= 1e-4 for row in r.rows)

    def test_witness(self):
        f = coordinate_times_gaussian(1)
        dom = WeightedDomain.full_space(A1)
        gam = integrate_weighted(lambda x: carre_du_champ(A1, f, x), dom, 1e-10, decay=f.decay).value
        grad = integrate_weighted(lambda x: np.sum(dunkl_gradient(A1, f, x) ** 2, axis=1), dom, 1e-10,
                                  decay=f.decay).value
        assert gam == pytest.approx(6.646702, abs=1e-6)
        assert grad == pytest.approx(6.646702, abs=1e-6)
        assert gam == pytest.approx(15 / 4 * math.sqrt(math.pi), rel=1e-9)


class TestCriterion5GammaLower:
    @pytest.mark.parametrize("key", ["A1", "A1xA1", "A2", "B2"])
    def test_no_violation(self, key):
        r = run_check("GAMMA_LOWER", BUILT_IN[key])
        assert r.status is Status.PASS
        assert r.notes["points_per_field"] == 1000

    def test_constant(self):
        assert gamma_bound_constant(A1) == 1 / 3


class TestCriterion6Sharpness:
    def test_extremal_quotient(self):
        r = run_check("SHARPNESS_RADIAL", A1)
        assert r.status is Status.PASS
        q = r.notes["extremal_quotient"]
        assert q == pytest.approx(0.625764, abs=1e-4)
        assert q == pytest.approx(dunkl_constant_bounds(A1)[0], abs=1e-4)

    def test_upper_closed_form(self):
        # sqrt(1/3) (2^{3/2} (2 / M_k) Gamma(3) / Gamma(3/2))^{1/3}
        mk = 2 * math.sqrt(2 * math.pi)
        closed = math.sqrt(1 / 3) * (2 ** 1.5 * (2 / mk) * math.gamma(3) / math.gamma(1.5)) ** (1 / 3)
        assert dunkl_constant_bounds(A1)[1] == pytest.approx(closed, abs=1e-12)

    @pytest.mark.xfail(strict=True, reason="the closed form evaluates to 0.7884111, not 0.788433")
    def test_upper_literal(self):
        assert abs(dunkl_constant_bounds(A1)[1] - 0.788433) <= 1e-6

    def test_lower_closed_form(self):
        lo = math.sqrt(2 / 3) * (math.gamma(3) / (2 * math.sqrt(2 * math.pi) * math.gamma(1.5))) ** (1 / 3)
        assert dunkl_constant_bounds(A1)[0] == pytest.approx(lo, abs=1e-12)
        assert lo == pytest.approx(0.625764, abs=1e-5)

    def test_no_field_exceeds_upper(self):
        for name in ("SOBOLEV_P2", "CONSTANT_UPPER"):
            assert run_check(name, A1).status is Status.PASS


class TestCriterion7Nash:
    def test_symbolic_vs_numeric(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            A, B = np.exp(rng.uniform(-3, 3, size=2))
            assert nash_bound_numeric(A, B, 3.0) == pytest.approx(nash_bound_closed(A, B, 3.0), rel=1e-10)

    def test_closed_form(self):
        d, pb, mk = 3.0, 4.0, 2 * math.sqrt(2 * math.pi)
        closed = ((d + 2) / d) ** ((d + 2) / (2 * d)) * (d / 2) ** (1 / d) * (pb / (d * mk ** 2)) ** (1 / d)
        assert nash_constant(A1) == pytest.approx(closed, abs=1e-12)

    @pytest.mark.xfail(strict=True, reason="the closed form evaluates to 0.6583710, not 0.658426")
    def test_literal(self):
        assert abs(nash_constant(A1) - 0.658426) <= 1e-6

    def test_witness_and_family(self):
        r = run_check("NASH", A1)
        assert r.status is Status.PASS
        assert r.notes["gaussian_quotient"] == pytest.approx(0.337339, abs=1e-4)


class TestCriterion8Kernel:
    def test_exponential_limit(self):
        assert abs(rank1_kernel_eval(0.0, 1.0, 2.0) - math.e ** 2) <= 1e-12

    def test_exponential_limit_grid(self):
        z = np.linspace(-6, 6, 25)
        np.testing.assert_allclose(rank1_kernel_eval(0.0, z, 1.0), np.exp(z), rtol=1e-10)

    @pytest.mark.parametrize("k", [0.5, 1.0, 2.0])
    def test_eigen_relation(self, k):
        ker = rank1_kernel(k)
        rng = np.random.default_rng(8)
        x, y = rng.uniform(-3.2, 3.2, size=(2, 500))
        keep = (np.abs(x * y) <= 10) & (np.abs(x) > 1e-3)
        x, y = x[keep], y[keep]
        z = x * y
        lhs = y * ker.series_derivative(z) + k * (ker.series(z) - ker.series(-z)) / x
        rhs = y * ker.series(z)
        assert np.max(np.abs(lhs - rhs) / np.maximum(np.abs(rhs), 1e-300)) <= 1e-8

    @pytest.mark.parametrize("x", [0.0, 1.0])
    @pytest.mark.parametrize("t", [0.1, 1.0])
    def test_mass(self, x, t):
        ones = np.full((1, 1), x)
        res = integrate_weighted(lambda y: heat_kernel(A1, t, ones, y), WeightedDomain.full_space(A1), 1e-10,
                                 radius=abs(x) + 12 * math.sqrt(t), r_breaks=(abs(x),))
        assert res.value == pytest.approx(1.0, abs=1e-6)

    def test_semigroup_law(self):
        f = gaussian_mixture(1, 42)
        x = np.linspace(-2.5, 2.5, 11)[:, None]
        once = heat_apply(A1, f, 0.5, x)
        twice = HeatOperator(A1, 0.25).apply(heat_field(A1, f, 0.25), x)
        np.testing.assert_allclose(twice, once, rtol=1e-4)

    def test_upper_bound(self):
        rng = np.random.default_rng(88)
        rs = build_root_system("A1_PRODUCT", 2, (1.0, 0.5))
        for sys_ in (A1, rs):
            t = np.exp(rng.uniform(math.log(1e-2), math.log(1e2), 1000))
            x = rng.uniform(-4, 4, size=(1000, sys_.dimension))
            y = rng.uniform(-4, 4, size=(1000, sys_.dimension))
            for ti, xi, yi in zip(t, x, y):
                assert heat_kernel(sys_, ti, xi, yi) <= heat_kernel_bound(sys_, ti, xi, yi) * (1 + 1e-10)

    @pytest.mark.parametrize("f", [gaussian(1), coordinate_times_gaussian(1), gaussian(1, 0.8, center=[0.6])],
                             ids=lambda f: f.name)
    def test_plancherel(self, f):
        assert transform_l2_norm(A1, f, 12.0) == pytest.approx(lp_norm(f, 2, WeightedDomain.full_space(A1)),
                                                              rel=1e-4)


@pytest.fixture(scope="session")
def a1_reports(tmp_path_factory):
    """Two full verification runs on A1 k=1 with seed 42, on one and on eight threads."""
    out = tmp_path_factory.mktemp("acceptance")
    paths = []
    for threads in (1, 8):
        path = out / f"report_t{threads}.json"
        code = main(["verify", "--rs", "a1:k=1", "--suite", "all", "--seed", "42",
                     "--threads", str(threads), "--out", str(path)])
        paths.append((code, path))
    return paths


@pytest.mark.slow
class TestCriterion9PropertyBased:
    @pytest.mark.parametrize("name", ["PSEUDO_POINCARE", "ULTRACONTRACTIVE", "BESOV_EMBED", "GAGLIARDO_NIRENBERG"])
    def test_finite_and_stable(self, a1_reports, name):
        report = report_from_json(a1_reports[0][1].read_text())
        r = next(res for res in report.results if res.check_name == name)
        assert r.status is Status.PASS
        base, refined = r.notes.get("base_max"), r.notes.get("refined_max")
        if base is None:
            # ultracontractivity records one pair per exponent
            pairs = [(r.notes[f"base_max_over_bound_{p}"], r.notes[f"refined_max_over_bound_{p}"])
                     for p in ("p1", "p2", "pinf")]
        else:
            pairs = [(base, refined)]
        for b, f in pairs:
            assert math.isfinite(b) and math.isfinite(f)
            assert abs(f - b) <= 0.1 * abs(b)


class TestCriterion10Rearrangement:
    @pytest.mark.parametrize("p", [1.0, 2.0, 6.0])
    def test_norms(self, p):
        dom = WeightedDomain.in_chamber(A1, A1.chambers[0])
        for f in (gaussian(1), gaussian_mixture(1, 42), gaussian(1, 0.6, center=[1.0])):
            r = decreasing_rearrangement(A1, f, "+")
            assert r.lp_norm(p) == pytest.approx(lp_norm(f, p, dom), rel=1e-4)

    def test_polya_szego(self):
        assert run_check("POLYA_SZEGO", A1).status is Status.PASS

    def test_indicator(self):
        r = decreasing_rearrangement(A1, smoothed_box(1.0, 2.0, 0.01), "+")
        half = float(np.interp(0.5, r.profile.values[::-1], r.profile.radii[::-1]))
        assert half == pytest.approx(7 ** (1 / 3), abs=1e-3)
        assert set_rearrangement(A1, "+", 14 / 3) == pytest.approx(1.912931, abs=1e-6)


@pytest.mark.slow
class TestCriterion11Determinism:
    def test_byte_identical(self, a1_reports):
        (c1, p1), (c8, p8) = a1_reports
        assert c1 == 0 and c8 == 0
        assert p1.read_bytes() == p8.read_bytes()

    def test_all_pass_including_kernel(self, a1_reports):
        report = report_from_json(a1_reports[0][1].read_text())
        assert len(report.results) == 22
        assert all(r.status is Status.PASS for r in report.results)
