import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from dunklsob.rootsys import (build_root_system, chamber_sign, generate_group, load_root_system,
                      parse_shorthand, reflect, weight)
from dunklsob.errors import (ClosureOverflowError, NegativeMultiplicityError,
                             NonClosedSystemError, OnWallError, ValidationError, ZeroRootError)
from dunklsob.rootsys import Family

from conftest import SYSTEMS

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


class TestBuild:
    @pytest.mark.parametrize("family, n, k, n_pos, gamma", [
        ("A1_PRODUCT", 1, 1.0, 1, 1.0),
        ("A1_PRODUCT", 3, (1.0, 0.5, 2.0), 3, 3.5),
        ("A2", None, 1.0, 3, 3.0),
        ("B2", None, (1.0, 0.5), 4, 3.0),
    ])
    def test_counts(self, family, n, k, n_pos, gamma):
        rs = build_root_system(family, n, k)
        assert rs.n_positive == n_pos
        assert rs.gamma == gamma
        assert rs.effective_dimension == rs.dimension + 2 * gamma

    def test_a1_root(self):
        rs = build_root_system("A1_PRODUCT", 1, 1.0)
        np.testing.assert_allclose(rs.positive_roots, [[np.sqrt(2.0)]])
        assert rs.effective_dimension == 3

    def test_roots_normalized(self, rs):
        np.testing.assert_allclose(np.sum(rs.positive_roots ** 2, axis=1), 2.0, atol=1e-12)

    def test_closed_under_reflection(self, rs):
        full = np.vstack([rs.positive_roots, -rs.positive_roots])
        for a in rs.positive_roots:
            img = reflect(a, full)
            dist = np.linalg.norm(img[:, None] - full[None], axis=2).min(axis=1)
            assert dist.max() < 1e-9

    def test_no_parallel_roots(self, rs):
        g = rs.positive_roots @ rs.positive_roots.T
        off = g[~np.eye(len(g), dtype=bool)]
        assert np.all(np.abs(np.abs(off) - 2.0) > 1e-9)

    def test_multiplicity_g_invariant(self, rs):
        grp = generate_group(rs)
        k = rs.k
        for i, a in enumerate(rs.positive_roots):
            for g in grp.elements:
                b = g @ a
                j = np.argmin(np.minimum(np.linalg.norm(rs.positive_roots - b, axis=1),
                                         np.linalg.norm(rs.positive_roots + b, axis=1)))
                assert k[i] == k[j]

    def test_custom_rescales(self):
        rs = build_root_system("CUSTOM", multiplicities=1.0, roots=[[3.0, 0.0], [0.0, 0.5]])
        np.testing.assert_allclose(np.sum(rs.positive_roots ** 2, axis=1), 2.0)
        assert rs.family is Family.CUSTOM

    def test_custom_a2_matches_builtin(self):
        s3 = np.sqrt(3.0)
        rs = build_root_system("CUSTOM", multiplicities=1.0,
                               roots=[[1, 0], [-0.5, s3 / 2], [0.5, s3 / 2]])
        assert rs.n_positive == 3
        assert generate_group(rs).order == 6

    def test_non_closed(self):
        with pytest.raises(NonClosedSystemError):
            build_root_system("CUSTOM", multiplicities=1.0, roots=[[1.0, 0.0], [1.0, 1.0]])

    def test_negative_multiplicity(self):
        with pytest.raises(NegativeMultiplicityError):
            build_root_system("A2", multiplicities=-0.5)

    @pytest.mark.parametrize("m", [0, 1, 2])
    def test_dihedral_order_too_small(self, m):
        with pytest.raises(ValidationError):
            build_root_system("DIHEDRAL_M", multiplicities=1.0, m=m)

    def test_zero_dimension(self):
        with pytest.raises(ValidationError):
            build_root_system("A1_PRODUCT", 0, 1.0)

    def test_closure_cap(self):
        rs = build_root_system("DIHEDRAL_M", multiplicities=1.0, m=8)
        with pytest.raises(ClosureOverflowError):
            generate_group(rs, cap=10)


class TestReflect:
    def test_negates_root(self):
        a = np.array([1.0, 1.0])
        np.testing.assert_allclose(reflect(a, a), -a)

    def test_fixes_hyperplane(self):
        a = np.array([1.0, 1.0])
        x = np.array([2.0, -2.0])
        np.testing.assert_allclose(reflect(a, x), x)

    @pytest.mark.parametrize("x", [-3.0, 0.25, 7.0])
    def test_rank_one_is_negation(self, x):
        np.testing.assert_allclose(reflect(np.array([np.sqrt(2.0)]), np.array([x])), [-x])

    def test_zero_root(self):
        with pytest.raises(ZeroRootError):
            reflect(np.zeros(2), np.ones(2))

    @settings(max_examples=200, deadline=None)
    @given(arrays(float, 3, elements=finite), arrays(float, 3, elements=finite))
    def test_involution(self, a, x):
        if np.linalg.norm(a) < 1e-3:
            return
        y = reflect(a, reflect(a, x))
        np.testing.assert_allclose(y, x, atol=1e-12 * (1 + np.abs(x).max()) * 10)

    def test_involution_bulk(self, rng):
        a = rng.normal(size=(1000, 4))
        x = rng.normal(size=(1000, 4))
        y = np.array([reflect(ai, reflect(ai, xi)) for ai, xi in zip(a, x)])
        assert np.abs(y - x).max() < 1e-12


class TestGroup:
    @pytest.mark.parametrize("key, order", [("a1", 2), ("a1x2", 4), ("a2", 6), ("b2", 8), ("i2_5", 10)])
    def test_order(self, key, order):
        assert generate_group(SYSTEMS[key]).order == order

    def test_group_axioms(self, rs):
        els = generate_group(rs).elements
        n = rs.dimension
        assert any(np.allclose(g, np.eye(n), atol=1e-9) for g in els)
        for g in els:
            np.testing.assert_allclose(g @ g.T, np.eye(n), atol=1e-9)
        flat = els.reshape(len(els), -1)
        for g in els:
            for h in els:
                assert np.abs(flat - (g @ h).ravel()).max(axis=1).min() < 1e-9

    def test_deterministic_order(self, rs):
        a = generate_group(rs).elements
        b = generate_group(rs).elements
        np.testing.assert_array_equal(a, b)

    def test_chamber_census(self, rs, rng):
        pts = rng.normal(size=(10_000, rs.dimension))
        signs = {tuple(np.sign(p @ rs.positive_roots.T).astype(int)) for p in pts}
        assert len(signs) == generate_group(rs).order == len(rs.chambers)


class TestChamberSign:
    def test_rank_one(self, a1):
        assert chamber_sign(a1, [1.0]).signs == (1,)

    def test_product(self):
        rs = build_root_system("A1_PRODUCT", 2, 1.0)
        assert chamber_sign(rs, [1.0, -1.0]).signs == (1, -1)

    def test_on_wall(self, a1):
        with pytest.raises(OnWallError):
            chamber_sign(a1, [0.0])


class TestWeight:
    def test_a1_value(self, a1):
        assert weight(a1, np.array([1.0])) == pytest.approx(2.0, rel=1e-14)

    def test_origin(self, rs):
        assert weight(rs, np.zeros(rs.dimension)) == 0.0

    def test_zero_multiplicity(self, rng):
        rs = build_root_system("B2", multiplicities=0.0)
        np.testing.assert_array_equal(weight(rs, rng.normal(size=(5, 2))), 1.0)

    @pytest.mark.parametrize("t", [0.5, 2.0, 10.0])
    def test_homogeneity(self, rs, rng, t):
        x = rng.normal(size=(50, rs.dimension))
        np.testing.assert_allclose(weight(rs, t * x) / weight(rs, x), t ** (2 * rs.gamma), rtol=1e-10)

    def test_group_invariance(self, rs, rng):
        x = rng.normal(size=(50, rs.dimension))
        w = weight(rs, x)
        for g in generate_group(rs).elements:
            assert np.all(np.abs(weight(rs, x @ g.T) - w) <= 1e-10 * w)


class TestLoading:
    def test_json_roundtrip(self, tmp_path):
        doc = {"family": "B2", "dimension": 2, "multiplicities": {"short": 1.0, "long": 0.5}}
        p = tmp_path / "rs.json"
        p.write_text(json.dumps(doc))
        rs = load_root_system(str(p))
        assert rs.gamma == 3.0

    def test_custom_requires_roots(self):
        with pytest.raises(ValidationError):
            load_root_system({"family": "CUSTOM", "dimension": 2, "multiplicities": {}})

    @pytest.mark.parametrize("text, gamma", [("a1:k=1", 1.0), ("a2:k=1", 3.0), ("b2:k=1,0.5", 3.0),
                                             ("a1x2:k=1,1", 2.0), ("i2m:m=5,k=1", 5.0)])
    def test_shorthand(self, text, gamma):
        assert parse_shorthand(text).gamma == gamma
