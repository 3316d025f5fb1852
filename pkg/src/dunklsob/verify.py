"""Numeric harness for the Dunkl-Sobolev inequalities.

Every registered check turns one inequality or identity into an assertion
over a seeded family of test fields.  A check returns a :class:`CheckResult`
holding the worst case (the largest ``lhs / rhs``) together with per-field
rows; :func:`run_suite` collects them into a deterministic :class:`Report`.

Inequalities ``lhs <= rhs`` fail only when violated by more than
``tolerance * |rhs| + 2 * error`` where ``error`` is the quadrature error
estimate.  Checks whose constants are not known explicitly are bounded-ratio
checks: the largest ratio over the family must be finite and move by less
than the tolerance (10 % by default) when the t-grid is refined and the
family doubled.
"""

from __future__ import annotations

import csv
import json
import math
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from enum import Enum
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from . import constants as C
from .errors import DunklError, UnknownCheckError, ValidationError
from .fields import (
    Decay,
    ScalarField,
    abs_field,
    bump,
    carre_du_champ,
    carre_du_champ_via_definition,
    dunkl_gradient,
    dunkl_gradient_norm,
    dunkl_laplacian,
    field_from_spec,
    gaussian_mixture,
    talenti_profile_field,
)
from .quadrature import (
    WeightedDomain,
    integrate_weighted,
    level_set_measure,
    measure,
    perimeter,
)
from .rootsys import RootSystem

DEFAULT_SEED = 42


class Status(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    SKIPPED_UNSUPPORTED = "SKIPPED_UNSUPPORTED"


def _plain(obj):
    """Convert numpy scalars and containers to plain Python values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


@dataclass
class Row:
    """One line of a check's table."""

    field: str
    lhs: float
    rhs: float
    ratio: float
    status: str
    error: float = 0.0

    def __post_init__(self):
        self.lhs, self.rhs, self.ratio, self.error = (
            float(v) for v in (self.lhs, self.rhs, self.ratio, self.error))

    def to_dict(self) -> dict:
        return {"field": self.field, "lhs": self.lhs, "rhs": self.rhs,
                "ratio": self.ratio, "status": self.status, "error": self.error}


@dataclass
class CheckResult:
    check_name: str
    paper_anchor: str
    status: Status
    lhs: float
    rhs: float
    ratio: float
    tolerance: float
    witness: str | None = None
    rows: list[Row] = dc_field(default_factory=list)
    notes: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self.lhs, self.rhs, self.ratio, self.tolerance = (
            float(v) for v in (self.lhs, self.rhs, self.ratio, self.tolerance))
        self.notes = _plain(self.notes)

    @property
    def passed(self) -> bool:
        return self.status is Status.PASS

    def to_dict(self) -> dict:
        return {
            "check_name": self.check_name,
            "paper_anchor": self.paper_anchor,
            "status": self.status.value,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "tolerance": self.tolerance,
            "witness": self.witness,
            "notes": self.notes,
            "rows": [r.to_dict() for r in self.rows],
        }


@dataclass
class Report:
    root_system: dict
    constants: dict
    results: list[CheckResult]
    seed: int
    wall_time: float = 0.0

    @property
    def failed(self) -> list[CheckResult]:
        return [r for r in self.results if r.status is Status.FAIL]

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "root_system": self.root_system,
            "constants": self.constants,
            "seed": self.seed,
            "results": [r.to_dict() for r in self.results],
        }
        if include_timing:
            out["wall_time"] = self.wall_time
        return out


DEFAULT_TOLERANCES: dict[str, float] = {
    "CDC_IDENTITY": 1e-8,
    "DIRICHLET_EQ": 1e-4,
    "GRAD_DOMINATION": 1e-8,
    "MOD_INEQ": 1e-6,
    "GAMMA_LOWER": 1e-10,
    "NASH": 1e-6,
    "SOBOLEV_P2": 1e-6,
    "PSEUDO_POINCARE": 0.1,
    "GRAD_SEMIGROUP": 1e-6,
    "REVERSE_POINCARE": 1e-6,
    "ULTRACONTRACTIVE": 0.1,
    "WEAK_BESOV": 0.1,
    "BESOV_EMBED": 0.1,
    "SOBOLEV_GENERAL_P": 1e-6,
    "GAGLIARDO_NIRENBERG": 0.1,
    "ISOPERIMETRIC": 1e-9,
    "ISO_RATIO": 1e-6,
    "POLYA_SZEGO": 1e-4,
    "CHAMBER_SOBOLEV": 1e-5,
    "SHARPNESS_RADIAL": 1e-4,
    "CONSTANT_UPPER": 1e-6,
    "CONJECTURE_PROBE": 1e-6,
}


@dataclass(frozen=True)
class SuiteConfig:
    """Everything that determines a verification run.

    ``family`` lists field specifications understood by
    :func:`~dunklsob.fields.field_from_spec`; ``None`` selects the default
    eight-field family.  ``t_points`` is the density of the logarithmic
    t-grid on ``t_range``; ``None`` picks 61 points on ``[1e-3, 1e3]`` in
    rank one and 21 points on ``[1e-2, 1e3]`` in rank two.
    """

    root_system: RootSystem
    seed: int = DEFAULT_SEED
    checks: tuple[str, ...] | None = None
    family: tuple[str, ...] | None = None
    tolerances: Mapping[str, float] = dc_field(default_factory=dict)
    tol_scale: float = 1.0
    t_points: int | None = None
    t_range: tuple[float, float] | None = None
    level_count: int = 200
    probe_count: int = 200
    box_count: int = 20
    threads: int = 1

    def __post_init__(self):
        if self.tol_scale <= 0:
            raise ValidationError("tol_scale must be positive")
        if any(v <= 0 for v in self.tolerances.values()):
            raise ValidationError("tolerances must be positive")
        if self.family is not None and len(self.family) == 0:
            raise ValidationError("the field family is empty")
        if self.t_points is not None and self.t_points < 2:
            raise ValidationError("t-grid needs at least two points")
        if self.level_count < 2:
            raise ValidationError("level grid needs at least two points")
        if self.threads < 1:
            raise ValidationError("threads must be >= 1")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise UnknownCheckError(f"unknown checks in tolerances: {sorted(unknown)}")

    def tolerance(self, name: str) -> float:
        return self.tolerances.get(name, DEFAULT_TOLERANCES[name]) * self.tol_scale

    def t_grid(self, refine: int = 1) -> np.ndarray:
        n = self.root_system.dimension
        pts = self.t_points or (61 if n == 1 else 21)
        lo, hi = self.t_range or ((1e-3, 1e3) if n == 1 else (1e-2, 1e3))
        return np.logspace(math.log10(lo), math.log10(hi), refine * (pts - 1) + 1)

    def rng(self, name: str) -> np.random.Generator:
        return np.random.default_rng([self.seed, zlib.crc32(name.encode())])


# -- test family ---------------------------------------------------------------------

def default_family_specs(rs: RootSystem, seed: int, doubled: bool = False) -> list[str]:
    """Eight named fields, or sixteen with variants when ``doubled``."""
    specs = ["gaussian", "odd-gaussian", "talenti", "bump:0,1.5", "bump:1.2,0.8",
             f"mixture:{seed}", f"mixture:{seed + 1}", f"mixture:{seed + 2}"]
    if doubled:
        specs += ["gaussian:0.6", "gaussian:1.7", "talenti:2,1", "bump:0,0.9",
                  "bump:0.6,1.1", f"mixture:{seed + 3}", f"mixture:{seed + 4}", f"mixture:{seed + 5}"]
    return specs


def build_family(rs: RootSystem, specs: Sequence[str]) -> list[ScalarField]:
    """Fields for ``specs``; Talenti profiles are dropped when ``d <= 2`` (they do not decay)."""
    out = []
    d = rs.effective_dimension
    for s in specs:
        if s.split(":")[0] == "talenti" and d <= 2:
            continue
        out.append(field_from_spec(s, rs))
    names = [f.name for f in out]
    if len(set(names)) != len(names):
        raise ValidationError("field family contains duplicate fields")
    if not out:
        raise ValidationError("the field family is empty")
    return out


def _family(cfg: SuiteConfig, doubled: bool = False) -> list[ScalarField]:
    rs = cfg.root_system
    if cfg.family is not None:
        specs = list(cfg.family)
        if doubled:
            specs += [s for s in default_family_specs(rs, cfg.seed, True)[8:]]
        return build_family(rs, specs)
    return build_family(rs, default_family_specs(rs, cfg.seed, doubled))


# -- numeric helpers -----------------------------------------------------------------

_TOL = 1e-9


def _grad_decay(f: ScalarField, p: float = 1.0) -> Decay | None:
    dec = f.decay
    if dec is None:
        return None
    if dec.kind == "power":
        return Decay("power", power=(dec.power + 1.0) * p)
    # a polynomial factor in front of a Gaussian: widen slightly
    if dec.kind == "gaussian":
        return Decay("gaussian", radius=dec.radius + 1.0, scale=dec.scale / math.sqrt(p))
    return dec


def _integral(fn, dom: WeightedDomain, decay: Decay | None, tol: float = _TOL, **kw) -> tuple[float, float]:
    if decay is not None and decay.kind == "power" and not dom.bounded:
        if decay.power <= dom.root_system.effective_dimension:
            return math.inf, 0.0
    res = integrate_weighted(fn, dom, tol, decay=decay, abs_tolerance=1e-300, **kw)
    return float(res.value), float(res.error_estimate)


def _norm(f: ScalarField, p: float, dom: WeightedDomain) -> tuple[float, float]:
    """``(||f||_p, error)`` with the error propagated through the ``1/p`` power."""
    dec = f.decay.power_of(p) if f.decay is not None else None
    v, e = _integral(lambda x: np.abs(f(x)) ** p, dom, dec)
    if not math.isfinite(v):
        return math.inf, 0.0
    v = max(v, 0.0)
    n = v ** (1 / p)
    return n, (n * e / (p * v) if v > 0 else e ** (1 / p))


def _grad_norm(rs: RootSystem, f: ScalarField, p: float, dom: WeightedDomain,
               dunkl: bool = True, **kw) -> tuple[float, float]:
    if dunkl:
        def g(x):
            return dunkl_gradient_norm(rs, f, x) ** p
    else:
        def g(x):
            return np.linalg.norm(f.grad(x), axis=-1) ** p
    v, e = _integral(g, dom, _grad_decay(f, p), **kw)
    if not math.isfinite(v):
        return math.inf, 0.0
    v = max(v, 0.0)
    n = v ** (1 / p)
    return n, (n * e / (p * v) if v > 0 else e ** (1 / p))


def _ratio(lhs: float, rhs: float) -> float:
    if rhs == 0:
        return 0.0 if lhs == 0 else math.inf
    return lhs / rhs


def _ineq_row(name: str, lhs: float, rhs: float, tol: float, err: float = 0.0) -> Row:
    ok = lhs <= rhs + tol * abs(rhs) + 2 * err
    return Row(name, lhs, rhs, _ratio(lhs, rhs), "PASS" if ok else "FAIL", err)


def _eq_row(name: str, lhs: float, rhs: float, tol: float, err: float = 0.0) -> Row:
    ok = abs(lhs - rhs) <= tol * abs(rhs) + 2 * err
    return Row(name, lhs, rhs, _ratio(lhs, rhs), "PASS" if ok else "FAIL", err)


def _finish(name: str, tol: float, rows: list[Row], notes: dict | None = None,
            worst: Callable[[Row], float] | None = None) -> CheckResult:
    """Summarize rows: FAIL if any row fails; the reported row is the first failure or the worst ratio."""
    if not rows:
        return CheckResult(name, ANCHORS[name], Status.PASS, 0.0, 0.0, 0.0, tol,
                           None, [], dict(notes or {}, vacuous=True))
    key = worst or (lambda r: r.ratio if math.isfinite(r.ratio) else -math.inf)
    failed = [r for r in rows if r.status != "PASS"]
    pick = failed[0] if failed else max(rows, key=key)
    status = Status.FAIL if failed else Status.PASS
    return CheckResult(name, ANCHORS[name], status, pick.lhs, pick.rhs, pick.ratio, tol,
                       pick.field, rows, dict(notes or {}))


def _stability(name: str, tol: float, base: float, refined: float, witness: str,
               rows: list[Row], notes: dict) -> CheckResult:
    """Bounded-ratio verdict: both maxima finite and within ``tol`` of each other."""
    ok = math.isfinite(base) and math.isfinite(refined) and base > 0 and \
        abs(refined / base - 1.0) < tol
    notes = dict(notes, base_max=base, refined_max=refined)
    return CheckResult(name, ANCHORS[name], Status.PASS if ok else Status.FAIL, base, refined,
                       _ratio(base, refined), tol, witness, rows, notes)


def _sample_box(rng: np.random.Generator, n: int, m: int, half: float = 3.0) -> np.ndarray:
    return rng.uniform(-half, half, (m, n))


def _full(rs: RootSystem) -> WeightedDomain:
    return WeightedDomain.full_space(rs)


def _chamber(rs: RootSystem) -> WeightedDomain:
    return WeightedDomain.in_chamber(rs, rs.chambers[0])


def _chamber_family(cfg: SuiteConfig) -> list[ScalarField]:
    """Family members with bounded level sets (power-decaying profiles excluded)."""
    return [f for f in _family(cfg) if f.decay is None or f.decay.kind != "power"]


def _sobolev_q(d: float, p: float = 2.0) -> float:
    return p * d / (d - p)


# -- calculus checks -----------------------------------------------------------------

def check_cdc_identity(cfg: SuiteConfig) -> CheckResult:
    """Closed form of the carre du champ against ``(Delta_k(f^2) - 2 f Delta_k f) / 2``.

    The deviation is measured relative to the size of the terms entering the
    definition, so that points far out in the tails, where both sides are
    tiny and the definition cancels, do not dominate.
    """
    name = "CDC_IDENTITY"
    rs, tol = cfg.root_system, cfg.tolerance(name)
    rng = cfg.rng(name)
    rows = []
    for f in _family(cfg):
        if not f.has_analytic_derivatives:
            continue
        x = _sample_box(rng, rs.dimension, 100)
        a = carre_du_champ(rs, f, x)
        b = carre_du_champ_via_definition(rs, f, x)
        scale = np.maximum.reduce([np.abs(a), np.abs(f(x) * dunkl_laplacian(rs, f, x)),
                                   np.abs(dunkl_laplacian(rs, f.squared(), x))])
        dev = np.abs(a - b) / np.where(scale > 0, scale, 1.0)
        i = int(np.argmax(dev))
        ok = bool(np.all(dev <= tol))
        rows.append(Row(f.name, float(a[i]), float(b[i]), _ratio(float(a[i]), float(b[i])),
                        "PASS" if ok else "FAIL", float(dev[i])))
    return _finish(name, tol, rows, {"points_per_field": 100},
                   worst=lambda r: r.error)


def check_dirichlet_eq(cfg: SuiteConfig) -> CheckResult:
    name = "DIRICHLET_EQ"
    rs, tol = cfg.root_system, cfg.tolerance(name)
    dom = _full(rs)
    rows = []
    for f in _family(cfg):
        dec = _grad_decay(f, 2.0)
        a, ea = _integral(lambda x: carre_du_champ(rs, f, x), dom, dec)
        b, eb = _integral(lambda x: dunkl_gradient_norm(rs, f, x) ** 2, dom, dec)
        rows.append(_eq_row(f.name, a, b, tol, ea + eb))
    return _finish(name, tol, rows, worst=lambda r: abs(r.ratio - 1))


def check_grad_domination(cfg: SuiteConfig) -> CheckResult:
    name = "GRAD_DOMINATION"
    rs, tol = cfg.root_system, cfg.tolerance(name)
    dom = _full(rs)
    rows = []
    for f in _family(cfg):
        a, ea = _grad_norm(rs, f, 2.0, dom, dunkl=False)
        b, eb = _grad_norm(rs, f, 2.0, dom, dunkl=True)
        rows.append(_ineq_row(f.name, a * a, b * b, tol, 2 * (a * ea + b * eb)))
    rng = cfg.rng(name)
    # the open question for p != 2 is recorded, not asserted
    obs = {}
    for p in (1.5, 3.0):
        worst = 0.0
        for f in _family(cfg):
            a, _ = _grad_norm(rs, f, p, dom, dunkl=False)
            b, _ = _grad_norm(rs, f, p, dom, dunkl=True)
            if math.isfinite(a) and math.isfinite(b) and b > 0:
                worst = max(worst, a / b)
        obs[f"max_classical_over_dunkl_p{p:g}"] = worst
    del rng
    return _finish(name, tol, rows, obs)


def check_mod_ineq(cfg: SuiteConfig) -> CheckResult:
    name = "MOD_INEQ"
    rs, tol = cfg.root_system, cfg.tolerance(name)
    dom = _full(rs)
    rows = []
    for f in _family(cfg):
        # |T|f||^2 jumps across a curved zero set, so the integral stalls near 1e-6
        # relative; its error estimate is carried into the comparison instead
        a, ea = _grad_norm(rs, abs_field(f), 2.0, dom, strict=False, max_cells=4000)
        b, eb = _grad_norm(rs, f, 2.0, dom)
        rows.append(_ineq_row(f.name, a * a, b * b, tol, 2 * (a * ea + b * eb)))
    return _finish(name, tol, rows)


def check_gamma_lower(cfg: SuiteConfig) -> CheckResult:
    name = "GAMMA_LOWER"
    rs, tol = cfg.root_system, cfg.tolerance(name)
    c = C.gamma_bound_constant(rs)
    rng = cfg.rng(name)
    rows = []
    for f in _family(cfg):
        x = _sample_box(rng, rs.dimension, 1000)
        g = carre_du_champ(rs, f, x)
        t = c * dunkl_gradient_norm(rs, f, x) ** 2
        slack = g - t * (1 - tol) + 1e-14 * np.max(np.abs(g))
        i = int(np.argmin(g - t))
        rows.append(Row(f.name, float(t[i]), float(g[i]), _ratio(float(t[i]), float(g[i])),
                        "PASS" if np.all(slack >= 0) else "FAIL"))
    return _finish(name, tol, rows, {"constant": c, "sharp_constant": C.sharp_gamma_bound_constant(rs),
                                     "points_per_field": 1000})


# -- Nash and Sobolev ------------------------------------------------------------------

def check_nash(cfg: SuiteConfig) -> CheckResult:
    name = "NASH"
    rs, tol = cfg.root_system, cfg.tolerance(name)
    d = rs.effective_dimension
    cn = C.nash_constant(rs)
    dom = _full(rs)
    rows = []
    notes = {"constant": cn}
    for f in _family(cfg):
        n1, e1 = _norm(f, 1.0, dom)
        if not math.isfinite(n1):
            continue
        n2, e2 = _norm(f, 2.0, dom)
        g, eg = _grad_norm(rs, f, 2.0, dom)
        lhs = n2 ** (1 + 2 / d)
        rhs = cn * g * n1 ** (2 / d)
        err = lhs * (1 + 2 / d) * e2 / n2 + rhs * (eg / g + (2 / d) * e1 / n1)
        rows.append(_ineq_row(f.name, lhs, rhs, tol, err))
        if f.name == "gaussian":
            notes["gaussian_quotient"] = lhs / (g * n1 ** (2 / d))
    notes["min_slack"] = min((r.rhs - r.lhs for r in rows), default=None)
    return _finish(name, tol, rows, notes)


def _sobolev_rows(cfg: SuiteConfig, fields, const: float, dunkl: bool, tol: float,
                  tag: str = "") -> list[Row]:
    rs = cfg.root_system
    q = _sobolev_q(rs.effective_dimension)
    dom = _full(rs)
    rows = []
    for f in fields:
        nq, eq = _norm(f, q, dom)
        g, eg = _grad_norm(rs, f, 2.0, dom, dunkl=dunkl)
        rows.append(_ineq_row(f.name + tag, nq, const * g, tol, eq + const * eg))
    return rows


def _extremal(rs: RootSystem) -> ScalarField:
    return talenti_profile_field(rs.dimension, 1.0, 1.0, 2.0, rs.effective_dimension)


def check_sobolev_p2(cfg: SuiteConfig) -> CheckResult:
    name = "SOBOLEV_P2"
    rs, tol = cfg.root_system, cfg.tolerance(name)
    d = rs.effective_dimension
    if d <= 2:
        return _finish(name, tol, [], {"reason": "needs N + 2 gamma > 2"})
    lo, hi = C.dunkl_constant_bounds(rs)
    rows = _sobolev_rows(cfg, _family(cfg), hi, True, tol)
    ext = _sobolev_rows(cfg, [_extremal(rs)], hi, True, tol, tag="[extremal]")[0]
    rows.append(ext)
    notes = {"upper_constant": hi, "lower_constant": lo, "extremal_quotient": ext.ratio * hi,
             "nash_route_constant": C.sobolev_from_nash(rs)}
    return _finish(name, tol, rows, notes)


def check_constant_upper(cfg: SuiteConfig) -> CheckResult:
    name = "CONSTANT_UPPER"
    rs, tol = cfg.root_system, cfg.tolerance(name)
    if rs.effective_dimension <= 2:
        return _finish(name, tol, [], {"reason": "needs N + 2 gamma > 2"})
    hi = C.dunkl_constant_bounds(rs)[1]
    fam = _family(cfg)
    rows = _sobolev_rows(cfg, fam, hi, True, tol, "[dunkl]") + \
        _sobolev_rows(cfg, fam, hi, False, tol, "[classical]")
    return _finish(name, tol, rows, {"upper_constant": hi})


def check_sharpness_radial(cfg: SuiteConfig) -> CheckResult:
    name = "SHARPNESS_RADIAL"
    rs, tol = cfg.root_system, cfg.tolerance(name)
    d = rs.effective_dimension
    if d <= 2:
        return _finish(name, tol, [], {"reason": "needs N + 2 gamma > 2"})
    lo = C.dunkl_constant_bounds(rs)[0]
    n = rs.dimension
    ext = _sobolev_rows(cfg, [_extremal(rs)], 1.0, True, 0.0)[0]
    rows = [_eq_row(ext.field, ext.ratio, lo, tol, ext.error / max(ext.rhs, 1e-300))]
    radial = [field_from_spec("gaussian", rs), bump(n, np.zeros(n), 1.5),
              talenti_profile_field(n, 2.0, 1.0, 2.0, d), talenti_profile_field(n, 1.0, 3.0, 2.0, d),
              field_from_spec("gaussian:0.5", rs)]
    for r in _sobolev_rows(cfg, radial, 1.0, True, 0.0):
        rows.append(_ineq_row(r.field, r.ratio, lo, tol, r.error / max(r.rhs, 1e-300)))
    return _finish(name, tol, rows, {"lower_constant": lo, "extremal_quotient": ext.ratio})


def _probe_fields(rs: RootSystem, rng: np.random.Generator, count: int) -> list[ScalarField]:
    n = rs.dimension
    out = []
    for i in range(count):
        if i % 2 == 0:
            seed = int(rng.integers(0, 2 ** 31 - 1))
            out.append(gaussian_mixture(n, seed, int(rng.integers(1, 5)), float(rng.uniform(0.5, 2.5))))
        else:
            c = rng.normal(size=n)
            c *= rng.uniform(0.2, 2.0) / np.linalg.norm(c)
            out.append(bump(n, c, float(rng.uniform(0.5, 2.0))))
    return out


def check_conjecture_probe(cfg: SuiteConfig) -> CheckResult:
    """Largest Sobolev quotient over seeded non-radial fields; only the upper bound is asserted."""
    name = "CONJECTURE_PROBE"
    rs, tol = cfg.root_system, cfg.tolerance(name)
    if rs.effective_dimension <= 2:
        return _finish(name, tol, [], {"reason": "needs N + 2 gamma > 2"})
    lo, hi = C.dunkl_constant_bounds(rs)
    fields = _probe_fields(rs, cfg.rng(name), cfg.probe_count)
    rows = _sobolev_rows(cfg, fields, hi, True, tol)
    qmax = max(r.ratio for r in rows) * hi
    notes = {"probe_count": len(fields), "max_quotient": qmax, "lower_constant": lo,
             "upper_constant": hi, "max_below_radial_bound": bool(qmax <= lo * (1 + 1e-6))}
    return _finish(name, tol, rows, notes)


def check_sobolev_general_p(cfg: SuiteConfig) -> CheckResult:
    """``||f||_q <= C ||grad f||_p`` with explicit constants for ``p`` in ``{1, 2}``.

    The constant for ``p = 1`` is the isoperimetric one and the constant for
    ``p = 2`` is the upper bound of the sharp Dunkl-Sobolev constant; both
    are asserted with the classical gradient.  The quotient with the Dunkl
    gradient is recorded as a bounded ratio, and ``p`` in ``(2, d)`` is
    recorded without assertion.
    """
    name = "SOBOLEV_GENERAL_P"
    rs, tol = cfg.root_system, cfg.tolerance(name)
    d = rs.effective_dimension
    dom = _full(rs)
    rows = []
    notes = {}
    consts = {}
    if d > 1:
        consts[1.0] = _isoperimetric_constant(rs)
    if d > 2:
        consts[2.0] = C.dunkl_constant_bounds(rs)[1]
    fam = _family(cfg)
    for p, cst in consts.items():
        q = _sobolev_q(d, p)
        worst = 0.0
        for f in fam:
            nq, eq = _norm(f, q, dom)
            g, eg = _grad_norm(rs, f, p, dom, dunkl=False)
            gk, _ = _grad_norm(rs, f, p, dom, dunkl=True)
            if not (math.isfinite(g) and math.isfinite(nq)):
                continue
            rows.append(_ineq_row(f"{f.name}[p={p:g}]", nq, cst * g, tol, eq + cst * eg))
            if gk > 0 and math.isfinite(gk):
                worst = max(worst, nq / gk)
        notes[f"constant_p{p:g}"] = cst
        notes[f"max_dunkl_quotient_p{p:g}"] = worst
    for p in (2.5, 3.0, 4.0):
        if 2 < p < d:
            q = _sobolev_q(d, p)
            best = 0.0
            for f in fam:
                nq, _ = _norm(f, q, dom)
                gk, _ = _grad_norm(rs, f, p, dom)
                if math.isfinite(nq) and math.isfinite(gk) and gk > 0:
                    best = max(best, nq / gk)
            notes[f"informational_max_quotient_p{p:g}"] = best
    return _finish(name, tol, rows, notes)


# -- isoperimetry ----------------------------------------------------------------------

def _isoperimetric_constant(rs: RootSystem) -> float:
    d = rs.effective_dimension
    ball = C.chamber_sphere_constant(rs) / d
    return ball ** (1 - 1 / d) / C.chamber_sphere_constant(rs)


def check_iso_ratio(cfg: SuiteConfig) -> CheckResult:
    name = "ISO_RATIO"
    rs, tol = cfg.root_system, cfg.tolerance(name)
    d = rs.effective_dimension
    rows = []
    for ch in rs.chambers:
        dom = WeightedDomain.chamber_ball(rs, ch, 1.0)
        rows.append(_eq_row(f"chamber {ch}", perimeter(rs, dom) / measure(dom), d, tol))
    return _finish(name, tol, rows, worst=lambda r: abs(r.ratio - 1))


def _random_boxes(rs: RootSystem, rng: np.random.Generator, count: int):
    n = rs.dimension
    for ch in rs.chambers:
        u = rs.chamber_direction(ch)
        for i in range(count):
            center = u * rng.uniform(0.1, 2.0) + rng.normal(scale=0.4, size=n)
            half = rng.uniform(0.1, 1.0, n)
            yield f"box[{ch}#{i}]", center - half, center + half


def check_isoperimetric(cfg: SuiteConfig) -> CheckResult:
    name = "ISOPERIMETRIC"
    rs, tol = cfg.root_system, cfg.tolerance(name)
    d = rs.effective_dimension
    cst = _isoperimetric_constant(rs)
    rows = []
    for label, lo, hi in _random_boxes(rs, cfg.rng(name), cfg.box_count):
        dom = WeightedDomain.box(rs, lo, hi)
        rows.append(_ineq_row(label, measure(dom) ** (1 - 1 / d), cst * perimeter(rs, dom), tol))
    for ch in rs.chambers:
        for r in (0.5, 1.0, 2.0):
            dom = WeightedDomain.chamber_ball(rs, ch, r)
            rows.append(_eq_row(f"chamber ball {ch} r={r:g}", measure(dom) ** (1 - 1 / d),
                                cst * perimeter(rs, dom), 1e-6))
    margin = min(r.rhs - r.lhs for r in rows if r.field.startswith("box"))
    return _finish(name, tol, rows, {"constant": cst, "min_box_margin": margin})


def check_polya_szego(cfg: SuiteConfig) -> CheckResult:
    from .rearrange import decreasing_rearrangement

    name = "POLYA_SZEGO"
    rs, tol = cfg.root_system, cfg.tolerance(name)
    ch = rs.chambers[0]
    dom = _chamber(rs)
    rows = []
    for f in _chamber_family(cfg):
        r = decreasing_rearrangement(rs, f, ch, count=cfg.level_count)
        for p in (1.0, 2.0, 6.0):
            n, e = _norm(f, p, dom)
            rows.append(_eq_row(f"{f.name}[norm p={p:g}]", r.lp_norm(p), n, tol, e))
        for p in (1.5, 2.0, 3.0):
            g, e = _grad_norm(rs, f, p, dom, dunkl=False)
            rows.append(_ineq_row(f"{f.name}[grad p={p:g}]", r.gradient_lp_norm(p), g, tol, e))
    return _finish(name, tol, rows, {"chamber": str(ch)})


def check_chamber_sobolev(cfg: SuiteConfig) -> CheckResult:
    name = "CHAMBER_SOBOLEV"
    rs, tol = cfg.root_system, cfg.tolerance(name)
    d = rs.effective_dimension
    dom = _chamber(rs)
    rows = []
    notes = {}
    consts = {}
    if d > 1:
        consts[1.0] = _isoperimetric_constant(rs)
    for p in (1.5, 2.0):
        if p < d:
            consts[p] = C.weyl_constant(rs, p)
    fam = _chamber_family(cfg)
    for p, cst in consts.items():
        q = _sobolev_q(d, p)
        for f in fam:
            nq, eq = _norm(f, q, dom)
            g, eg = _grad_norm(rs, f, p, dom, dunkl=False)
            rows.append(_ineq_row(f"{f.name}[p={p:g}]", nq, cst * g, tol, eq + cst * eg))
        notes[f"constant_p{p:g}"] = cst
        if p > 1:
            ext = talenti_profile_field(rs.dimension, 1.0, 1.0, p, d)
            nq, eq = _norm(ext, q, dom)
            g, eg = _grad_norm(rs, ext, p, dom, dunkl=False)
            rows.append(_eq_row(f"{ext.name}[extremal]", nq / g, cst, 1e-4, (eq + nq * eg / g) / g))
    return _finish(name, tol, rows, notes)


# -- semigroup checks (product systems) -----------------------------------------------

_HEAT_CACHE: dict = {}


def _cached(key, fn):
    # values are deterministic, so a race only duplicates work
    if key not in _HEAT_CACHE:
        _HEAT_CACHE[key] = fn()
    return _HEAT_CACHE[key]


def _rs_key(rs: RootSystem) -> tuple:
    return (rs.family.value, rs.dimension, tuple(float(k) for k in rs.k))


def _finite_extent(f: ScalarField, tol: float = 1e-13) -> float:
    if f.support_radius is not None:
        return float(f.support_radius)
    if f.decay is not None and f.decay.kind != "power":
        return float(f.decay.truncation_radius(tol))
    return 12.0


def _norm_axis(k: float, inner: float, outer: float, h: float = 0.25, order: int = 6,
               growth: float = 0.25):
    """Composite Gauss nodes on ``[-outer, outer]`` with weights ``|sqrt(2) y|^{2k}``.

    Panels have width ``h`` up to ``inner`` and then grow geometrically.
    """
    from .quadrature import _rule

    edges = [0.0]
    while edges[-1] < outer:
        e = edges[-1]
        w = h if e < inner else max(h, growth * e)
        edges.append(min(outer, e + w))
    ys, ws = [], []
    for p0, p1 in zip(edges[:-1], edges[1:]):
        s, wt = _rule(order, 2 * k if p0 == 0.0 else 0.0, 0.0)
        y = p0 + (p1 - p0) * s
        ys.append(y)
        ws.append(wt * (p1 - p0) * (math.sqrt(2.0) * y) ** (2 * k))
    y = np.concatenate(ys)
    w = np.concatenate(ws)
    return np.concatenate([-y[::-1], y]), np.concatenate([w[::-1], w])


def _semigroup_diff_norms(rs: RootSystem, f: ScalarField, t: float) -> dict[float, float]:
    """``||f - P_t f||_p`` for ``p`` in ``{1, 2}`` on a tensor Gauss grid."""
    from .kernel import HeatOperator

    def compute():
        R = _finite_extent(f)
        outer = R + 10.0 * math.sqrt(2.0 * t) + 1.0
        rules = [_norm_axis(k, R + 1.0, outer) for k in rs.k]
        axes = [r[0] for r in rules]
        grids = np.meshgrid(*axes, indexing="ij")
        fx = np.asarray(f(np.column_stack([g.ravel() for g in grids]))).reshape(grids[0].shape)
        diff = np.abs(fx - HeatOperator(rs, t).apply_grid(f, axes))
        W = rules[0][1]
        for r in rules[1:]:
            W = np.multiply.outer(W, r[1])
        return {p: float(np.sum(W * diff ** p)) ** (1 / p) for p in (1.0, 2.0)}

    return _cached(("diff", _rs_key(rs), f.name, float(t)), compute)


def _heat_sup(rs: RootSystem, f: ScalarField, t: float) -> float:
    from .kernel import heat_sup_norm, sup_axes

    def compute():
        ext = min(_finite_extent(f, 1e-8), 10.0)
        return heat_sup_norm(rs, f, t, sup_axes(rs, ext))

    return _cached(("sup", _rs_key(rs), f.name, float(t)), compute)


def _besov(rs: RootSystem, f: ScalarField, s: float, t_grid: np.ndarray) -> float:
    return max(t ** (-s / 2) * _heat_sup(rs, f, float(t)) for t in t_grid)


def _skipped(name: str, cfg: SuiteConfig) -> CheckResult | None:
    if cfg.root_system.is_product:
        return None
    return CheckResult(name, ANCHORS[name], Status.SKIPPED_UNSUPPORTED, 0.0, 0.0, 0.0,
                       cfg.tolerance(name), None, [],
                       {"reason": "the heat kernel is available for A1_PRODUCT systems only"})


def _integrable(f: ScalarField) -> bool:
    return f.decay is None or f.decay.kind != "power"


def check_pseudo_poincare(cfg: SuiteConfig) -> CheckResult:
    name = "PSEUDO_POINCARE"
    if (skip := _skipped(name, cfg)) is not None:
        return skip
    rs, tol = cfg.root_system, cfg.tolerance(name)
    dom = _full(rs)

    def sweep(fields, grid):
        best, who, rows = 0.0, "", []
        for f in fields:
            if not _integrable(f):
                continue
            grads = {p: _grad_norm(rs, f, p, dom)[0] for p in (1.0, 2.0)}
            for p in (1.0, 2.0):
                vals = [_semigroup_diff_norms(rs, f, t)[p] / (math.sqrt(t) * grads[p]) for t in grid]
                i = int(np.argmax(vals))
                rows.append(Row(f"{f.name}[p={p:g},t={grid[i]:.4g}]", vals[i], grads[p], vals[i], "PASS"))
                if vals[i] > best:
                    best, who = vals[i], rows[-1].field
        return best, who, rows

    base, who, rows = sweep(_family(cfg), cfg.t_grid())
    refined, _, _ = sweep(_family(cfg, True), cfg.t_grid(2))
    return _stability(name, tol, base, refined, who, rows, {})


def check_ultracontractive(cfg: SuiteConfig) -> CheckResult:
    """``t^{d/2p} ||P_t f||_inf / ||f||_p`` over the t-grid.

    For ``p = 1``, ``2`` and ``inf`` the heat-kernel bound gives the explicit
    constants ``2^{-d/2} / M_k``, ``(4^{-d/2} / M_k)^{1/2}`` and ``1``, which are
    asserted; the maximum over the family must also be refinement stable.
    """
    name = "ULTRACONTRACTIVE"
    if (skip := _skipped(name, cfg)) is not None:
        return skip
    rs, tol = cfg.root_system, cfg.tolerance(name)
    d = rs.effective_dimension
    M = C.macdonald_mehta(rs)
    bounds = {1.0: 2 ** (-d / 2) / M, 2.0: math.sqrt(4 ** (-d / 2) / M), math.inf: 1.0}
    dom = _full(rs)

    def sweep(fields, grid):
        maxima = {p: 0.0 for p in bounds}
        rows = []
        for f in fields:
            for p, b in bounds.items():
                if math.isinf(p):
                    n = _heat_sup(rs, f, 0.0) if False else _sup_field(rs, f)
                else:
                    n = _norm(f, p, dom)[0]
                if not math.isfinite(n) or n == 0:
                    continue
                e = 0.0 if math.isinf(p) else d / (2 * p)
                vals = [t ** e * _heat_sup(rs, f, float(t)) / n for t in grid]
                i = int(np.argmax(vals))
                rows.append(_ineq_row(f"{f.name}[p={p:g},t={grid[i]:.4g}]", vals[i], b, 1e-6))
                maxima[p] = max(maxima[p], vals[i] / b)
        return maxima, rows

    base, rows = sweep(_family(cfg), cfg.t_grid())
    refined, _ = sweep(_family(cfg, True), cfg.t_grid(2))
    failed = [r for r in rows if r.status != "PASS"]
    stable = all(base[p] > 0 and abs(refined[p] / base[p] - 1) < tol for p in bounds)
    worst = max(bounds, key=lambda p: base[p])
    notes = {f"bound_p{p:g}": b for p, b in bounds.items()}
    notes.update({f"base_max_over_bound_p{p:g}": base[p] for p in bounds})
    notes.update({f"refined_max_over_bound_p{p:g}": refined[p] for p in bounds})
    status = Status.PASS if stable and not failed else Status.FAIL
    pick = failed[0] if failed else max(rows, key=lambda r: r.ratio)
    del worst
    return CheckResult(name, ANCHORS[name], status, pick.lhs, pick.rhs, pick.ratio, tol,
                       pick.field, rows, notes)


def _sup_field(rs: RootSystem, f: ScalarField) -> float:
    from .quadrature import sup_norm

    return _cached(("fsup", _rs_key(rs), f.name), lambda: sup_norm(f, _full(rs)))


BESOV_PAIRS = ((1.0, 2.0), (2.0, 6.0))


def _besov_sweep(cfg: SuiteConfig, fields, grid, weak: bool):
    rs = cfg.root_system
    dom = _full(rs)
    best, who, rows = 0.0, "", []
    for p, q in BESOV_PAIRS:
        s = p / (p - q)
        for f in fields:
            if weak and not _integrable(f):
                continue
            g = _grad_norm(rs, f, p, dom)[0]
            if not math.isfinite(g) or g == 0:
                continue
            if weak:
                top = _sup_field(rs, f)
                levels = top * np.logspace(-8, 0, cfg.level_count, endpoint=False)
                nq = _cached(("weak", _rs_key(rs), f.name, q, cfg.level_count),
                             lambda: float(np.max(levels * np.maximum(
                                 level_set_measure(f, levels, dom), 0.0) ** (1 / q))))
            else:
                nq = _norm(f, q, dom)[0]
            if not math.isfinite(nq):
                continue
            b = _besov(rs, f, s, grid)
            val = nq / (g ** (p / q) * b ** (1 - p / q))
            rows.append(Row(f"{f.name}[p={p:g},q={q:g}]", nq, g ** (p / q) * b ** (1 - p / q), val, "PASS"))
            if val > best:
                best, who = val, rows[-1].field
    return best, who, rows


def check_besov_embed(cfg: SuiteConfig) -> CheckResult:
    name = "BESOV_EMBED"
    if (skip := _skipped(name, cfg)) is not None:
        return skip
    tol = cfg.tolerance(name)
    base, who, rows = _besov_sweep(cfg, _family(cfg), cfg.t_grid(), False)
    refined, _, _ = _besov_sweep(cfg, _family(cfg, True), cfg.t_grid(2), False)
    return _stability(name, tol, base, refined, who, rows, {"pairs": [list(p) for p in BESOV_PAIRS]})


def check_weak_besov(cfg: SuiteConfig) -> CheckResult:
    name = "WEAK_BESOV"
    if (skip := _skipped(name, cfg)) is not None:
        return skip
    tol = cfg.tolerance(name)
    base, who, rows = _besov_sweep(cfg, _family(cfg), cfg.t_grid(), True)
    refined, _, _ = _besov_sweep(cfg, _family(cfg, True), cfg.t_grid(2), True)
    return _stability(name, tol, base, refined, who, rows, {"pairs": [list(p) for p in BESOV_PAIRS]})


GN_PAIRS = ((1.0, 2.0), (2.0, 4.0))


def check_gagliardo_nirenberg(cfg: SuiteConfig) -> CheckResult:
    """Bounded ratio ``||f||_q / (||grad_k f||_p^{p/q} ||f||_r^{1-p/q})`` with ``r = q d (1/p - 1/q)``."""
    name = "GAGLIARDO_NIRENBERG"
    rs, tol = cfg.root_system, cfg.tolerance(name)
    d = rs.effective_dimension
    dom = _full(rs)

    def sweep(fields):
        best, who, rows = 0.0, "", []
        for p, q in GN_PAIRS:
            r = q * d * (1 / p - 1 / q)
            for f in fields:
                nq = _norm(f, q, dom)[0]
                nr = _norm(f, r, dom)[0] if r >= 1 else math.inf
                g = _grad_norm(rs, f, p, dom)[0]
                if not all(math.isfinite(v) for v in (nq, nr, g)):
                    continue
                den = g ** (p / q) * nr ** (1 - p / q)
                rows.append(Row(f"{f.name}[p={p:g},q={q:g},r={r:g}]", nq, den, nq / den, "PASS"))
                if nq / den > best:
                    best, who = nq / den, rows[-1].field
        return best, who, rows

    base, who, rows = sweep(_family(cfg))
    refined, _, _ = sweep(_family(cfg, True))
    return _stability(name, tol, base, refined, who, rows, {"pairs": [list(p) for p in GN_PAIRS]})


SEMIGROUP_TIMES = (0.01, 0.1, 1.0, 10.0)


def _semigroup_points(cfg: SuiteConfig, name: str) -> np.ndarray:
    return _sample_box(cfg.rng(name), cfg.root_system.dimension, 16, 2.5)


def check_grad_semigroup(cfg: SuiteConfig) -> CheckResult:
    """``|grad_k P_t f| <= sqrt(N) P_t |grad_k f|`` at sampled points."""
    from .kernel import heat_apply, heat_field

    name = "GRAD_SEMIGROUP"
    if (skip := _skipped(name, cfg)) is not None:
        return skip
    rs, tol = cfg.root_system, cfg.tolerance(name)
    x = _semigroup_points(cfg, name)
    sq = math.sqrt(rs.dimension)
    rows = []
    for f in _family(cfg):
        g = ScalarField(lambda y, f=f: dunkl_gradient_norm(rs, f, y), rs.dimension,
                        decay=_grad_decay(f), name=f"|grad_k {f.name}|")
        worst = None
        for t in SEMIGROUP_TIMES:
            lhs = dunkl_gradient_norm(rs, heat_field(rs, f, t), x)
            rhs = sq * heat_apply(rs, g, t, x)
            slack = rhs * (1 + tol) + 1e-9 * np.max(np.abs(rhs)) - lhs
            i = int(np.argmin(slack))
            row = Row(f"{f.name}[t={t:g}]", float(lhs[i]), float(rhs[i]),
                      _ratio(float(lhs[i]), float(rhs[i])), "PASS" if slack[i] >= 0 else "FAIL")
            if worst is None or row.status == "FAIL" or row.ratio > worst.ratio:
                worst = row if worst is None or worst.status == "PASS" else worst
        rows.append(worst)
    return _finish(name, tol, rows, {"times": list(SEMIGROUP_TIMES), "points_per_field": len(x)})


def check_reverse_poincare(cfg: SuiteConfig) -> CheckResult:
    """``P_t(f^2) - (P_t f)^2 >= (2C/N) t |grad_k P_t f|^2`` with ``C`` the carre-du-champ constant.

    The factor ``2C/N`` is what the gradient bound ``|grad_k P_s g| <= sqrt(N) P_s|grad_k g|``
    yields; the ratio against the weaker factor ``2C/sqrt(N)`` is recorded as a note.
    """
    from .kernel import heat_apply, heat_field

    name = "REVERSE_POINCARE"
    if (skip := _skipped(name, cfg)) is not None:
        return skip
    rs, tol = cfg.root_system, cfg.tolerance(name)
    n = rs.dimension
    c = C.gamma_bound_constant(rs)
    x = _semigroup_points(cfg, name)
    rows = []
    alt_worst = 0.0
    for f in _family(cfg):
        worst = None
        for t in SEMIGROUP_TIMES:
            pf = heat_apply(rs, f, t, x)
            var = heat_apply(rs, f.squared(), t, x) - pf ** 2
            grad2 = t * dunkl_gradient_norm(rs, heat_field(rs, f, t), x) ** 2
            rhs = (2 * c / n) * grad2
            scale = np.max(heat_apply(rs, f.squared(), t, x))
            slack = var - rhs * (1 - tol) + 1e-10 * scale
            i = int(np.argmin(slack))
            alt = (2 * c / math.sqrt(n)) * grad2
            with np.errstate(divide="ignore", invalid="ignore"):
                alt_worst = max(alt_worst, float(np.nanmax(np.where(var > 1e-10 * scale, alt / var, 0.0))))
            row = Row(f"{f.name}[t={t:g}]", float(rhs[i]), float(var[i]),
                      _ratio(float(rhs[i]), float(var[i])), "PASS" if slack[i] >= 0 else "FAIL")
            if worst is None or (worst.status == "PASS" and (row.status == "FAIL" or row.ratio > worst.ratio)):
                worst = row
        rows.append(worst)
    return _finish(name, tol, rows, {"constant": 2 * c / n, "gamma_constant": c,
                                     "max_ratio_with_sqrt_n_factor": alt_worst})


# -- registry and runner -----------------------------------------------------------------

ANCHORS: dict[str, str] = {
    "CDC_IDENTITY": "Lemma 3.1: expression for the carré-du-champ operator",
    "DIRICHLET_EQ": "§3: we can compute the Dirichlet form to obtain",
    "GRAD_DOMINATION": "Lemma 3.2: give the following useful relation",
    "MOD_INEQ": "Lemma 3.3: For all $f\\in C_0^1$",
    "GAMMA_LOWER": "Prop. 3.4: pointwise estimate of the carré-du-champ",
    "NASH": "Prop. 4.1: Nash inequality",
    "SOBOLEV_P2": "Thm 4.2: Suppose $N+2\\gamma>2$",
    "PSEUDO_POINCARE": "Prop. 5.2: For any $1\\leq p \\leq 2$",
    "GRAD_SEMIGROUP": "Lemma 5.4: since the Dunkl operators commute",
    "REVERSE_POINCARE": "Lemma 5.5: Using first Proposition",
    "ULTRACONTRACTIVE": "Prop. 5.8: The general case then follows by interpolation",
    "WEAK_BESOV": "§5 Step 1: the weak $L^q$ norm is defined by",
    "BESOV_EMBED": "Thm 5.1: prove the following improved Sobolev inequality",
    "SOBOLEV_GENERAL_P": "Cor. 5.9: Let $1\\leq p < \\max",
    "GAGLIARDO_NIRENBERG": "Cor. 5.10: Gagliardo-Nirenberg inequality",
    "ISOPERIMETRIC": "Thm 6.2: bounded Lipschitz domain",
    "ISO_RATIO": "§6.1: solves the Neumann problem",
    "POLYA_SZEGO": "Prop. 6.5: The main result of Talenti",
    "CHAMBER_SOBOLEV": "Prop. 6.6: the sharp isoperimetric inequality is equivalent",
    "SHARPNESS_RADIAL": "Thm 6.1: With the same notation as above",
    "CONSTANT_UPPER": "Prop. 6.8: the sharp constant $C_{CS}$ satisfies",
    "CONJECTURE_PROBE": "§6: We end the section with a conjecture",
}

REGISTRY: dict[str, Callable[[SuiteConfig], CheckResult]] = {
    "CDC_IDENTITY": check_cdc_identity,
    "DIRICHLET_EQ": check_dirichlet_eq,
    "GRAD_DOMINATION": check_grad_domination,
    "MOD_INEQ": check_mod_ineq,
    "GAMMA_LOWER": check_gamma_lower,
    "NASH": check_nash,
    "SOBOLEV_P2": check_sobolev_p2,
    "PSEUDO_POINCARE": check_pseudo_poincare,
    "GRAD_SEMIGROUP": check_grad_semigroup,
    "REVERSE_POINCARE": check_reverse_poincare,
    "ULTRACONTRACTIVE": check_ultracontractive,
    "WEAK_BESOV": check_weak_besov,
    "BESOV_EMBED": check_besov_embed,
    "SOBOLEV_GENERAL_P": check_sobolev_general_p,
    "GAGLIARDO_NIRENBERG": check_gagliardo_nirenberg,
    "ISOPERIMETRIC": check_isoperimetric,
    "ISO_RATIO": check_iso_ratio,
    "POLYA_SZEGO": check_polya_szego,
    "CHAMBER_SOBOLEV": check_chamber_sobolev,
    "SHARPNESS_RADIAL": check_sharpness_radial,
    "CONSTANT_UPPER": check_constant_upper,
    "CONJECTURE_PROBE": check_conjecture_probe,
}

KERNEL_CHECKS = frozenset({"PSEUDO_POINCARE", "GRAD_SEMIGROUP", "REVERSE_POINCARE",
                           "ULTRACONTRACTIVE", "WEAK_BESOV", "BESOV_EMBED"})


def resolve_checks(names: str | Sequence[str] | None) -> list[str]:
    """Registry names for ``"all"``, a comma list, or a sequence; registry order is kept."""
    if names is None or names == "all":
        return list(REGISTRY)
    if isinstance(names, str):
        names = [n.strip() for n in names.split(",") if n.strip()]
    wanted = [n.upper() for n in names]
    unknown = [n for n in wanted if n not in REGISTRY]
    if unknown:
        raise UnknownCheckError(f"unknown checks: {', '.join(unknown)}")
    if not wanted:
        raise ValidationError("no checks selected")
    return [n for n in REGISTRY if n in wanted]


def run_check(check_name: str, rs: RootSystem | None = None, config: SuiteConfig | None = None) -> CheckResult:
    """Run one registered check; numerical errors inside it become a FAIL with the message."""
    key = check_name.upper()
    if key not in REGISTRY:
        raise UnknownCheckError(f"unknown check {check_name!r}")
    if config is None:
        if rs is None:
            raise ValidationError("need a root system or a config")
        config = SuiteConfig(rs)
    elif rs is not None and rs is not config.root_system:
        config = SuiteConfig(**{**config.__dict__, "root_system": rs})
    try:
        return REGISTRY[key](config)
    except (DunklError, ArithmeticError, ValueError) as exc:
        return CheckResult(key, ANCHORS[key], Status.FAIL, math.nan, math.nan, math.nan,
                           config.tolerance(key), None, [], {"error": f"{type(exc).__name__}: {exc}"})


def run_suite(config: SuiteConfig) -> Report:
    """Run the selected checks (all by default); results keep registry order."""
    names = resolve_checks(config.checks)
    _family(config)  # validates the family before any work
    start = time.perf_counter()
    rs = config.root_system
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(lambda n: run_check(n, None, config), names))
    else:
        results = [run_check(n, None, config) for n in names]
    _HEAT_CACHE.clear()
    consts = C.constants_report(rs).to_dict()
    return Report(rs.summary(), consts, results, config.seed, time.perf_counter() - start)


# -- serialization -------------------------------------------------------------------

def _emit(obj, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_emit(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_emit(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _emit(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "NaN"
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return format(x, ".17g")
    return json.dumps(obj)


def report_to_json(report: Report, include_timing: bool = False) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _emit(report.to_dict(include_timing)) + "\n"


def report_from_dict(doc: Mapping) -> Report:
    results = []
    for r in doc["results"]:
        rows = [Row(**row) for row in r.get("rows", [])]
        results.append(CheckResult(r["check_name"], r["paper_anchor"], Status(r["status"]),
                                   r["lhs"], r["rhs"], r["ratio"], r["tolerance"],
                                   r.get("witness"), rows, dict(r.get("notes", {}))))
    return Report(dict(doc["root_system"]), dict(doc["constants"]), results, int(doc["seed"]),
                  float(doc.get("wall_time", 0.0)))


def report_from_json(text: str) -> Report:
    return report_from_dict(json.loads(text))


def write_csv_tables(report: Report, directory) -> list[Path]:
    """One CSV per check with columns ``field, lhs, rhs, ratio, status``."""
    out_dir = Path(directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for r in report.results:
        path = out_dir / f"{r.check_name.lower()}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["field", "lhs", "rhs", "ratio", "status"])
            for row in r.rows:
                w.writerow([row.field, format(row.lhs, ".17g"), format(row.rhs, ".17g"),
                            format(row.ratio, ".17g"), row.status])
        paths.append(path)
    return paths


def suite_config_from_dict(doc: Mapping, **overrides) -> SuiteConfig:
    """Build a :class:`SuiteConfig` from the JSON configuration schema.

    Keys: ``root_system`` (shorthand, file path or mapping, required), ``seed``,
    ``checks`` (``"all"``, comma list or list), ``family`` (list of field specs),
    ``tolerances`` (check -> real), ``tol_scale``, ``t_points``, ``t_range``,
    ``level_count``, ``probe_count``, ``box_count``, ``threads``.  Output paths
    (``out``, ``csv``) are read by the command line front end.
    """
    from .rootsys import load_root_system

    doc = {**doc, **{k: v for k, v in overrides.items() if v is not None}}
    if "root_system" not in doc:
        raise ValidationError("configuration needs a root_system")
    if "seed" not in doc:
        raise ValidationError("configuration needs a seed")
    checks = doc.get("checks")
    fam = doc.get("family")
    tr = doc.get("t_range")
    return SuiteConfig(
        root_system=load_root_system(doc["root_system"]),
        seed=int(doc["seed"]),
        checks=None if checks in (None, "all") else tuple(resolve_checks(checks)),
        family=None if fam is None else tuple(fam),
        tolerances={str(k).upper(): float(v) for k, v in dict(doc.get("tolerances", {})).items()},
        tol_scale=float(doc.get("tol_scale", 1.0)),
        t_points=None if doc.get("t_points") is None else int(doc["t_points"]),
        t_range=None if tr is None else (float(tr[0]), float(tr[1])),
        level_count=int(doc.get("level_count", 200)),
        probe_count=int(doc.get("probe_count", 200)),
        box_count=int(doc.get("box_count", 20)),
        threads=int(doc.get("threads", 1)),
    )
