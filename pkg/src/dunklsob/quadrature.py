"""Integration against the Dunkl measure ``dmu_k = w_k(x) dx``.

Domains are split along every reflecting hyperplane, so each integration cell
lies in a single Weyl chamber where the weight is smooth.  In dimensions one
and two cells are parametrized in polar form: the angular range of a chamber
is an interval between two walls, and the radial coordinate is mapped onto
``s in [0, 1]``.  The algebraic singularities of the weight at the walls
(``|theta - theta_wall|^{2k}``) and at the origin (``r^{N + 2 gamma - 1}``)
are absorbed by Gauss-Jacobi rules, and cells are refined adaptively.

For product (Z_2^N) systems a Cartesian orthant-by-orthant tensor rule is
also available in any dimension; it serves as an independent route.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import roots_jacobi

from .errors import (
    NoConvergenceError,
    UnboundedDomainError,
    UnsupportedRootSystemError,
    UnsupportedShapeError,
    ValidationError,
)
from .fields import Decay, ScalarField
from .rootsys import ChamberSign, RootSystem, weight

TWO_PI = 2.0 * math.pi
DEFAULT_TOL = 1e-10
MAX_CELLS = 20000
_ORDER = 10
_LOW = 6


class DomainKind(str, Enum):
    FULL_SPACE = "FULL_SPACE"
    BALL = "BALL"
    BOX = "BOX"
    CHAMBER_BALL = "CHAMBER_BALL"
    CHAMBER = "CHAMBER"


@dataclass(frozen=True)
class WeightedDomain:
    """An integration region together with the measure ``mu_k`` of ``root_system``."""

    kind: DomainKind
    root_system: RootSystem
    radius: float | None = None
    lo: tuple[float, ...] | None = None
    hi: tuple[float, ...] | None = None
    chamber: ChamberSign | None = None

    def __post_init__(self):
        n = self.root_system.dimension
        if self.kind in (DomainKind.BALL, DomainKind.CHAMBER_BALL):
            if self.radius is None or not self.radius > 0:
                raise ValidationError("ball radius must be positive")
        if self.kind is DomainKind.BOX:
            if self.lo is None or self.hi is None or len(self.lo) != n or len(self.hi) != n:
                raise ValidationError(f"box corners must have {n} coordinates")
            if not all(a < b for a, b in zip(self.lo, self.hi)):
                raise ValidationError("box needs lo < hi componentwise")
        if self.kind in (DomainKind.CHAMBER, DomainKind.CHAMBER_BALL):
            if self.chamber is None or self.chamber not in self.root_system.chambers:
                raise ValidationError(f"{self.chamber} does not label a Weyl chamber")

    # constructors
    @classmethod
    def full_space(cls, rs):
        return cls(DomainKind.FULL_SPACE, rs)

    @classmethod
    def ball(cls, rs, radius):
        return cls(DomainKind.BALL, rs, radius=float(radius))

    @classmethod
    def box(cls, rs, lo, hi):
        return cls(DomainKind.BOX, rs, lo=tuple(np.atleast_1d(lo).astype(float)),
                   hi=tuple(np.atleast_1d(hi).astype(float)))

    @classmethod
    def chamber_ball(cls, rs, chamber, radius):
        if isinstance(chamber, str):
            chamber = ChamberSign.parse(chamber)
        return cls(DomainKind.CHAMBER_BALL, rs, radius=float(radius), chamber=chamber)

    @classmethod
    def in_chamber(cls, rs, chamber):
        if isinstance(chamber, str):
            chamber = ChamberSign.parse(chamber)
        return cls(DomainKind.CHAMBER, rs, chamber=chamber)

    @property
    def bounded(self) -> bool:
        return self.kind in (DomainKind.BALL, DomainKind.BOX, DomainKind.CHAMBER_BALL)


@dataclass(frozen=True)
class CellContribution:
    """One final cell of the adaptive mesh in its patch coordinates."""

    s0: float
    s1: float
    theta0: float
    theta1: float
    value: float
    error: float


@dataclass(frozen=True)
class IntegralResult:
    value: float | np.ndarray
    error_estimate: float
    cells_used: int
    cells: tuple[CellContribution, ...] | None = None

    def __float__(self):
        return float(self.value)


# -- quadrature rules -----------------------------------------------------------

@lru_cache(maxsize=None)
def _rule(n: int, e_lo: float, e_hi: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes on (0, 1) and weights for ``int_0^1 g(s) ds`` where
    ``g(s) ~ s^e_lo`` at 0 and ``(1 - s)^e_hi`` at 1.

    The returned weights already divide out the singular factors, so they are
    applied to the full integrand values.
    """
    if e_lo == 0 and e_hi == 0:
        x, w = np.polynomial.legendre.leggauss(n)
    else:
        x, w = roots_jacobi(n, e_hi, e_lo)
    s = 0.5 * (x + 1.0)
    w = w / 2.0 ** (1.0 + e_lo + e_hi)
    w = w / (s ** e_lo * (1.0 - s) ** e_hi)
    return s, w


# -- geometry ----------------------------------------------------------------------

@dataclass(frozen=True)
class _Sector:
    """Angular interval between two consecutive walls (N = 2) or a half line (N = 1)."""

    theta0: float
    theta1: float
    e0: float  # exponent of the weight at theta0
    e1: float
    label: ChamberSign


def sectors(rs: RootSystem) -> list[_Sector]:
    if rs.dimension == 1:
        out = []
        for u in (1.0, -1.0):
            lab = ChamberSign(tuple(int(s) for s in np.sign(u * rs.positive_roots[:, 0])))
            out.append(_Sector(u, u, 0.0, 0.0, lab))
        return out
    if rs.dimension != 2:
        raise UnsupportedShapeError("polar quadrature is implemented for N <= 2")
    walls = []
    for a, k in zip(rs.positive_roots, rs.k):
        phi = (math.atan2(a[1], a[0]) + math.pi / 2) % math.pi
        walls.append((phi, 2 * k))
        walls.append((phi + math.pi, 2 * k))
    walls.sort()
    out = []
    for i, (t0, e0) in enumerate(walls):
        t1, e1 = walls[(i + 1) % len(walls)]
        if i == len(walls) - 1:
            t1 += TWO_PI
        mid = 0.5 * (t0 + t1)
        u = np.array([math.cos(mid), math.sin(mid)])
        lab = ChamberSign(tuple(int(s) for s in np.sign(rs.positive_roots @ u)))
        out.append(_Sector(t0, t1, e0, e1, lab))
    return out


def _directions(theta: np.ndarray, n: int, sector: _Sector) -> np.ndarray:
    if n == 1:
        return np.full((theta.size, 1), sector.theta0)
    return np.column_stack([np.cos(theta), np.sin(theta)])


def _angular_weight(rs: RootSystem, u: np.ndarray) -> np.ndarray:
    return np.prod(np.abs(u @ rs.positive_roots.T) ** (2.0 * rs.k), axis=-1)


def _ray_box(u: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Entry and exit radii of rays ``r u`` (rows of ``u``) through a box."""
    rin = np.zeros(u.shape[0])
    rout = np.full(u.shape[0], np.inf)
    for i in range(u.shape[1]):
        ui = u[:, i]
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = lo[i] / ui
            t2 = hi[i] / ui
        tmin = np.where(ui != 0, np.minimum(t1, t2), np.where((lo[i] <= 0) & (hi[i] >= 0), -np.inf, np.inf))
        tmax = np.where(ui != 0, np.maximum(t1, t2), np.where((lo[i] <= 0) & (hi[i] >= 0), np.inf, -np.inf))
        rin = np.maximum(rin, tmin)
        rout = np.minimum(rout, tmax)
    return rin, rout


@dataclass
class _Patch:
    sector: _Sector
    theta_breaks: np.ndarray
    s_breaks: np.ndarray
    rmap: Callable  # (theta, s) -> (r, dr/ds)
    e_s0: float


def _truncation(decay: Decay | None, radius: float | None, tol: float) -> tuple[str, float]:
    if radius is not None:
        return "linear", float(radius)
    if decay is None:
        raise UnboundedDomainError("integration over an unbounded domain needs a decay declaration")
    if decay.kind == "power":
        return "compact", 1.0
    return "linear", decay.truncation_radius(min(tol, 1e-6) * 1e-4)


def _patches(domain: WeightedDomain, decay, radius, tol, r_breaks, theta_breaks) -> list[_Patch]:
    rs = domain.root_system
    n = rs.dimension
    d = rs.effective_dimension
    secs = sectors(rs)
    kind = domain.kind
    if kind in (DomainKind.CHAMBER, DomainKind.CHAMBER_BALL):
        secs = [s for s in secs if s.label == domain.chamber]
    patches = []
    if kind in (DomainKind.BALL, DomainKind.CHAMBER_BALL) or kind in (DomainKind.FULL_SPACE, DomainKind.CHAMBER):
        if kind in (DomainKind.BALL, DomainKind.CHAMBER_BALL):
            mode, R = "linear", domain.radius
        else:
            mode, R = _truncation(decay, radius, tol)
        if mode == "linear":
            def rmap(theta, s, R=R):
                return R * s, np.full_like(s, R)
            sb = [0.0, 0.25, 0.5, 0.75, 1.0]
            sb += [rb / R for rb in r_breaks if 0 < rb < R]
        else:
            def rmap(theta, s, R=R):
                return R * s / (1.0 - s), R / (1.0 - s) ** 2
            sb = [0.0, 0.25, 0.5, 0.75, 0.9, 0.97, 1.0]
            sb += [rb / (R + rb) for rb in r_breaks if rb > 0]
        for sec in secs:
            tb = _theta_breaks(sec, theta_breaks, n)
            patches.append(_Patch(sec, tb, np.unique(sb), rmap, d - 1.0))
        return patches
    if kind is DomainKind.BOX:
        lo = np.asarray(domain.lo)
        hi = np.asarray(domain.hi)
        origin_in = bool(np.all(lo <= 0) and np.all(hi >= 0))
        if n == 1:
            for sec in secs:
                u = np.array([[sec.theta0]])
                rin, rout = _ray_box(u, lo, hi)
                if rout[0] > rin[0]:
                    a, b = float(rin[0]), float(rout[0])

                    def rmap(theta, s, a=a, b=b):
                        return a + (b - a) * s, np.full_like(s, b - a)
                    sb = [0.0, 0.5, 1.0] + [(rb - a) / (b - a) for rb in r_breaks if a < rb < b]
                    patches.append(_Patch(sec, np.array([sec.theta0, sec.theta0]), np.unique(sb),
                                          rmap, d - 1.0 if a == 0 else 0.0))
            return patches
        corners = np.array(np.meshgrid(*[(lo[i], hi[i]) for i in range(n)])).reshape(n, -1).T
        cang = [math.atan2(c[1], c[0]) % TWO_PI for c in corners if np.linalg.norm(c) > 0]
        for sec in secs:
            cand = [sec.theta0, sec.theta1]
            for a in cang + list(theta_breaks):
                for shift in (0.0, TWO_PI):
                    if sec.theta0 < a + shift < sec.theta1:
                        cand.append(a + shift)
            cand = np.unique(cand)
            valid = []
            for t0, t1 in zip(cand[:-1], cand[1:]):
                mid = 0.5 * (t0 + t1)
                rin, rout = _ray_box(np.array([[math.cos(mid), math.sin(mid)]]), lo, hi)
                valid.append(rout[0] > rin[0] + 1e-14)
            # merge consecutive valid intervals into patches
            i = 0
            while i < len(valid):
                if not valid[i]:
                    i += 1
                    continue
                j = i
                while j + 1 < len(valid) and valid[j + 1]:
                    j += 1
                tb = cand[i:j + 2]
                e0 = sec.e0 if tb[0] == sec.theta0 else 0.0
                e1 = sec.e1 if tb[-1] == sec.theta1 else 0.0
                sub = _Sector(float(tb[0]), float(tb[-1]), e0, e1, sec.label)

                def rmap(theta, s, lo=lo, hi=hi):
                    u = np.column_stack([np.cos(theta), np.sin(theta)])
                    a, b = _ray_box(u, lo, hi)
                    a = np.where(origin_in, 0.0, np.maximum(a, 0.0))
                    return a + (b - a) * s, b - a
                patches.append(_Patch(sub, np.asarray(tb, dtype=float), np.array([0.0, 0.5, 1.0]),
                                      rmap, d - 1.0 if origin_in else 0.0))
                i = j + 1
        return patches
    raise UnsupportedShapeError(f"unsupported domain {kind}")


def _theta_breaks(sec: _Sector, extra: Sequence[float], n: int) -> np.ndarray:
    if n == 1:
        return np.array([sec.theta0, sec.theta0])
    width = sec.theta1 - sec.theta0
    m = max(2, int(math.ceil(width / (math.pi / 6))))
    tb = list(np.linspace(sec.theta0, sec.theta1, m + 1))
    for a in extra:
        for shift in (0.0, TWO_PI, -TWO_PI):
            if sec.theta0 < a + shift < sec.theta1:
                tb.append(a + shift)
    return np.unique(tb)


# -- adaptive integration ------------------------------------------------------

@dataclass
class _Cell:
    patch: _Patch
    s0: float
    s1: float
    t0: float
    t1: float


def _cell_exponents(c: _Cell):
    p = c.patch
    es0 = p.e_s0 if c.s0 == 0.0 else 0.0
    et0 = p.sector.e0 if c.t0 == p.sector.theta0 else 0.0
    et1 = p.sector.e1 if c.t1 == p.sector.theta1 else 0.0
    return es0, et0, et1


def _eval_rule(c: _Cell, f, rs: RootSystem, ns: int, nt: int, weighted: bool) -> np.ndarray:
    n = rs.dimension
    es0, et0, et1 = _cell_exponents(c)
    s, ws = _rule(ns, es0, 0.0)
    s = c.s0 + (c.s1 - c.s0) * s
    ws = ws * (c.s1 - c.s0)
    if n == 1:
        theta = np.array([c.patch.sector.theta0])
        wt = np.array([1.0])
    else:
        t, wt = _rule(nt, et0, et1)
        theta = c.t0 + (c.t1 - c.t0) * t
        wt = wt * (c.t1 - c.t0)
    T, S = np.meshgrid(theta, s, indexing="ij")
    T = T.ravel()
    S = S.ravel()
    r, drds = c.patch.rmap(T, S)
    u = _directions(T, n, c.patch.sector)
    x = r[:, None] * u
    jac = drds * r ** (n - 1)
    if weighted:
        jac = jac * weight(rs, x)
    vals = np.asarray(f(x), dtype=float)
    W = (wt[:, None] * ws[None, :]).ravel() * jac
    if vals.ndim == 1:
        return np.atleast_1d(W @ vals)
    return W @ vals.reshape(x.shape[0], -1)


def _estimate(c: _Cell, f, rs, weighted):
    hi = _eval_rule(c, f, rs, _ORDER, _ORDER, weighted)
    lo_s = _eval_rule(c, f, rs, _LOW, _ORDER, weighted)
    es = np.max(np.abs(hi - lo_s))
    if rs.dimension == 1:
        return hi, es, es, 0.0
    lo_t = _eval_rule(c, f, rs, _ORDER, _LOW, weighted)
    et = np.max(np.abs(hi - lo_t))
    return hi, es + et, es, et


def _split(c: _Cell, es: float, et: float) -> list[_Cell]:
    if et > es:
        tm = 0.5 * (c.t0 + c.t1)
        return [_Cell(c.patch, c.s0, c.s1, c.t0, tm), _Cell(c.patch, c.s0, c.s1, tm, c.t1)]
    sm = 0.5 * (c.s0 + c.s1)
    return [_Cell(c.patch, c.s0, sm, c.t0, c.t1), _Cell(c.patch, sm, c.s1, c.t0, c.t1)]


def _as_integrand(integrand):
    if isinstance(integrand, ScalarField):
        return integrand, integrand.decay
    return integrand, None


def integrate_weighted(integrand, domain: WeightedDomain, tolerance: float = DEFAULT_TOL, *,
                       decay: Decay | None = None, radius: float | None = None,
                       abs_tolerance: float = 0.0, r_breaks: Sequence[float] = (),
                       theta_breaks: Sequence[float] = (), max_cells: int = MAX_CELLS,
                       weighted: bool = True, strict: bool = True,
                       record_cells: bool = False) -> IntegralResult:
    """Adaptive approximation of ``int_domain f dmu_k``.

    ``integrand`` is a :class:`ScalarField` or a vectorized callable taking
    points of shape ``(M, N)`` and returning ``(M,)`` or ``(M, K)`` values.
    For unbounded domains the decay of the integrand must be known (from the
    field or via ``decay=``) or a truncation ``radius`` given.  ``r_breaks`` and
    ``theta_breaks`` seed the mesh at radii and angles where the integrand
    has narrow features.  With ``weighted=False`` the Lebesgue measure is used.
    ``record_cells`` keeps the contribution of every final cell (N <= 2).
    """
    rs = domain.root_system
    f, fdecay = _as_integrand(integrand)
    decay = decay or fdecay
    if rs.dimension > 2:
        if rs.is_product:
            return integrate_cartesian(f, domain, tolerance, decay=decay, radius=radius)
        raise UnsupportedShapeError("quadrature for N > 2 is available for product systems only")
    patches = _patches(domain, decay, radius, tolerance, r_breaks, theta_breaks)
    cells = []
    for p in patches:
        for s0, s1 in zip(p.s_breaks[:-1], p.s_breaks[1:]):
            for t0, t1 in zip(p.theta_breaks[:-1], p.theta_breaks[1:]) if rs.dimension == 2 else [(p.theta_breaks[0],) * 2]:
                cells.append(_Cell(p, float(s0), float(s1), float(t0), float(t1)))
    heap = []
    total = None
    err_total = 0.0
    counter = 0
    for c in cells:
        v, e, es, et = _estimate(c, f, rs, weighted)
        total = v if total is None else total + v
        err_total += e
        heapq.heappush(heap, (-e, counter, c, v, es, et))
        counter += 1
    if total is None:
        return IntegralResult(0.0, 0.0, 0)
    n_cells = len(heap)
    while True:
        target = max(abs_tolerance, tolerance * float(np.max(np.abs(total))))
        if err_total <= target or not heap:
            break
        if n_cells >= max_cells:
            if strict:
                raise NoConvergenceError(
                    f"quadrature did not reach tolerance {tolerance:g} within {max_cells} cells "
                    f"(error estimate {err_total:.3g}, value {np.max(np.abs(total)):.6g})")
            break
        negerr, _, c, v, es, et = heapq.heappop(heap)
        total = total - v
        err_total += negerr
        for child in _split(c, es, et):
            cv, ce, ces, cet = _estimate(child, f, rs, weighted)
            total = total + cv
            err_total += ce
            heapq.heappush(heap, (-ce, counter, child, cv, ces, cet))
            counter += 1
        n_cells += 1
    # re-sum to avoid drift from repeated add/subtract
    total = sum((item[3] for item in sorted(heap, key=lambda it: it[1])), np.zeros_like(total))
    err_total = float(sum(-item[0] for item in heap))
    value = float(total[0]) if total.size == 1 else total
    cells_out = None
    if record_cells:
        cells_out = tuple(
            CellContribution(it[2].s0, it[2].s1, it[2].t0, it[2].t1,
                             float(np.ravel(it[3])[0]), float(-it[0]))
            for it in sorted(heap, key=lambda it: it[1]))
    return IntegralResult(value, err_total, n_cells, cells_out)


# -- Cartesian route for product systems ----------------------------------------------

def _cart_axis_rule(a: float, b: float, e_at_zero: float, panels: int, order: int):
    """Composite rule on [a, b] (one side of 0) with weight singular at 0."""
    edges = np.linspace(a, b, panels + 1)
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        e_lo = e_at_zero if lo == 0 else 0.0
        e_hi = e_at_zero if hi == 0 else 0.0
        s, w = _rule(order, e_lo, e_hi)
        xs.append(lo + (hi - lo) * s)
        ws.append(w * (hi - lo))
    return np.concatenate(xs), np.concatenate(ws)


def integrate_cartesian(integrand, domain: WeightedDomain, tolerance: float = 1e-10, *,
                        decay: Decay | None = None, radius: float | None = None,
                        order: int = 12, max_panels: int = 256) -> IntegralResult:
    """Tensor Gauss-Jacobi quadrature over orthants for Z_2^N systems.

    Supports FULL_SPACE, CHAMBER and BOX.  Panels per axis are doubled until
    two successive values agree to ``tolerance``.
    """
    rs = domain.root_system
    if not rs.is_product:
        raise UnsupportedRootSystemError("Cartesian quadrature needs an A1_PRODUCT root system")
    f, fdecay = _as_integrand(integrand)
    decay = decay or fdecay
    n = rs.dimension
    # positive root j is sqrt(2) e_j, so chamber signs are coordinate signs
    if domain.kind is DomainKind.BOX:
        lo, hi = np.asarray(domain.lo), np.asarray(domain.hi)
        signs_ok = None
    elif domain.kind in (DomainKind.FULL_SPACE, DomainKind.CHAMBER):
        mode, R = _truncation(decay, radius, tolerance)
        if mode != "linear":
            raise UnsupportedShapeError("Cartesian route needs a finite truncation radius")
        lo, hi = -np.full(n, R), np.full(n, R)
        signs_ok = domain.chamber.signs if domain.kind is DomainKind.CHAMBER else None
    else:
        raise UnsupportedShapeError("Cartesian route supports FULL_SPACE, CHAMBER and BOX")
    axes_pieces = []
    for j in range(n):
        pieces = []
        if lo[j] < 0 and (signs_ok is None or signs_ok[j] < 0):
            pieces.append((lo[j], min(hi[j], 0.0)))
        if hi[j] > 0 and (signs_ok is None or signs_ok[j] > 0):
            pieces.append((max(lo[j], 0.0), hi[j]))
        axes_pieces.append(pieces)

    def value(panels):
        axes = []
        for j in range(n):
            xs, ws = [], []
            for a, b in axes_pieces[j]:
                x, w = _cart_axis_rule(a, b, 2 * rs.k[j], panels, order)
                xs.append(x)
                ws.append(w * np.abs(np.sqrt(2.0) * x) ** (2 * rs.k[j]))
            axes.append((np.concatenate(xs), np.concatenate(ws)))
        grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
        wgrid = np.ones_like(grids[0])
        for j, g in enumerate(np.meshgrid(*[a[1] for a in axes], indexing="ij")):
            wgrid = wgrid * g
        pts = np.column_stack([g.ravel() for g in grids])
        return float(np.asarray(f(pts), dtype=float) @ wgrid.ravel())

    panels = 2
    prev = value(panels)
    while True:
        panels *= 2
        cur = value(panels)
        err = abs(cur - prev)
        if err <= tolerance * abs(cur) or err == 0.0:
            return IntegralResult(cur, err, panels ** n)
        if panels >= max_panels:
            raise NoConvergenceError("Cartesian quadrature did not converge")
        prev = cur


# -- norms -----------------------------------------------------------------------------

def _power_decay_divergent(decay: Decay | None, p: float, d: float) -> bool:
    return decay is not None and decay.kind == "power" and decay.power * p <= d


def lp_norm(field: ScalarField, p: float, domain: WeightedDomain,
            tolerance: float = 1e-10, **kw) -> float:
    """``||f||_{L^p(mu_k)}`` over ``domain``; ``p = inf`` uses a sampled supremum.

    Returns ``inf`` when the field's declared power decay makes the integral
    diverge.
    """
    if p < 1:
        raise ValidationError("p must be >= 1")
    if math.isinf(p):
        return sup_norm(field, domain)
    rs = domain.root_system
    dec = field.decay.power_of(p) if field.decay is not None else None
    if not domain.bounded and _power_decay_divergent(field.decay, p, rs.effective_dimension):
        return math.inf
    res = integrate_weighted(lambda x: np.abs(field(x)) ** p, domain, tolerance, decay=dec, **kw)
    return float(max(res.value, 0.0)) ** (1.0 / p)


def sample_points(domain: WeightedDomain, n_radial: int = 161, n_angular: int = 96,
                  decay: Decay | None = None, radius: float | None = None) -> np.ndarray:
    """Deterministic polar sample grid covering ``domain`` (N <= 2)."""
    rs = domain.root_system
    n = rs.dimension
    kind = domain.kind
    if kind in (DomainKind.BALL, DomainKind.CHAMBER_BALL):
        R = domain.radius
    elif kind is DomainKind.BOX:
        R = float(np.max(np.linalg.norm(np.array([domain.lo, domain.hi]), axis=1)))
    else:
        mode, R = _truncation(decay, radius, 1e-10)
        if mode != "linear":
            R = 50.0
    r = np.linspace(0.0, R, n_radial)
    if n == 1:
        pts = np.concatenate([r, -r[1:]])[:, None]
    elif n == 2:
        th = np.linspace(0.0, TWO_PI, n_angular, endpoint=False) + 1e-3
        pts = (r[:, None, None] * np.stack([np.cos(th), np.sin(th)], axis=1)[None]).reshape(-1, 2)
    else:
        rng = np.random.default_rng(0)
        u = rng.normal(size=(n_radial * n_angular, n))
        u /= np.linalg.norm(u, axis=1)[:, None]
        pts = u * rng.uniform(0, R, (u.shape[0], 1))
    return _restrict(pts, domain)


def _restrict(pts: np.ndarray, domain: WeightedDomain) -> np.ndarray:
    rs = domain.root_system
    keep = np.ones(pts.shape[0], dtype=bool)
    if domain.kind in (DomainKind.BALL, DomainKind.CHAMBER_BALL):
        keep &= np.linalg.norm(pts, axis=1) <= domain.radius
    if domain.kind in (DomainKind.CHAMBER, DomainKind.CHAMBER_BALL):
        sg = np.sign(pts @ rs.positive_roots.T)
        keep &= np.all((sg == np.array(domain.chamber.signs)) | (sg == 0), axis=1)
    if domain.kind is DomainKind.BOX:
        keep &= np.all((pts >= np.array(domain.lo)) & (pts <= np.array(domain.hi)), axis=1)
    return pts[keep]


def sup_norm(field: ScalarField, domain: WeightedDomain, **kw) -> float:
    """Sampled ``sup |f|`` refined by local maximization around the best samples."""
    from scipy.optimize import minimize

    pts = sample_points(domain, decay=field.decay, **kw)
    if pts.size == 0:
        return 0.0
    vals = np.abs(field(pts))
    best = float(np.max(vals))
    for idx in np.argsort(vals)[-3:]:
        x0 = pts[idx]
        res = minimize(lambda x: -abs(field(x)), x0, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 400})
        cand = res.x.reshape(1, -1)
        if _restrict(cand, domain).shape[0] == 1:
            best = max(best, float(-res.fun))
    return best


def level_set_measure(field: ScalarField, levels, domain: WeightedDomain, *,
                      n_radial: int = 2001, angular_panels: int = 8, angular_order: int = 24,
                      bisection_steps: int = 52) -> np.ndarray:
    """``mu_k({x in domain : |f(x)| > t})`` for every ``t`` in ``levels``.

    Along each quadrature ray the crossings of ``|f| = t`` are located by
    bracketing on a radial grid and bisection, and the radial part of the
    measure is integrated exactly; the angular part uses Gauss-Jacobi rules
    per chamber.  Only domains star-shaped about the origin are supported.
    """
    rs = domain.root_system
    n = rs.dimension
    if domain.kind not in (DomainKind.FULL_SPACE, DomainKind.CHAMBER, DomainKind.BALL, DomainKind.CHAMBER_BALL):
        raise UnsupportedShapeError("level-set measure needs a domain star-shaped about the origin")
    if n > 2:
        raise UnsupportedShapeError("level-set measure is implemented for N <= 2")
    levels = np.asarray(levels, dtype=float)
    d = rs.effective_dimension
    if domain.kind in (DomainKind.BALL, DomainKind.CHAMBER_BALL):
        R = domain.radius
    else:
        if field.decay is None:
            raise UnboundedDomainError("field needs a decay declaration")
        R = field.decay.truncation_radius(1e-17) if field.decay.kind != "power" else None
        if R is None:
            raise UnboundedDomainError("level sets of power-decaying fields need a bounded domain")
    secs = sectors(rs)
    if domain.kind in (DomainKind.CHAMBER, DomainKind.CHAMBER_BALL):
        secs = [s for s in secs if s.label == domain.chamber]
    dirs, wdir = [], []
    for sec in secs:
        if n == 1:
            dirs.append(np.array([[sec.theta0]]))
            wdir.append(np.array([_angular_weight(rs, np.array([sec.theta0]))]))
            continue
        edges = np.linspace(sec.theta0, sec.theta1, angular_panels + 1)
        for j, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
            t, w = _rule(angular_order, sec.e0 if j == 0 else 0.0, sec.e1 if j == angular_panels - 1 else 0.0)
            th = a + (b - a) * t
            u = np.column_stack([np.cos(th), np.sin(th)])
            dirs.append(u)
            wdir.append(w * (b - a) * _angular_weight(rs, u))
    U = np.vstack(dirs)
    WU = np.concatenate(wdir)
    r = np.linspace(0.0, R, n_radial)
    vals = np.abs(field((U[:, None, :] * r[None, :, None]).reshape(-1, n))).reshape(U.shape[0], n_radial)
    # collect brackets for every level, then bisect them in one batch
    lev_idx, ray_idx, grid_idx = [], [], []
    for li, t in enumerate(levels):
        above = vals > t
        ri, ji = np.nonzero(above[:, 1:] != above[:, :-1])
        lev_idx.append(np.full(ri.size, li))
        ray_idx.append(ri)
        grid_idx.append(ji)
    li = np.concatenate(lev_idx)
    ri = np.concatenate(ray_idx)
    ji = np.concatenate(grid_idx)
    t = levels[li]
    start_above = vals[ri, ji] > t
    a = r[ji].copy()
    b = r[ji + 1].copy()
    u = U[ri]
    for _ in range(bisection_steps):
        m = 0.5 * (a + b)
        left = (np.abs(field(m[:, None] * u)) > t) != start_above
        b = np.where(left, m, b)
        a = np.where(left, a, m)
    rc = 0.5 * (a + b)
    # entering the set (moving outwards) removes the inner ball, leaving adds the outer one
    contrib = np.where(start_above, 1.0, -1.0) * rc ** d / d
    per = np.zeros((levels.size, U.shape[0]))
    np.add.at(per, (li, ri), contrib)
    per += (vals[None, :, -1] > levels[:, None]) * R ** d / d
    masses = per @ WU
    return masses


def weak_lq_norm(field: ScalarField, q: float, level_grid, domain: WeightedDomain) -> float:
    """Grid supremum of ``t mu_k(|f| > t)^{1/q}`` (a lower bound of the weak-L^q norm)."""
    if q < 1:
        raise ValidationError("q must be >= 1")
    levels = np.asarray(level_grid, dtype=float)
    if levels.size == 0:
        return 0.0
    m = level_set_measure(field, levels, domain)
    return float(np.max(levels * np.maximum(m, 0.0) ** (1.0 / q)))


# -- surface integrals --------------------------------------------------------------

def _sphere_integral(rs: RootSystem, radius: float, chamber: ChamberSign | None = None,
                     order: int = 40) -> float:
    """``int_{|x| = radius} w_k dsigma`` (restricted to a chamber if given)."""
    n = rs.dimension
    secs = sectors(rs)
    if chamber is not None:
        secs = [s for s in secs if s.label == chamber]
    if n == 1:
        return float(sum(weight(rs, np.array([s.theta0 * radius])) for s in secs))
    total = 0.0
    for sec in secs:
        vals = []
        for m in (order, order + 20):
            t, w = _rule(m, sec.e0, sec.e1)
            th = sec.theta0 + (sec.theta1 - sec.theta0) * t
            u = np.column_stack([np.cos(th), np.sin(th)]) * radius
            vals.append(float((w * (sec.theta1 - sec.theta0) * radius) @ weight(rs, u)))
        total += vals[1]
    return total


def sphere_weight_integral(rs: RootSystem) -> float:
    """``p(B_1) = int_{S^{N-1}} w_k dsigma`` by quadrature (endpoint sum when N = 1)."""
    if rs.dimension > 2:
        raise UnsupportedShapeError("surface quadrature is implemented for N <= 2")
    return _sphere_integral(rs, 1.0)


def _segment_weight_integral(rs: RootSystem, p0: np.ndarray, p1: np.ndarray, order: int = 30) -> float:
    """``int w_k dsigma`` along the segment ``[p0, p1]``, split where it meets walls."""
    a0 = rs.positive_roots @ p0
    a1 = rs.positive_roots @ p1
    breaks = {0.0: 0.0, 1.0: 0.0}
    for ka, x0, x1 in zip(rs.k, a0, a1):
        if x0 == x1:
            continue
        s = x0 / (x0 - x1)
        if -1e-14 <= s <= 1 + 1e-14:
            s = min(max(s, 0.0), 1.0)
            breaks[s] = breaks.get(s, 0.0) + 2 * ka
    keys = sorted(breaks)
    length = float(np.linalg.norm(p1 - p0))
    total = 0.0
    for sa, sb in zip(keys[:-1], keys[1:]):
        if sb - sa <= 0:
            continue
        t, w = _rule(order, breaks[sa], breaks[sb])
        s = sa + (sb - sa) * t
        pts = p0[None, :] + s[:, None] * (p1 - p0)[None, :]
        total += float((w * (sb - sa) * length) @ weight(rs, pts))
    return total


def perimeter(rs: RootSystem, domain: WeightedDomain) -> float:
    """Weighted perimeter ``p(A) = int_{dA} w_k dsigma`` of a ball, box or chamber ball."""
    n = rs.dimension
    if n > 2:
        raise UnsupportedShapeError("perimeter is implemented for N <= 2")
    kind = domain.kind
    if kind is DomainKind.BALL:
        return _sphere_integral(rs, domain.radius)
    if kind is DomainKind.CHAMBER_BALL:
        # the flat faces lie on walls where w_k = 0 (when k > 0 on those walls)
        arc = _sphere_integral(rs, domain.radius, domain.chamber)
        if n == 2:
            sec = [s for s in sectors(rs) if s.label == domain.chamber][0]
            for th, e in ((sec.theta0, sec.e0), (sec.theta1, sec.e1)):
                if e == 0:
                    u = np.array([math.cos(th), math.sin(th)]) * domain.radius
                    arc += _segment_weight_integral(rs, np.zeros(2), u)
        elif n == 1 and rs.is_trivial:
            arc += 1.0
        return arc
    if kind is DomainKind.BOX:
        lo = np.asarray(domain.lo)
        hi = np.asarray(domain.hi)
        if n == 1:
            return float(weight(rs, lo) + weight(rs, hi))
        c = [np.array([lo[0], lo[1]]), np.array([hi[0], lo[1]]),
             np.array([hi[0], hi[1]]), np.array([lo[0], hi[1]])]
        return float(sum(_segment_weight_integral(rs, c[i], c[(i + 1) % 4]) for i in range(4)))
    raise UnsupportedShapeError(f"perimeter of {kind.value} is not supported")


def measure(domain: WeightedDomain, tolerance: float = 1e-12) -> float:
    """``mu_k(domain)`` for a bounded domain."""
    if not domain.bounded:
        raise UnboundedDomainError("measure of an unbounded domain")
    return float(integrate_weighted(lambda x: np.ones(x.shape[0]), domain, tolerance).value)
