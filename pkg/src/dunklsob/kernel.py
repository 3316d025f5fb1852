"""Dunkl kernel, Dunkl transform, heat kernel and heat semigroup for Z_2^N.

For the product system with positive roots ``sqrt(2) e_j`` everything
factorizes over coordinates, and each factor is the rank-one kernel

    E_k(z) = sum_m c_m z^m,   c_0 = 1,   c_m = c_{m-1} / d_m,

with ``d_m = m + 2k`` for odd ``m`` and ``d_m = m`` for even ``m``.  The series is
used for small arguments; for larger real or purely imaginary arguments the
equivalent Bessel forms

    E_k(z)  = Gamma(k + 1/2) (2/|z|)^{k - 1/2} [I_{k-1/2}(|z|) + sgn(z) I_{k+1/2}(|z|)]
    E_k(iu) = j_{k-1/2}(u) + i u / (2k + 1) j_{k+1/2}(u)

avoid the cancellation that ruins the alternating series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, ive, jv

from .errors import (
    ArgumentTooLargeError,
    NonpositiveTimeError,
    NoConvergenceError,
    UnsupportedRootSystemError,
    ValidationError,
)
from .fields import Decay, ScalarField
from .quadrature import WeightedDomain, _rule, integrate_weighted
from .rootsys import RootSystem

SERIES_CAP = 500
ARGUMENT_CAP = 50.0
_SERIES_SWITCH = 1.0


_ASYMPTOTIC_SWITCH = 40.0
_ASYMPTOTIC_TERMS = 20


def _ive(nu: float, z: np.ndarray) -> np.ndarray:
    """``exp(-z) I_nu(z)`` for ``z > 0``; the Hankel expansion is used for large ``z``."""
    out = np.empty_like(z)
    far = z > _ASYMPTOTIC_SWITCH
    near = ~far
    if np.any(near):
        out[near] = ive(nu, z[near])
    if np.any(far):
        mu = 4.0 * nu * nu
        j = np.arange(1, _ASYMPTOTIC_TERMS)
        c = np.concatenate([[1.0], np.cumprod(-(mu - (2 * j - 1) ** 2) / (8.0 * j))])
        zf = z[far]
        out[far] = np.polynomial.polynomial.polyval(1.0 / zf, c) / np.sqrt(2 * np.pi * zf)
    return out


class Rank1Kernel:
    """The rank-one Dunkl kernel ``E_k(x, y) = E_k(xy)`` for multiplicity ``k >= 0``.

    Coefficients are computed up to :data:`SERIES_CAP` at construction, so
    evaluation is pure and thread safe.
    """

    def __init__(self, k: float):
        if k < 0:
            raise ValidationError("multiplicity must be nonnegative")
        self.k = float(k)
        m = np.arange(1, SERIES_CAP)
        d = np.where(m % 2 == 1, m + 2 * self.k, m)
        self.coefficients = np.concatenate([[1.0], np.cumprod(1.0 / d)])

    def _n_terms(self, zmax: float) -> int:
        # terms decay like zmax^m / m! once m exceeds zmax
        c = self.coefficients
        if zmax == 0:
            return 1
        with np.errstate(divide="ignore", over="ignore"):
            logt = np.log(c + 1e-320) + np.arange(c.size) * math.log(zmax)
        peak = float(np.max(logt))
        big = np.nonzero(logt > peak + math.log(1e-17))[0]
        return int(min(c.size, big[-1] + 2))

    def series(self, z):
        """Truncated power series; accurate for moderate ``|z|`` without cancellation."""
        z = np.asarray(z)
        n = self._n_terms(float(np.max(np.abs(z))) if z.size else 0.0)
        return np.polynomial.polynomial.polyval(z, self.coefficients[:n])

    def series_derivative(self, z):
        """``d/dz`` of the truncated series."""
        z = np.asarray(z)
        n = self._n_terms(float(np.max(np.abs(z))) if z.size else 0.0) + 1
        c = self.coefficients[:n]
        return np.polynomial.polynomial.polyval(z, c[1:] * np.arange(1, c.size))

    def scaled(self, z) -> np.ndarray:
        """``exp(-|z|) E_k(z)`` for real ``z`` of any size."""
        z = np.asarray(z, dtype=float)
        a = np.abs(z)
        out = np.empty_like(a)
        small = a <= _SERIES_SWITCH
        if np.any(small):
            out[small] = np.exp(-a[small]) * self.series(z[small])
        big = ~small
        if np.any(big):
            k = self.k
            ab = a[big]
            pref = np.exp(gammaln(k + 0.5) + (k - 0.5) * np.log(2.0 / ab))
            out[big] = pref * (_ive(k - 0.5, ab) + np.sign(z[big]) * _ive(k + 0.5, ab))
        return out

    def real(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return self.scaled(z) * np.exp(np.abs(z))

    def imaginary(self, u) -> np.ndarray:
        """``E_k(i u)`` for real ``u``; modulus at most 1."""
        u = np.asarray(u, dtype=float)
        a = np.abs(u)
        out = np.empty(u.shape, dtype=complex)
        small = a <= _SERIES_SWITCH
        if np.any(small):
            out[small] = self.series(1j * u[small])
        big = ~small
        if np.any(big):
            k = self.k
            ab = a[big]

            def j(nu):
                return np.exp(gammaln(nu + 1) + nu * np.log(2.0 / ab)) * jv(nu, ab)

            out[big] = j(k - 0.5) + 1j * u[big] / (2 * k + 1) * j(k + 0.5)
        return out

    def __call__(self, z):
        """``E_k(z)`` for real or complex ``z``; general complex values use the series."""
        z = np.asarray(z)
        if np.iscomplexobj(z):
            if np.all(z.real == 0):
                return self.imaginary(z.imag)
            if np.any(np.abs(z) > ARGUMENT_CAP):
                raise ArgumentTooLargeError(f"|z| exceeds {ARGUMENT_CAP:g} for a complex argument")
            return self.series(z)
        return self.real(z)


_KERNELS: dict[float, Rank1Kernel] = {}


def rank1_kernel(k: float) -> Rank1Kernel:
    """Shared :class:`Rank1Kernel` for multiplicity ``k``."""
    k = float(k)
    if k not in _KERNELS:
        _KERNELS[k] = Rank1Kernel(k)
    return _KERNELS[k]


def rank1_kernel_eval(k: float, x, y):
    """``E_k(x, y)`` in rank one; the product ``x y`` is capped at ``|xy| <= 50``."""
    z = np.asarray(x) * np.asarray(y)
    if np.any(np.abs(z) > ARGUMENT_CAP):
        raise ArgumentTooLargeError(f"|x y| = {np.max(np.abs(z)):g} exceeds {ARGUMENT_CAP:g}")
    out = rank1_kernel(k)(z)
    return out.item() if np.ndim(out) == 0 else out


def _require_product(rs: RootSystem):
    if not rs.is_product:
        raise UnsupportedRootSystemError(
            f"kernel features need an A1_PRODUCT root system, got {rs.family.value}")


def product_kernel_eval(rs: RootSystem, x, y):
    """``E_k(x, y) = prod_j E_{k_j}(x_j y_j)`` for real or complex ``x``, ``y``.

    Accepts single points of shape ``(N,)`` or batches ``(M, N)``.
    """
    _require_product(rs)
    x = np.asarray(x)
    y = np.asarray(y)
    z = x * y
    single = z.ndim == 1
    z = np.atleast_2d(z)
    out = np.ones(z.shape[0], dtype=complex if np.iscomplexobj(z) else float)
    for j, k in enumerate(rs.k):
        out = out * rank1_kernel(k)(z[:, j])
    return out[0] if single else out


def _m1(k: float) -> float:
    """One-dimensional Macdonald-Mehta factor ``sqrt(2 pi) Gamma(2k+1) / Gamma(k+1)``."""
    return math.sqrt(2 * math.pi) * math.exp(gammaln(2 * k + 1) - gammaln(k + 1))


def _heat_factor(k: float, t: float, x, y, cutoff: float = math.inf) -> np.ndarray:
    """One coordinate of the heat kernel; ``x`` and ``y`` broadcast.

    Entries whose Gaussian factor is below ``exp(-cutoff)`` are set to zero.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    e = (np.abs(x) - np.abs(y)) ** 2 / (4 * t)
    out = np.zeros(x.shape)
    live = e < cutoff
    out[live] = np.exp(-e[live]) * rank1_kernel(k).scaled(x[live] * y[live] / (2 * t))
    return out / (_m1(k) * (2 * t) ** (0.5 + k))


def _heat_matrix(k: float, t: float, x: np.ndarray, y: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``[_heat_factor(k, t, x_i, y_m) w_m]`` computed only on the band ``||x_i| - |y_m|| < 12 sqrt(t)``."""
    out = np.zeros((x.size, y.size))
    if x.size == 0 or y.size == 0:
        return out
    band = math.sqrt(144.0 * t)
    ay = np.abs(y)
    order = np.argsort(ay, kind="stable")
    ays = ay[order]
    ax = np.abs(x)
    lo = np.searchsorted(ays, ax - band, side="left")
    hi = np.searchsorted(ays, ax + band, side="right")
    counts = hi - lo
    rows = np.repeat(np.arange(x.size), counts)
    starts = np.repeat(lo - np.concatenate([[0], np.cumsum(counts)[:-1]]), counts)
    cols = order[np.arange(rows.size) + starts]
    # entries below exp(-40) are dropped before the costly Bessel evaluation
    out[rows, cols] = _heat_factor(k, t, x[rows], y[cols], 40.0) * w[cols]
    return out


def heat_kernel(rs: RootSystem, t: float, x, y):
    """``h_t(x, y) = (M_k (2t)^{d/2})^{-1} exp(-(|x|^2 + |y|^2)/4t) E_k(x/sqrt(2t), y/sqrt(2t))``."""
    _require_product(rs)
    if not t > 0:
        raise NonpositiveTimeError("heat kernel needs t > 0")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    single = x.ndim == 1 and y.ndim == 1
    x2 = np.atleast_2d(x)
    y2 = np.atleast_2d(y)
    out = np.ones(np.broadcast_shapes(x2.shape, y2.shape)[0])
    for j, k in enumerate(rs.k):
        out = out * _heat_factor(k, t, x2[:, j], y2[:, j])
    return float(out[0]) if single else out


def heat_kernel_bound(rs: RootSystem, t: float, x, y):
    """``(2t)^{-d/2} M_k^{-1} max_g exp(-|gx - y|^2 / 4t)``; ``g`` ranges over sign changes."""
    _require_product(rs)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    d = rs.effective_dimension
    M = math.prod(_m1(k) for k in rs.k)
    dist2 = np.sum((np.abs(x) - np.abs(y)) ** 2, axis=1)
    out = np.exp(-dist2 / (4 * t)) / ((2 * t) ** (d / 2) * M)
    return float(out[0]) if out.size == 1 else out


# -- heat semigroup --------------------------------------------------------------------

def _field_extent(field: ScalarField, tol: float = 1e-17) -> float:
    if field.support_radius is not None:
        return float(field.support_radius)
    if field.decay is not None and field.decay.kind != "power":
        return field.decay.truncation_radius(tol)
    return math.inf


def _axis_rule(k: float, t: float, centers: np.ndarray, extent: float, feature_width: float,
               window: float, order: int, power_decay: bool):
    """Nodes and ``|sqrt(2) y|^{2k}``-weights on one axis, covering the kernel windows."""
    st = math.sqrt(t)
    w = window * st
    reach = float(np.max(np.abs(centers))) + w if centers.size else w
    L = min(extent, reach)
    edges = [0.0]
    while edges[-1] < L:
        e = edges[-1]
        h = min(st, feature_width * (max(1.0, e) if power_decay else 1.0))
        edges.append(min(L, e + h))
    edges = np.asarray(edges)
    lo, hi = edges[:-1], edges[1:]
    a = np.abs(centers)
    keep = np.zeros(lo.size, dtype=bool)
    # keep panels within the window of some |x_j|
    order_idx = np.argsort(a)
    a_sorted = a[order_idx]
    for i, (p0, p1) in enumerate(zip(lo, hi)):
        j = np.searchsorted(a_sorted, p0 - w)
        keep[i] = j < a_sorted.size and a_sorted[j] <= p1 + w
    xs, ws = [], []
    for p0, p1 in zip(lo[keep], hi[keep]):
        e0 = 2 * k if p0 == 0.0 else 0.0
        s, wt = _rule(order, e0, 0.0)
        y = p0 + (p1 - p0) * s
        xs.append(y)
        ws.append(wt * (p1 - p0) * (math.sqrt(2.0) * y) ** (2 * k))
    if not xs:
        return np.zeros(0), np.zeros(0)
    y = np.concatenate(xs)
    wt = np.concatenate(ws)
    return np.concatenate([-y[::-1], y]), np.concatenate([wt[::-1], wt])


@dataclass
class HeatOperator:
    """``P_t`` applied through fixed composite Gauss grids on each coordinate axis.

    Grids adapt to ``t`` (panels no wider than ``sqrt(t)``) and to the
    evaluation points (only panels within ``window * sqrt(t)`` of some
    ``|x_j|`` are kept).  The kernel factorizes, so the work is a small tensor
    contraction.  ``max_grid`` caps the size of the tensor-product grid.
    """

    rs: RootSystem
    t: float
    feature_width: float = 0.25
    window: float = 12.0
    order: int = 12
    max_grid: int = 12_000_000

    def __post_init__(self):
        _require_product(self.rs)
        if self.t < 0:
            raise NonpositiveTimeError("heat semigroup needs t >= 0")

    def apply(self, field: ScalarField, x) -> np.ndarray:
        rs = self.rs
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        if pts.shape[1] != rs.dimension:
            pts = pts.reshape(-1, rs.dimension)
        if self.t == 0:
            return np.asarray(field(pts), dtype=float)
        extent = _field_extent(field)
        power = field.decay is not None and field.decay.kind == "power" and field.support_radius is None
        rules = [_axis_rule(k, self.t, pts[:, j], extent, self.feature_width, self.window,
                            self.order, power) for j, k in enumerate(rs.k)]
        sizes = [r[0].size for r in rules]
        if any(s == 0 for s in sizes):
            return np.zeros(pts.shape[0])
        if math.prod(sizes) > self.max_grid:
            raise NoConvergenceError(
                f"heat grid of {math.prod(sizes)} nodes exceeds the cap; increase t or max_grid")
        mats = [_heat_matrix(k, self.t, pts[:, j], rules[j][0], rules[j][1])
                for j, k in enumerate(rs.k)]
        grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
        F = np.asarray(field(np.column_stack([g.ravel() for g in grids])), dtype=float).reshape(sizes)
        if rs.dimension == 1:
            return mats[0] @ F
        if rs.dimension == 2:
            return np.einsum("im,mn,in->i", mats[0], F, mats[1], optimize=True)
        out = F
        # contract the last axis first, keeping the point index aligned
        letters = "abcdefgh"[: rs.dimension]
        expr = ",".join(f"i{c}" for c in letters) + "," + letters + "->i"
        return np.einsum(expr, *mats, out, optimize=True)


    def apply_grid(self, field: ScalarField, axes) -> np.ndarray:
        """``P_t f`` on the tensor grid ``axes[0] x ... x axes[N-1]``; shape ``(n_1, ..., n_N)``."""
        rs = self.rs
        axes = [np.asarray(a, dtype=float) for a in axes]
        if len(axes) != rs.dimension:
            raise ValidationError(f"need {rs.dimension} axes")
        if self.t == 0:
            grids = np.meshgrid(*axes, indexing="ij")
            vals = field(np.column_stack([g.ravel() for g in grids]))
            return np.asarray(vals, dtype=float).reshape([a.size for a in axes])
        extent = _field_extent(field)
        power = field.decay is not None and field.decay.kind == "power" and field.support_radius is None
        rules = [_axis_rule(k, self.t, axes[j], extent, self.feature_width, self.window,
                            self.order, power) for j, k in enumerate(rs.k)]
        sizes = [r[0].size for r in rules]
        if any(s == 0 for s in sizes):
            return np.zeros([a.size for a in axes])
        if math.prod(sizes) > self.max_grid:
            raise NoConvergenceError(
                f"heat grid of {math.prod(sizes)} nodes exceeds the cap; increase t or max_grid")
        grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
        out = np.asarray(field(np.column_stack([g.ravel() for g in grids])), dtype=float).reshape(sizes)
        for j, k in enumerate(rs.k):
            K = _heat_matrix(k, self.t, axes[j], rules[j][0], rules[j][1])
            # contract axis j of the data with the kernel matrix
            out = np.moveaxis(np.tensordot(K, out, axes=([1], [j])), 0, j)
        return out


def heat_apply(rs: RootSystem, field: ScalarField, t: float, x, *, method: str = "grid",
               tolerance: float = 1e-10, **kw):
    """``P_t f(x) = int h_t(x, y) f(y) dmu_k(y)``; ``P_0 f = f``.

    ``method="grid"`` uses :class:`HeatOperator`; ``method="adaptive"`` calls
    :func:`integrate_weighted` point by point (N <= 2), with mesh breaks at
    the radius and angles of the reflected images of ``x``.
    """
    _require_product(rs)
    if t < 0:
        raise NonpositiveTimeError("heat semigroup needs t >= 0")
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1 and x.size == rs.dimension
    pts = x.reshape(-1, rs.dimension)
    if t == 0:
        out = np.asarray(field(pts), dtype=float)
    elif method == "grid":
        out = HeatOperator(rs, t, **kw).apply(field, pts)
    elif method == "adaptive":
        out = np.array([_heat_adaptive(rs, field, t, p, tolerance) for p in pts])
    else:
        raise ValidationError(f"unknown method {method!r}")
    return float(out[0]) if single else out


def _heat_adaptive(rs, field, t, x, tolerance):
    dom = WeightedDomain.full_space(rs)
    r = float(np.linalg.norm(x))
    thetas = []
    if rs.dimension == 2:
        for sx in (-1, 1):
            for sy in (-1, 1):
                thetas.append(math.atan2(sy * x[1], sx * x[0]) % (2 * math.pi))
    spread = 12 * math.sqrt(t)
    breaks = [b for b in (r - spread, r - 3 * math.sqrt(t), r, r + 3 * math.sqrt(t), r + spread) if b > 0]
    extent = _field_extent(field)
    fd = field.decay
    if fd is not None and fd.kind == "power":
        # the kernel confines the integrand to a window around |x|
        radius = r + spread
        decay = None
    else:
        radius = None
        decay = fd
        if field.support_radius is not None:
            decay = Decay("compact", radius=field.support_radius)
    res = integrate_weighted(lambda y: heat_kernel(rs, t, np.broadcast_to(x, y.shape), y) * field(y),
                             dom, tolerance, decay=decay, radius=radius, r_breaks=breaks,
                             theta_breaks=thetas, abs_tolerance=1e-15)
    del extent
    return float(res.value)


def heat_field(rs: RootSystem, field: ScalarField, t: float, **kw) -> ScalarField:
    """``x -> P_t f(x)`` as a field (derivatives by finite differences)."""
    def ev(x):
        return heat_apply(rs, field, t, x, **kw)

    return ScalarField(ev, rs.dimension, name=f"P_{t:g}[{field.name}]", decay=None)


def sup_axes(rs: RootSystem, extent: float, n: int | None = None) -> list[np.ndarray]:
    """Per-axis sample points on ``[-extent, extent]`` (odd count, so the origin is included)."""
    if n is None:
        n = {1: 201, 2: 61}.get(rs.dimension, 21)
    if n % 2 == 0:
        n += 1
    return [np.linspace(-extent, extent, n)] * rs.dimension


def sup_grid(rs: RootSystem, extent: float, n: int | None = None) -> np.ndarray:
    """The tensor grid of :func:`sup_axes` as points of shape ``(M, N)``."""
    grids = np.meshgrid(*sup_axes(rs, extent, n), indexing="ij")
    return np.column_stack([g.ravel() for g in grids])


def heat_sup_norm(rs: RootSystem, field: ScalarField, t: float, axes=None, **kw) -> float:
    """Sampled ``sup_x |P_t f(x)|`` on a tensor grid."""
    if axes is None:
        ext = _field_extent(field, 1e-8)
        if not math.isfinite(ext):
            ext = 8.0
        axes = sup_axes(rs, ext)
    return float(np.max(np.abs(HeatOperator(rs, t, **kw).apply_grid(field, axes))))


def default_t_grid(points: int = 61) -> np.ndarray:
    return np.logspace(-3, 3, points)


def besov_norm(rs: RootSystem, field: ScalarField, s: float, t_grid=None, *,
               axes=None, **kw) -> float:
    """Grid supremum ``sup_t t^{-s/2} ||P_t f||_inf`` for ``s < 0``."""
    _require_product(rs)
    if not s < 0:
        raise ValidationError("Besov smoothness index must be negative")
    t_grid = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    best = 0.0
    for t in t_grid:
        best = max(best, t ** (-s / 2) * heat_sup_norm(rs, field, float(t), axes, **kw))
    return best


# -- Dunkl transform ------------------------------------------------------------------

def _transform_integrand(rs, field, xi):
    xi = np.atleast_2d(np.asarray(xi, dtype=float))

    def g(x):
        # E_k(-i xi, x) for each xi: coordinate j contributes E_{k_j}(-i xi_j x_j)
        e = np.ones((x.shape[0], xi.shape[0]), dtype=complex)
        for j, k in enumerate(rs.k):
            e = e * rank1_kernel(k).imaginary(-x[:, j][:, None] * xi[:, j][None, :])
        f = np.asarray(field(x), dtype=float)[:, None]
        v = f * e
        return np.concatenate([v.real, v.imag], axis=1)

    return g, xi.shape[0]


def dunkl_transform(rs: RootSystem, field: ScalarField, xi, tolerance: float = 1e-10):
    """``D_k f(xi) = M_k^{-1} int f(x) E_k(-i xi, x) dmu_k(x)``.

    ``xi`` may be a single point or a batch; returns complex values.
    """
    _require_product(rs)
    from .constants import macdonald_mehta

    xi_arr = np.asarray(xi, dtype=float)
    single = xi_arr.ndim <= 1 and xi_arr.size == rs.dimension
    xi2 = xi_arr.reshape(-1, rs.dimension)
    g, m = _transform_integrand(rs, field, xi2)
    res = integrate_weighted(g, WeightedDomain.full_space(rs), tolerance,
                             decay=field.decay if field.support_radius is None else Decay("compact", radius=field.support_radius),
                             abs_tolerance=1e-14)
    v = np.atleast_1d(res.value)
    out = (v[:m] + 1j * v[m:]) / macdonald_mehta(rs)
    return complex(out[0]) if single else out


def transform_l2_norm(rs: RootSystem, field: ScalarField, xi_radius: float,
                      tolerance: float = 1e-8) -> float:
    """``||D_k f||_2`` over ``|xi| <= xi_radius`` (N <= 2) by nested adaptive quadrature."""
    _require_product(rs)
    dom = WeightedDomain.ball(rs, xi_radius)

    def sq(xis):
        return np.abs(dunkl_transform(rs, field, xis, tolerance=tolerance * 1e-2)) ** 2

    return math.sqrt(integrate_weighted(sq, dom, tolerance).value)
