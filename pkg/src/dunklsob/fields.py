"""Scalar fields and pointwise Dunkl calculus.

A :class:`ScalarField` wraps a vectorized evaluator ``f(points) -> values`` with
``points`` of shape ``(M, N)``.  Analytic gradients and Hessians are optional;
missing ones fall back to central differences.  The Dunkl gradient, Dunkl
Laplacian and carré-du-champ are evaluated from the defining formulas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import ValidationError
from .rootsys import RootSystem

EPS = np.finfo(float).eps
WALL_TOL = 1e-8
# below this relative distance to a wall the difference quotients are computed
# by Gauss-Legendre quadrature along the reflection segment instead of by
# subtraction
_NEAR_WALL = 1e-3
_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


@dataclass(frozen=True)
class Decay:
    """How fast a field vanishes at infinity.

    ``kind`` is one of ``compact`` (zero outside ``radius``), ``gaussian``
    (bounded by ``C exp(-(|x| - radius)^2 / (2 scale^2))``) or ``power``
    (``|f| ~ |x|^{-power}``).
    """

    kind: str
    radius: float = 0.0
    scale: float = 1.0
    power: float = 0.0

    def times(self, other: "Decay") -> "Decay":
        kinds = {self.kind, other.kind}
        if "compact" in kinds:
            c = [d for d in (self, other) if d.kind == "compact"]
            return Decay("compact", radius=min(d.radius for d in c))
        if "gaussian" in kinds:
            g = [d for d in (self, other) if d.kind == "gaussian"]
            if len(g) == 2:
                s = 1.0 / math.sqrt(1 / g[0].scale ** 2 + 1 / g[1].scale ** 2)
                return Decay("gaussian", radius=max(g[0].radius, g[1].radius), scale=s)
            return g[0]
        return Decay("power", power=self.power + other.power)

    def power_of(self, p: float) -> "Decay":
        if self.kind == "gaussian":
            return Decay("gaussian", radius=self.radius, scale=self.scale / math.sqrt(p))
        if self.kind == "power":
            return Decay("power", power=self.power * p)
        return self

    def truncation_radius(self, tol: float) -> float:
        if self.kind == "compact":
            return self.radius
        if self.kind == "gaussian":
            return self.radius + self.scale * math.sqrt(2.0 * math.log(1.0 / tol))
        return math.inf


def _as_points(x, n: int) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        if n != 1:
            raise ValidationError(f"scalar point given for a field on R^{n}")
        return x.reshape(1, 1), True
    if x.ndim == 1:
        if x.shape[0] == n:
            return x.reshape(1, n), True
        if n == 1:
            return x.reshape(-1, 1), False
    if x.shape[-1] != n:
        raise ValidationError(f"points must have trailing dimension {n}, got {x.shape}")
    return x.reshape(-1, n), False


@dataclass(frozen=True)
class ScalarField:
    """A real function on R^N with optional analytic derivatives."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    dimension: int
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    support_radius: Optional[float] = None
    decay: Optional[Decay] = None
    name: str = "field"
    radial: bool = False
    meta: dict = field(default_factory=dict, compare=False)

    # -- evaluation --------------------------------------------------------
    def __call__(self, x):
        pts, single = _as_points(x, self.dimension)
        v = np.asarray(self.evaluator(pts), dtype=float).reshape(pts.shape[0])
        if self.support_radius is not None:
            v = np.where(np.linalg.norm(pts, axis=1) <= self.support_radius, v, 0.0)
        return float(v[0]) if single else v

    def grad(self, x) -> np.ndarray:
        pts, single = _as_points(x, self.dimension)
        if self.gradient is not None:
            g = np.asarray(self.gradient(pts), dtype=float).reshape(pts.shape)
        else:
            g = _fd_gradient(self, pts)
        return g[0] if single else g

    def hess(self, x) -> np.ndarray:
        pts, single = _as_points(x, self.dimension)
        n = self.dimension
        if self.hessian is not None:
            h = np.asarray(self.hessian(pts), dtype=float).reshape(pts.shape[0], n, n)
        else:
            h = _fd_hessian(self, pts)
        return h[0] if single else h

    def laplacian(self, x):
        h = self.hess(x)
        return np.trace(h, axis1=-2, axis2=-1)

    @property
    def has_analytic_derivatives(self) -> bool:
        return self.gradient is not None and self.hessian is not None

    # -- algebra -----------------------------------------------------------
    def __mul__(self, other: "ScalarField") -> "ScalarField":
        if isinstance(other, (int, float)):
            return self.scaled(float(other))
        return product(self, other)

    __rmul__ = __mul__

    def scaled(self, lam: float) -> "ScalarField":
        f = self
        return replace(
            self,
            evaluator=lambda x: lam * f(x),
            gradient=(lambda x: lam * f.grad(x)) if f.gradient else None,
            hessian=(lambda x: lam * f.hess(x)) if f.hessian else None,
            name=f"{lam:g}*{self.name}",
            meta={},
        )

    def squared(self) -> "ScalarField":
        return product(self, self)

    def dilated(self, lam: float) -> "ScalarField":
        """The field ``x -> f(lam x)``."""
        f = self
        dec = self.decay
        if dec is not None:
            dec = Decay(dec.kind, dec.radius / lam, dec.scale / lam, dec.power)
        return replace(
            self,
            evaluator=lambda x: f(lam * x),
            gradient=(lambda x: lam * f.grad(lam * x)) if f.gradient else None,
            hessian=(lambda x: lam * lam * f.hess(lam * x)) if f.hessian else None,
            support_radius=None if self.support_radius is None else self.support_radius / lam,
            decay=dec,
            name=f"{self.name}({lam:g}x)",
            meta={},
        )

    def transformed(self, g: np.ndarray) -> "ScalarField":
        """The field ``x -> f(g x)`` for an orthogonal matrix ``g``."""
        f = self
        g = np.asarray(g, dtype=float)
        return replace(
            self,
            evaluator=lambda x: f(x @ g.T),
            gradient=(lambda x: f.grad(x @ g.T) @ g) if f.gradient else None,
            hessian=(lambda x: np.einsum("ji,mjk,kl->mil", g, f.hess(x @ g.T), g)) if f.hessian else None,
            name=f"{self.name}∘g",
            meta={},
        )

    def without_derivatives(self) -> "ScalarField":
        return replace(self, gradient=None, hessian=None, name=self.name + "[fd]", meta={})


def _fd_gradient(f: ScalarField, pts: np.ndarray) -> np.ndarray:
    m, n = pts.shape
    h = EPS ** (1 / 3) * (1.0 + np.linalg.norm(pts, axis=1))
    out = np.empty((m, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        step = h[:, None] * e
        out[:, i] = (f(pts + step) - f(pts - step)) / (2 * h)
    return out


def _fd_hessian(f: ScalarField, pts: np.ndarray) -> np.ndarray:
    m, n = pts.shape
    h = EPS ** (1 / 4) * (1.0 + np.linalg.norm(pts, axis=1))
    out = np.empty((m, n, n))
    f0 = f(pts)
    eye = np.eye(n)
    for i in range(n):
        si = h[:, None] * eye[i]
        out[:, i, i] = (f(pts + si) - 2 * f0 + f(pts - si)) / h ** 2
        for j in range(i + 1, n):
            sj = h[:, None] * eye[j]
            v = (f(pts + si + sj) - f(pts + si - sj) - f(pts - si + sj) + f(pts - si - sj)) / (4 * h ** 2)
            out[:, i, j] = out[:, j, i] = v
    return out


def eval_gradient(field: ScalarField, point) -> np.ndarray:
    """Analytic gradient when available, central differences otherwise."""
    return field.grad(point)


def product(f: ScalarField, g: ScalarField) -> ScalarField:
    """Pointwise product with product-rule derivatives."""
    if f.dimension != g.dimension:
        raise ValidationError("fields live in different dimensions")

    def ev(x):
        return f(x) * g(x)

    def gr(x):
        return f(x)[:, None] * g.grad(x) + g(x)[:, None] * f.grad(x)

    def he(x):
        fv, gv = f(x), g(x)
        fg, gg = f.grad(x), g.grad(x)
        return (fv[:, None, None] * g.hess(x) + gv[:, None, None] * f.hess(x)
                + np.einsum("mi,mj->mij", fg, gg) + np.einsum("mi,mj->mij", gg, fg))

    analytic = f.gradient is not None and g.gradient is not None
    analytic_h = analytic and f.hessian is not None and g.hessian is not None
    sr = [r for r in (f.support_radius, g.support_radius) if r is not None]
    dec = None
    if f.decay is not None and g.decay is not None:
        dec = f.decay.times(g.decay)
    elif f.decay is not None or g.decay is not None:
        dec = f.decay or g.decay
    return ScalarField(ev, f.dimension, gr if analytic else None, he if analytic_h else None,
                       min(sr) if sr else None, dec, f"({f.name})*({g.name})",
                       f.radial and g.radial)


def abs_field(f: ScalarField) -> ScalarField:
    """``|f|`` with its almost-everywhere derivatives."""

    def ev(x):
        return np.abs(f(x))

    def gr(x):
        return np.sign(f(x))[:, None] * f.grad(x)

    def he(x):
        return np.sign(f(x))[:, None, None] * f.hess(x)

    return replace(f, evaluator=ev, gradient=gr if f.gradient else None,
                   hessian=he if f.hessian else None, name=f"|{f.name}|", meta={})


# -- built-in fields ---------------------------------------------------------

def gaussian(n: int, scale: float = 1.0, center=None, amplitude: float = 1.0) -> ScalarField:
    """``amplitude * exp(-|x - c|^2 / (2 scale^2))``."""
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float).reshape(n)
    s2 = scale * scale

    def ev(x):
        d = x - c
        return amplitude * np.exp(-np.einsum("mi,mi->m", d, d) / (2 * s2))

    def gr(x):
        return -(x - c) / s2 * ev(x)[:, None]

    def he(x):
        d = x - c
        v = ev(x)[:, None, None]
        return v * (np.einsum("mi,mj->mij", d, d) / s2 ** 2 - np.eye(n) / s2)

    radial = not np.any(c)
    if radial:
        name = "gaussian" if scale == 1.0 else f"gaussian(s={scale:g})"
    else:
        name = f"gaussian(c={c.tolist()},s={scale:g})"
    if amplitude != 1.0:
        name += f"*{amplitude:g}"
    return ScalarField(ev, n, gr, he, None, Decay("gaussian", float(np.linalg.norm(c)), scale),
                       name, radial)


def coordinate_times_gaussian(n: int, index: int = 0, scale: float = 1.0) -> ScalarField:
    """``x_i exp(-|x|^2 / (2 scale^2))``; odd under the reflection in ``e_i``."""
    g = gaussian(n, scale)
    e = np.zeros(n)
    e[index] = 1.0

    def ev(x):
        return x[:, index] * g(x)

    def gr(x):
        return e * g(x)[:, None] + x[:, index, None] * g.grad(x)

    def he(x):
        gg = g.grad(x)
        return (np.einsum("i,mj->mij", e, gg) + np.einsum("mi,j->mij", gg, e)
                + x[:, index, None, None] * g.hess(x))

    dec = Decay("gaussian", 0.0, scale * math.sqrt(1.5))
    return ScalarField(ev, n, gr, he, None, dec, "odd-gaussian" if index == 0 else f"x{index + 1}-gaussian")


def radial_field(n: int, g, dg, d2g, name: str, decay: Decay | None = None,
                 support_radius: float | None = None) -> ScalarField:
    """Field ``x -> g(|x|)`` from a profile and its first two derivatives."""

    def ev(x):
        return g(np.linalg.norm(x, axis=1))

    def gr(x):
        r = np.linalg.norm(x, axis=1)
        safe = np.where(r > 0, r, 1.0)
        return np.where((r > 0)[:, None], (dg(r) / safe)[:, None] * x, 0.0)

    def he(x):
        r = np.linalg.norm(x, axis=1)
        safe = np.where(r > 0, r, 1.0)
        u = x / safe[:, None]
        uu = np.einsum("mi,mj->mij", u, u)
        d1 = dg(r)
        d2 = d2g(r)
        with np.errstate(invalid="ignore", divide="ignore"):
            tang = np.where(r > 0, d1 / safe, d2)
        h = d2[:, None, None] * uu + tang[:, None, None] * (np.eye(n) - uu)
        at0 = r == 0
        if np.any(at0):
            h[at0] = d2[at0, None, None] * np.eye(n)
        return h

    return ScalarField(ev, n, gr, he, support_radius, decay, name, True)


def talenti_profile_field(n: int, a: float, b: float, p: float, d: float) -> ScalarField:
    """Radial field built from ``(a + b r^{p'})^{1 - d/p}``."""
    pp = p / (p - 1)
    e = 1 - d / p

    def g(r):
        return (a + b * r ** pp) ** e

    def dg(r):
        return e * (a + b * r ** pp) ** (e - 1) * b * pp * r ** (pp - 1)

    def d2g(r):
        u = a + b * r ** pp
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = e * (e - 1) * u ** (e - 2) * (b * pp * r ** (pp - 1)) ** 2
            t2 = e * u ** (e - 1) * b * pp * (pp - 1) * r ** (pp - 2)
        return np.where(r > 0, t1 + t2, e * a ** (e - 1) * b * 2.0 if pp == 2 else -np.inf)

    dec = Decay("power", power=-pp * e)
    return radial_field(n, g, dg, d2g, f"talenti(a={a:g},b={b:g},p={p:g},d={d:g})", dec)


def bump(n: int, center, radius: float, amplitude: float = 1.0) -> ScalarField:
    """Smooth compactly supported bump ``exp(1 - 1/(1 - |x-c|^2/rho^2))``."""
    c = np.asarray(center, dtype=float).reshape(n)
    rho2 = radius * radius

    def psi(s):
        inside = s < 1
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = np.where(inside, np.exp(1.0 - 1.0 / np.where(inside, 1.0 - s, 1.0)), 0.0)
        return amplitude * out

    def parts(x):
        d = x - c
        s = np.einsum("mi,mi->m", d, d) / rho2
        p0 = psi(s)
        om = np.where(s < 1, 1.0 - s, 1.0)
        p1 = -p0 / om ** 2
        p2 = p0 * (2 * s - 1) / om ** 4
        return d, p0, p1, p2

    def ev(x):
        return parts(x)[1]

    def gr(x):
        d, _, p1, _ = parts(x)
        return (2.0 / rho2) * p1[:, None] * d

    def he(x):
        d, _, p1, p2 = parts(x)
        return (4.0 / rho2 ** 2) * p2[:, None, None] * np.einsum("mi,mj->mij", d, d) \
            + (2.0 / rho2) * p1[:, None, None] * np.eye(n)

    reach = float(np.linalg.norm(c)) + radius
    return ScalarField(ev, n, gr, he, None, Decay("compact", reach),
                       f"bump(c={np.round(c, 6).tolist()},r={radius:g})", not np.any(c),
                       meta={"center": c, "radius": radius})


def smoothed_box(lo, hi, eps: float = 0.01) -> ScalarField:
    """Product of logistic steps approximating the indicator of ``[lo, hi]``."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    n = lo.size

    def sig(z):
        return 0.5 * (1.0 + np.tanh(0.5 * z))

    def factors(x):
        a = sig((x - lo) / eps)
        b = sig((hi - x) / eps)
        u = a * b
        da = a * (1 - a) / eps
        db = -b * (1 - b) / eps
        du = da * b + a * db
        d2a = da * (1 - 2 * a) / eps
        d2b = -db * (1 - 2 * b) / eps
        d2u = d2a * b + 2 * da * db + a * d2b
        return u, du, d2u

    def ev(x):
        return np.prod(factors(x)[0], axis=1)

    def gr(x):
        u, du, _ = factors(x)
        out = np.empty_like(x)
        for i in range(n):
            out[:, i] = du[:, i] * np.prod(np.delete(u, i, axis=1), axis=1)
        return out

    def he(x):
        u, du, d2u = factors(x)
        out = np.empty((x.shape[0], n, n))
        for i in range(n):
            for j in range(n):
                if i == j:
                    out[:, i, i] = d2u[:, i] * np.prod(np.delete(u, i, axis=1), axis=1)
                else:
                    rest = np.prod(np.delete(u, [i, j], axis=1), axis=1) if n > 2 else 1.0
                    out[:, i, j] = du[:, i] * du[:, j] * rest
        return out

    reach = float(np.linalg.norm(np.maximum(np.abs(lo), np.abs(hi)))) + 40 * eps
    return ScalarField(ev, n, gr, he, None, Decay("compact", reach),
                       f"box({lo.tolist()},{hi.tolist()},eps={eps:g})")


def gaussian_mixture(n: int, seed: int, count: int = 3, spread: float = 1.5) -> ScalarField:
    """Seeded sum of anisotropically placed Gaussians with mixed signs."""
    rng = np.random.default_rng(seed)
    amps = rng.uniform(0.4, 1.5, count) * np.where(rng.random(count) < 0.75, 1.0, -1.0)
    centers = rng.uniform(-spread, spread, (count, n))
    scales = rng.uniform(0.45, 1.2, count)
    parts = [gaussian(n, s, c, a) for a, s, c in zip(amps, scales, centers)]

    def ev(x):
        return sum(p(x) for p in parts)

    def gr(x):
        return sum(p.grad(x) for p in parts)

    def he(x):
        return sum(p.hess(x) for p in parts)

    reach = float(np.max(np.linalg.norm(centers, axis=1)))
    return ScalarField(ev, n, gr, he, None, Decay("gaussian", reach, float(np.max(scales))),
                       f"mixture(seed={seed},count={count})" if spread == 1.5
                       else f"mixture(seed={seed},count={count},spread={spread:g})",
                       meta={"amplitudes": amps, "centers": centers, "scales": scales})


def constant(n: int, value: float = 1.0, radius: float | None = None) -> ScalarField:
    return ScalarField(lambda x: np.full(x.shape[0], value), n,
                       lambda x: np.zeros_like(x), lambda x: np.zeros((x.shape[0], n, n)),
                       radius, Decay("compact", radius) if radius else None, f"const({value:g})", True)


def linear(n: int, coeffs) -> ScalarField:
    c = np.asarray(coeffs, dtype=float).reshape(n)
    return ScalarField(lambda x: x @ c, n, lambda x: np.broadcast_to(c, x.shape).copy(),
                       lambda x: np.zeros((x.shape[0], n, n)), None, None, f"linear({c.tolist()})")


def field_from_spec(text: str, rs: RootSystem) -> ScalarField:
    """Build a catalog field from a CLI-style name.

    ``gaussian``, ``polynomial-times-gaussian`` (alias ``odd-gaussian``),
    ``talenti:a,b,p,d``, ``bump:c1[,c2...],radius``, ``random-mixture:seed,count``,
    ``box:lo,hi[,eps]``, ``constant[:value[,radius]]``.  A bump with fewer centre coordinates than N is placed
    at that distance along an interior direction of the fundamental chamber.
    """
    n = rs.dimension
    name, _, args = text.partition(":")
    name = name.strip().lower()
    vals = [float(v) for v in args.split(",") if v.strip()] if args else []
    if name == "gaussian":
        return gaussian(n, vals[0] if vals else 1.0)
    if name in ("polynomial-times-gaussian", "odd-gaussian"):
        return coordinate_times_gaussian(n)
    if name == "talenti":
        a, b, p, d = (vals + [1.0, 1.0, 2.0, rs.effective_dimension][len(vals):])[:4]
        return talenti_profile_field(n, a, b, p, d)
    if name == "bump":
        if len(vals) < 2:
            raise ValidationError("bump needs centre and radius")
        *c, r = vals
        if len(c) == n:
            center = np.array(c)
        elif len(c) == 1:
            center = c[0] * rs.chamber_direction(rs.chambers[0])
        else:
            raise ValidationError(f"bump centre must have 1 or {n} coordinates")
        return bump(n, center, r)
    if name in ("random-mixture", "mixture"):
        seed = int(vals[0]) if vals else 0
        count = int(vals[1]) if len(vals) > 1 else 3
        return gaussian_mixture(n, seed, count)
    if name == "constant":
        value = vals[0] if vals else 1.0
        return constant(n, value, vals[1] if len(vals) > 1 else None)
    if name == "box":
        if n != 1 or len(vals) < 2:
            raise ValidationError("box:lo,hi[,eps] is available for N = 1")
        return smoothed_box(vals[0], vals[1], vals[2] if len(vals) > 2 else 0.01)
    raise ValidationError(f"unknown field {text!r}")


# -- Dunkl calculus ------------------------------------------------------------

@dataclass(frozen=True)
class DunklPointValues:
    classical_gradient: np.ndarray
    difference_parts: np.ndarray
    dunkl_gradient: np.ndarray
    dunkl_laplacian: np.ndarray
    gamma_value: np.ndarray


def _reflection_data(rs: RootSystem, pts: np.ndarray):
    a = pts @ rs.positive_roots.T  # (M, R)
    images = pts[:, None, :] - a[..., None] * rs.positive_roots[None, :, :]
    return a, images


def difference_quotients(rs: RootSystem, f: ScalarField, x) -> np.ndarray:
    """``(f(x) - f(sigma_a x)) / <a, x>`` for every positive root, shape ``(M, R)``.

    Close to a wall the quotient is the average of ``<grad f, a>`` along the
    segment from ``sigma_a x`` to ``x`` (its exact value), evaluated by
    Gauss-Legendre quadrature; without an analytic gradient the midpoint
    value is used inside ``WALL_TOL``.
    """
    pts, _ = _as_points(x, rs.dimension)
    m, nr = pts.shape[0], rs.n_positive
    a, images = _reflection_data(rs, pts)
    fx = f(pts)
    fimg = f(images.reshape(-1, rs.dimension)).reshape(m, nr)
    scale = 1.0 + np.linalg.norm(pts, axis=1)[:, None]
    near = np.abs(a) < (_NEAR_WALL if f.gradient is not None else WALL_TOL) * scale
    safe = np.where(near, 1.0, a)
    q = (fx[:, None] - fimg) / safe
    if np.any(near):
        mi, ri = np.nonzero(near)
        alpha = rs.positive_roots[ri]
        mid = 0.5 * (pts[mi] + images[mi, ri])
        if f.gradient is not None:
            # x(s) = mid + s * a/2 * alpha, s in [-1, 1]
            half = 0.5 * a[mi, ri]
            nodes = mid[:, None, :] + (half[:, None, None] * _GL_X[None, :, None]) * alpha[:, None, :]
            gv = f.grad(nodes.reshape(-1, rs.dimension)).reshape(len(mi), _GL_X.size, rs.dimension)
            q[mi, ri] = 0.5 * np.einsum("k,mkd,md->m", _GL_W, gv, alpha)
        else:
            q[mi, ri] = np.einsum("md,md->m", f.grad(mid), alpha)
    return q


def _laplacian_brackets(rs: RootSystem, f: ScalarField, pts: np.ndarray, q: np.ndarray) -> np.ndarray:
    """``<grad f, a>/<a,x> - (f(x) - f(sigma_a x))/<a,x>^2`` per root."""
    a, images = _reflection_data(rs, pts)
    g = f.grad(pts)
    ga = g @ rs.positive_roots.T
    scale = 1.0 + np.linalg.norm(pts, axis=1)[:, None]
    near = np.abs(a) < (_NEAR_WALL if f.hessian is not None else WALL_TOL) * scale
    safe = np.where(near, 1.0, a)
    br = (ga - q) / safe
    if np.any(near):
        mi, ri = np.nonzero(near)
        alpha = rs.positive_roots[ri]
        mid = 0.5 * (pts[mi] + images[mi, ri])
        if f.hessian is not None:
            # exact: (1/a^2) int_{-a/2}^{a/2} phi''(u) (u + a/2) du with phi(u) = f(mid + u alpha)
            half = 0.5 * a[mi, ri]
            u = half[:, None] * _GL_X[None, :]
            nodes = mid[:, None, :] + u[..., None] * alpha[:, None, :]
            h = f.hess(nodes.reshape(-1, rs.dimension)).reshape(len(mi), _GL_X.size, rs.dimension, rs.dimension)
            phi2 = np.einsum("md,mkde,me->mk", alpha, h, alpha)
            # u + a/2 = half (x + 1); du = half dx; divide by a^2 = 4 half^2
            br[mi, ri] = np.einsum("k,mk->m", _GL_W * (_GL_X + 1.0), phi2) / 4.0
        else:
            h = f.hess(mid)
            br[mi, ri] = 0.5 * np.einsum("md,mde,me->m", alpha, h, alpha)
    return br


def dunkl_point_values(rs: RootSystem, f: ScalarField, x) -> DunklPointValues:
    pts, single = _as_points(x, rs.dimension)
    g = f.grad(pts)
    q = difference_quotients(rs, f, pts)
    diff = (q * rs.k) @ rs.positive_roots
    lap = f.laplacian(pts) + 2.0 * (_laplacian_brackets(rs, f, pts, q) @ rs.k)
    gam = np.einsum("mi,mi->m", g, g) + (q * q) @ rs.k
    vals = DunklPointValues(g, diff, g + diff, lap, gam)
    if single:
        vals = DunklPointValues(g[0], diff[0], g[0] + diff[0], float(lap[0]), float(gam[0]))
    return vals


def difference_parts(rs: RootSystem, f: ScalarField, x) -> np.ndarray:
    pts, single = _as_points(x, rs.dimension)
    d = (difference_quotients(rs, f, pts) * rs.k) @ rs.positive_roots
    return d[0] if single else d


def dunkl_gradient(rs: RootSystem, f: ScalarField, x) -> np.ndarray:
    """``(T_1 f(x), ..., T_N f(x))``."""
    pts, single = _as_points(x, rs.dimension)
    t = f.grad(pts) + difference_parts(rs, f, pts)
    return t[0] if single else t


def dunkl_laplacian(rs: RootSystem, f: ScalarField, x):
    """Dunkl Laplacian via the classical Laplacian plus reflection terms."""
    pts, single = _as_points(x, rs.dimension)
    q = difference_quotients(rs, f, pts)
    lap = f.laplacian(pts) + 2.0 * (_laplacian_brackets(rs, f, pts, q) @ rs.k)
    return float(lap[0]) if single else lap


def carre_du_champ(rs: RootSystem, f: ScalarField, x):
    """``|grad f|^2 + sum_a k_a ((f(x) - f(sigma_a x)) / <a,x>)^2``."""
    pts, single = _as_points(x, rs.dimension)
    g = f.grad(pts)
    q = difference_quotients(rs, f, pts)
    gam = np.einsum("mi,mi->m", g, g) + (q * q) @ rs.k
    return float(gam[0]) if single else gam


def carre_du_champ_via_definition(rs: RootSystem, f: ScalarField, x):
    """``(Delta_k(f^2) - 2 f Delta_k f) / 2``, computed independently of the closed form."""
    pts, single = _as_points(x, rs.dimension)
    out = 0.5 * (dunkl_laplacian(rs, f.squared(), pts) - 2.0 * f(pts) * dunkl_laplacian(rs, f, pts))
    return float(out[0]) if single else out


def dunkl_gradient_norm(rs: RootSystem, f: ScalarField, x):
    t = dunkl_gradient(rs, f, x)
    return np.linalg.norm(t, axis=-1)
