"""Symmetric decreasing rearrangement on a Weyl chamber with respect to mu_k.

A set ``Omega`` in a chamber is replaced by the chamber ball with the same
measure, and a function by the radial nonincreasing ``f*`` with the same
distribution function.  Since ``mu_k(B_r^eps) = p(B_1^eps) r^d / d``, the
radius attached to a mass ``m`` is ``(d m / p(B_1^eps))^{1/d}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from .constants import RadialProfile, chamber_sphere_constant
from .errors import NegativeMassError, UnboundedFieldError, ValidationError
from .fields import ScalarField, radial_field
from .quadrature import WeightedDomain, _rule, level_set_measure, sup_norm
from .rootsys import ChamberSign, RootSystem

DEFAULT_LEVELS = 300
LEVEL_FLOOR = 1e-12


@dataclass(frozen=True)
class DistributionFunction:
    """Level-set masses ``mu_k({x in chamber : |f(x)| > t})`` at decreasing levels."""

    levels: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.levels) > 0):
            raise ValidationError("levels must be decreasing")


def _as_chamber(chamber) -> ChamberSign:
    return ChamberSign.parse(chamber) if isinstance(chamber, str) else chamber


def set_rearrangement(rs: RootSystem, chamber, mass: float) -> float:
    """Radius ``r`` of the chamber ball ``B_r^eps`` with ``mu_k(B_r^eps) = mass``."""
    if mass < 0:
        raise NegativeMassError("mass must be nonnegative")
    chamber = _as_chamber(chamber)
    if chamber not in rs.chambers:
        raise ValidationError(f"{chamber} does not label a Weyl chamber")
    d = rs.effective_dimension
    return (d * mass / chamber_sphere_constant(rs)) ** (1.0 / d)


def default_levels(fmax: float, count: int = DEFAULT_LEVELS, floor: float = LEVEL_FLOOR) -> np.ndarray:
    """Decreasing levels: ``count`` log-spaced in ``[floor, 1) fmax`` plus ``count/2`` linear ones."""
    log = np.logspace(math.log10(floor), 0.0, count, endpoint=False)
    lin = np.linspace(0.0, 1.0, count // 2 + 1, endpoint=False)[1:]
    return np.unique(np.concatenate([log, lin]))[::-1] * fmax


def _chamber_domain(rs: RootSystem, field: ScalarField, chamber: ChamberSign) -> WeightedDomain:
    if field.support_radius is not None:
        return WeightedDomain.chamber_ball(rs, chamber, field.support_radius)
    return WeightedDomain.in_chamber(rs, chamber)


def distribution_function(rs: RootSystem, field: ScalarField, chamber, levels) -> DistributionFunction:
    chamber = _as_chamber(chamber)
    levels = np.sort(np.asarray(levels, dtype=float))[::-1]
    masses = level_set_measure(field, levels, _chamber_domain(rs, field, chamber))
    # enforce monotonicity lost to rounding
    masses = np.maximum.accumulate(np.maximum(masses, 0.0))
    return DistributionFunction(levels, masses)


@dataclass(frozen=True)
class Rearrangement:
    """Result of :func:`decreasing_rearrangement`."""

    root_system: RootSystem
    chamber: ChamberSign
    profile: RadialProfile
    distribution: DistributionFunction
    sup: float
    outer_radius: float

    def field(self) -> ScalarField:
        """``f*`` on the chamber as a field (zero outside the chamber)."""
        rs = self.root_system
        signs = np.array(self.chamber.signs)
        prof = self.profile
        inner = radial_field(rs.dimension, prof.evaluator, prof.derivative,
                             lambda r: np.zeros_like(r), "rearranged")

        def mask(x):
            s = np.sign(x @ rs.positive_roots.T)
            return np.all((s == signs) | (s == 0), axis=1)

        def ev(x):
            return np.where(mask(x), inner(x), 0.0)

        def gr(x):
            return np.where(mask(x)[:, None], inner.grad(x), 0.0)

        return ScalarField(ev, rs.dimension, gr, None, self.outer_radius, None, "rearranged")

    def _pieces(self):
        """Monotone interpolants of ``mu(f* > t)`` and ``rho(t)`` in two level variables.

        Below ``sup/2`` the variable is ``u = log t``; above it ``v = sqrt(1 - t/sup)``,
        in which the masses near a nondegenerate maximum are smooth.
        Returns ``(knots, t(x), dt/dx, m(x), rho(x))`` per piece.
        """
        dist = self.distribution
        d = self.root_system.effective_dimension
        pe = chamber_sphere_constant(self.root_system)
        top = self.sup
        lev = np.append(dist.levels[dist.levels > 0], top)
        mas = np.append(dist.masses[dist.levels > 0], 0.0)
        order = np.argsort(lev)
        lev, mas = lev[order], mas[order]
        keep = np.concatenate([np.diff(lev) > 0, [True]])
        lev, mas = lev[keep], mas[keep]
        half = 0.5 * top
        out = []
        lo = lev <= half * (1 + 1e-12)
        hi = lev >= half * (1 - 1e-12)
        if np.count_nonzero(lo) >= 2:
            x = np.log(lev[lo])
            out.append((x, np.exp, np.exp, mas[lo]))
        if np.count_nonzero(hi) >= 2:
            x = np.sqrt(np.maximum(1 - lev[hi] / top, 0.0))[::-1]

            def t_of(v):
                return top * (1 - v * v)

            def dt_of(v):
                return -2 * top * v

            out.append((x, t_of, dt_of, mas[hi][::-1]))
        pieces = []
        for x, t_of, dt_of, m in out:
            rho = (d * m / pe) ** (1.0 / d)
            pieces.append((x, t_of, dt_of, PchipInterpolator(x, m), PchipInterpolator(x, rho)))
        return pieces

    @staticmethod
    def _integrate(x, g) -> float:
        s, w = _rule(8, 0.0, 0.0)
        a, b = x[:-1], x[1:]
        xx = (a[:, None] + (b - a)[:, None] * s[None, :]).ravel()
        wt = ((b - a)[:, None] * w[None, :]).ravel()
        return float(np.sum(wt * g(xx)))

    def lp_norm(self, p: float) -> float:
        """``||f*||_p`` by the layer-cake formula ``int_0^sup p t^{p-1} mu(f* > t) dt``."""
        if self.sup == 0:
            return 0.0
        total = 0.0
        for x, t_of, dt_of, m, _ in self._pieces():
            total += self._integrate(x, lambda z: p * t_of(z) ** (p - 1) * np.abs(dt_of(z)) * m(z))
        return total ** (1.0 / p)

    def gradient_lp_norm(self, p: float) -> float:
        """``||grad f*||_p`` written in the level variable.

        With ``r = rho(t)`` one has ``|f*'(r)| = 1/|rho'(t)|`` and
        ``int |f*'|^p r^{d-1} dr = int |rho'(t)|^{1-p} rho(t)^{d-1} dt``.
        """
        if self.sup == 0:
            return 0.0
        d = self.root_system.effective_dimension
        pe = chamber_sphere_constant(self.root_system)
        total = 0.0
        for x, t_of, dt_of, _, rho in self._pieces():
            drho = rho.derivative()

            def g(z):
                jac = np.abs(dt_of(z))
                with np.errstate(divide="ignore", invalid="ignore"):
                    rp = np.abs(drho(z)) / jac
                    val = rp ** (1 - p) * rho(z) ** (d - 1) * jac
                return np.nan_to_num(val, nan=0.0)

            total += self._integrate(x, g)
        return (pe * total) ** (1.0 / p)


def decreasing_rearrangement(rs: RootSystem, field: ScalarField, chamber, level_grid=None, *,
                             count: int = DEFAULT_LEVELS) -> Rearrangement:
    """Symmetric decreasing rearrangement ``f*`` of ``f`` restricted to a chamber.

    Masses of the level sets are converted to radii ``rho(t)``; ``f*`` is the
    monotone cubic (PCHIP) interpolant through ``(rho(t), t)``, completed by
    ``(0, sup|f|)`` and by the radius of the support, where ``f*`` vanishes.
    The derivative of that interpolant gives ``|grad f*|``.
    """
    chamber = _as_chamber(chamber)
    if chamber not in rs.chambers:
        raise ValidationError(f"{chamber} does not label a Weyl chamber")
    if field.decay is not None and field.decay.kind == "power" and field.support_radius is None:
        raise UnboundedFieldError("rearrangement needs compact support or Gaussian decay")
    dom = _chamber_domain(rs, field, chamber)
    fmax = sup_norm(field, dom)
    if not math.isfinite(fmax):
        raise UnboundedFieldError("field is unbounded on the chamber")
    if fmax == 0:
        zero = RadialProfile(lambda r: np.zeros_like(r), lambda r: np.zeros_like(r), "zero",
                             np.zeros(1), np.zeros(1))
        return Rearrangement(rs, chamber, zero, DistributionFunction(np.zeros(1), np.zeros(1)), 0.0, 0.0)
    levels = default_levels(fmax, count) if level_grid is None else np.sort(np.asarray(level_grid))[::-1]
    base = fmax * 1e-12
    # levels just below the maximum resolve a plateau of f at its top value
    near_top = fmax * (1 - 10.0 ** -np.arange(3, 10))
    dist = distribution_function(rs, field, chamber, np.concatenate([levels, near_top, [0.5 * fmax, base]]))
    d = rs.effective_dimension
    pe = chamber_sphere_constant(rs)
    rho = (d * dist.masses / pe) ** (1.0 / d)
    radii = np.concatenate([[0.0], rho[:-1], [rho[-1]]])
    vals = np.concatenate([[fmax], dist.levels[:-1], [0.0]])
    # radii increase as levels decrease; drop repeats (jumps of f*)
    order = np.argsort(radii, kind="stable")
    radii, vals = radii[order], vals[order]
    keep = np.concatenate([[True], np.diff(radii) > 1e-14 * max(1.0, radii[-1])])
    radii, vals = radii[keep], vals[keep]
    vals = np.minimum.accumulate(vals)
    interp = PchipInterpolator(radii, vals, extrapolate=False)
    dinterp = interp.derivative()
    outer = float(radii[-1])

    def ev(r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= outer, np.nan_to_num(interp(np.minimum(r, outer))), 0.0)

    def der(r):
        r = np.asarray(r, dtype=float)
        return np.where(r < outer, np.nan_to_num(dinterp(np.minimum(r, outer))), 0.0)

    prof = RadialProfile(ev, der, f"rearrangement of {field.name}", radii, vals)
    return Rearrangement(rs, chamber, prof, dist, fmax, outer)
