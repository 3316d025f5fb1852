"""Closed-form constants attached to a root system and multiplicity.

All quantities depend on the effective dimension ``d = N + 2 gamma``, the
group order ``|G|`` and the Macdonald-Mehta integral

    M_k = int exp(-|x|^2 / 2) w_k(x) dx,

computed here in closed form.  Roots are normalized to ``|alpha|^2 = 2``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import minimize_scalar
from scipy.special import betaln, gammaln

from .errors import DivergentIntegralError, ParameterRangeError, UnsupportedRootSystemError
from .rootsys import Family, RootSystem


# -- Macdonald-Mehta ----------------------------------------------------------------

def macdonald_mehta_product(rs: RootSystem) -> float:
    """The product ``(2 pi)^{N/2} prod_{alpha > 0} Gamma(2 k_alpha + 1) / Gamma(k_alpha + 1)``.

    This equals ``M_k`` for product systems ``Z_2^N`` but not in general
    (for A2 with ``k = 1`` it gives ``16 pi`` while ``M_k = 24 pi``).
    Use :func:`macdonald_mehta` for the actual integral.
    """
    k = rs.k
    return float((2 * math.pi) ** (rs.dimension / 2) * np.exp(np.sum(gammaln(2 * k + 1) - gammaln(k + 1))))


def _rho_formula(roots: np.ndarray, k: np.ndarray) -> float:
    """Macdonald's formula for a crystallographic system with its natural root lengths.

    ``prod_alpha Gamma(1 + k_alpha + <rho_k, alpha^v>) / Gamma(1 + <rho_k, alpha^v>)``
    with ``rho_k = (1/2) sum k_alpha alpha``.  The value equals the Gaussian
    integral of the weight built from the same roots normalized to ``|alpha|^2 = 2``.
    """
    rho = 0.5 * (k[:, None] * roots).sum(axis=0)
    log = 0.0
    for a, ka in zip(roots, k):
        h = float(rho @ (2 * a / (a @ a)))
        log += gammaln(1 + ka + h) - gammaln(1 + h)
    return math.exp(log)


def _degrees(rs: RootSystem) -> tuple[int, ...] | None:
    fam = rs.family
    if fam is Family.A2:
        return (2, 3)
    if fam is Family.B2:
        return (2, 4)
    if fam is Family.DIHEDRAL_M:
        return (2, int(rs.params["m"]))
    return None


def macdonald_mehta(rs: RootSystem) -> float:
    """The Macdonald-Mehta integral ``M_k`` in closed form.

    Product systems use the product over roots.  With a single multiplicity
    value the degree formula ``(2 pi)^{N/2} prod_j Gamma(1 + k d_j) / Gamma(1 + k)``
    applies.  Two-orbit B2 and I2(6) use Macdonald's ``rho_k`` formula for B2
    and G2.  Remaining two-dimensional cases fall back to adaptive quadrature.
    """
    n = rs.dimension
    pref = (2 * math.pi) ** (n / 2)
    if rs.is_trivial:
        return pref
    if rs.is_product:
        return macdonald_mehta_product(rs)
    k = rs.k
    degs = _degrees(rs)
    if degs is not None and np.allclose(k, k[0]):
        k0 = float(k[0])
        return float(pref * math.exp(sum(gammaln(1 + k0 * dj) - gammaln(1 + k0) for dj in degs)))
    m = rs.params.get("m") if rs.family is Family.DIHEDRAL_M else None
    if rs.family is Family.B2 or m == 4:
        return pref * _rho_formula(_with_lengths(rs, math.sqrt(2.0)), k)
    if m == 6:
        return pref * _rho_formula(_with_lengths(rs, math.sqrt(3.0)), k)
    if n <= 2:
        from .fields import gaussian
        from .quadrature import WeightedDomain, integrate_weighted

        return float(integrate_weighted(gaussian(n), WeightedDomain.full_space(rs), 1e-13).value)
    raise UnsupportedRootSystemError("no closed form for M_k on this root system")


def _with_lengths(rs: RootSystem, ratio: float) -> np.ndarray:
    """Roots rescaled to crystallographic lengths: one orbit of length 1, the other ``ratio``.

    For B2 the orbit labelled ``short`` is kept short; for dihedral systems
    either choice gives the same integral (the orbits are exchanged by a rotation).
    """
    labels = list(rs.orbit)
    short = "short" if "short" in labels else labels[0]
    scale = np.array([1.0 if lab == short else ratio for lab in labels]) / math.sqrt(2.0)
    return rs.positive_roots * scale[:, None]


def group_order(rs: RootSystem) -> int:
    """``|G|``, taken as 1 when there are no roots or every multiplicity vanishes.

    With ``k = 0`` the weight is 1 and chambers play no role, so the
    chamber constants reduce to whole-space ones.
    """
    if rs.is_trivial:
        return 1
    return rs.group.order


# -- sphere and ball -----------------------------------------------------------------

def sphere_constant(rs: RootSystem) -> float:
    """``p(B_1) = int_{S^{N-1}} w_k dsigma = M_k / (2^{d/2 - 1} Gamma(d/2))``."""
    d = rs.effective_dimension
    return macdonald_mehta(rs) / (2 ** (d / 2 - 1) * math.gamma(d / 2))


def chamber_sphere_constant(rs: RootSystem) -> float:
    """Per-chamber constant ``p(B_1^eps) = p(B_1) / |G|``."""
    return sphere_constant(rs) / rs.group.order


def ball_measure(rs: RootSystem, radius: float = 1.0) -> float:
    """``mu_k(B_R) = p(B_1) R^d / d``."""
    d = rs.effective_dimension
    return sphere_constant(rs) * radius ** d / d


# -- Sobolev-type constants --------------------------------------------------------------

def _check_p(p: float, d: float):
    if not 1 < p < d:
        raise ParameterRangeError(f"need 1 < p < d = {d:g}, got p = {p:g}")


def sobolev_exponent(p: float, d: float) -> float:
    return p * d / (d - p)


def talenti_bound(d: float, p: float) -> float:
    """Sharp bound ``d^{-1/p} ((p-1)/(d-p))^{1/p'} [B(d/p, d/p') / p']^{-1/d}`` for the radial quotient."""
    _check_p(p, d)
    pc = p / (p - 1)
    log = (-math.log(d) / p + math.log((p - 1) / (d - p)) / pc
           - (betaln(d / p, d / pc) - math.log(pc)) / d)
    return math.exp(log)


@dataclass(frozen=True)
class RadialProfile:
    """A function of the radius with its derivative."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    description: str
    radii: np.ndarray | None = None
    values: np.ndarray | None = None

    def __call__(self, r):
        return self.evaluator(np.asarray(r, dtype=float))


def extremal_profile(d: float, p: float, a: float = 1.0, b: float = 1.0) -> RadialProfile:
    """Talenti extremal ``phi(r) = (a + b r^{p'})^{1 - d/p}``."""
    _check_p(p, d)
    if not (a > 0 and b > 0):
        raise ParameterRangeError(f"need a, b > 0, got a = {a:g}, b = {b:g}")
    pc = p / (p - 1)
    e = 1 - d / p

    def ev(r):
        return (a + b * np.abs(r) ** pc) ** e

    def der(r):
        r = np.abs(r)
        return e * (a + b * r ** pc) ** (e - 1) * b * pc * r ** (pc - 1)

    return RadialProfile(ev, der, f"talenti(d={d:g},p={p:g},a={a:g},b={b:g})")


def _radial_moment(fn: Callable[[float], float], d: float) -> float:
    # int_0^inf fn(r) r^{d-1} dr, split at 1 so both pieces are handled by QUADPACK
    opts = dict(epsabs=0.0, epsrel=1e-13, limit=400)
    with warnings.catch_warnings():
        # divergence is diagnosed below
        warnings.simplefilter("ignore", IntegrationWarning)
        head = quad(lambda r: fn(r) * r ** (d - 1), 0.0, 1.0, **opts)[0]
        # r = 1/u on the tail keeps the integrand on a bounded interval
        tail = quad(lambda u: fn(1.0 / u) * u ** (-d - 1) if u > 0 else 0.0, 0.0, 1.0, **opts)[0]
    total = head + tail
    # r^d fn(r) must decay for the tail to converge
    near, far = fn(1e6) * 1e6 ** d, fn(1e12) * 1e12 ** d
    if not math.isfinite(total) or (far > 0 and (far >= near or far > 1e-3 * total)):
        raise DivergentIntegralError("radial moment does not converge")
    return total


def talenti_functional(profile, d: float, p: float) -> float:
    """Radial Sobolev quotient ``J(g) = (int g^q r^{d-1})^{1/q} / (int |g'|^p r^{d-1})^{1/p}``.

    Parameters
    ----------
    profile : RadialProfile or (callable, callable)
        The profile ``g`` and its derivative.
    d, p : float
        Dimension and exponent, ``1 < p < d``; ``q = pd / (d - p)``.
    """
    _check_p(p, d)
    g, dg = (profile.evaluator, profile.derivative) if isinstance(profile, RadialProfile) else profile
    q = sobolev_exponent(p, d)
    num = _radial_moment(lambda r: abs(float(g(np.float64(r)))) ** q, d)
    den = _radial_moment(lambda r: abs(float(dg(np.float64(r)))) ** p, d)
    if den == 0:
        raise DivergentIntegralError("profile has zero gradient norm")
    return num ** (1 / q) / den ** (1 / p)


def weyl_constant(rs: RootSystem, p: float) -> float:
    """Best constant ``C_W`` of ``||f||_q <= C ||grad f||_p`` on a Weyl chamber.

    Evaluated from the closed formula with ``|G|``, ``M_k`` and Gamma factors.
    """
    d = rs.effective_dimension
    _check_p(p, d)
    pc = p / (p - 1)
    G = group_order(rs)
    log_bracket = ((d / 2 - 1) * math.log(2) + math.log(pc) + math.log(G) - math.log(macdonald_mehta(rs))
                   + gammaln(d) + gammaln(d / 2) - gammaln(d / p) - gammaln(d / pc))
    return (d ** (-1 / p) * ((p - 1) / (d - p)) ** (1 / pc)) * math.exp(log_bracket / d)


def weyl_constant_via_sphere(rs: RootSystem, p: float) -> float:
    """``C_W`` as ``p(B_1^eps)^{1/q - 1/p} * talenti_bound(d, p)``."""
    d = rs.effective_dimension
    q = sobolev_exponent(p, d)
    pe = sphere_constant(rs) / group_order(rs)
    return pe ** (1 / q - 1 / p) * talenti_bound(d, p)


def classical_constant(rs: RootSystem, p: float = 2.0) -> float:
    """``C_CS``, the sharp constant of ``||f||_q <= C ||grad f||_p`` on ``R^N``; equal to ``C_W``."""
    return weyl_constant(rs, p)


def dunkl_constant_bounds(rs: RootSystem) -> tuple[float, float]:
    """Lower and upper bounds for the best constant of ``||f||_q <= C ||grad_k f||_2``.

    ``lower = sqrt(2/(d(d-2))) [Gamma(d) / (M_k Gamma(d/2))]^{1/d}`` and the
    upper bound carries an extra ``|G|`` inside the bracket.
    """
    d = rs.effective_dimension
    if not d > 2:
        raise ParameterRangeError(f"need d = N + 2 gamma > 2, got {d:g}")
    base = math.sqrt(2 / (d * (d - 2)))
    log = gammaln(d) - math.log(macdonald_mehta(rs)) - gammaln(d / 2)
    lower = base * math.exp(log / d)
    upper = base * math.exp((log + math.log(group_order(rs))) / d)
    return lower, upper


# -- Nash ------------------------------------------------------------------------

def nash_constant(rs: RootSystem) -> float:
    """Constant ``C`` in ``||f||_2^{1 + 2/d} <= C ||grad_k f||_2 ||f||_1^{2/d}``.

    Obtained by minimizing ``A/R^2 + B R^d`` over ``R`` with ``A = ||grad_k f||_2^2``
    and ``B = p(B_1) ||f||_1^2 / (d M_k^2)``.  The minimum is
    ``((d+2)/d) (d/2)^{2/(d+2)} A^{d/(d+2)} B^{2/(d+2)}``, which after taking the
    ``(d+2)/(2d)`` power gives the closed form below.
    """
    d = rs.effective_dimension
    M = macdonald_mehta(rs)
    return (((d + 2) / d) ** ((d + 2) / (2 * d)) * (d / 2) ** (1 / d)
            * (sphere_constant(rs) / (d * M * M)) ** (1 / d))


def nash_bound_numeric(A: float, B: float, d: float) -> float:
    """``(min_R A/R^2 + B R^d)^{(d+2)/(2d)}`` by bounded 1-D minimization in ``log R``.

    Used to cross-check :func:`nash_constant`; with ``A = 1`` and ``B = b``
    the value equals ``C * b^{1/d}`` times the normalization of the closed form.
    """
    def obj(s):
        R = math.exp(s)
        return A / R ** 2 + B * R ** d

    r_opt = math.log((2 * A / (d * B)) ** (1 / (d + 2)))
    res = minimize_scalar(obj, bounds=(r_opt - 5, r_opt + 5), method="bounded",
                          options={"xatol": 1e-12})
    return res.fun ** ((d + 2) / (2 * d))


def nash_bound_closed(A: float, B: float, d: float) -> float:
    """Closed form of :func:`nash_bound_numeric`."""
    m = ((d + 2) / d) * (d / 2) ** (2 / (d + 2)) * A ** (d / (d + 2)) * B ** (2 / (d + 2))
    return m ** ((d + 2) / (2 * d))


def sobolev_from_nash(rs: RootSystem, nash_c: float | None = None) -> float:
    """Sobolev constant ``2^{1/(2p-1)} (2^q - 1)^{1/q} C_nash`` with ``p = d/(d+2)``, ``q = 2d/(d-2)``.

    Valid but not sharp; for ``d = 3`` the prefactor is ``2^5 * 63^{1/6}``.
    """
    d = rs.effective_dimension
    if not d > 2:
        raise ParameterRangeError(f"need d > 2, got {d:g}")
    if nash_c is None:
        nash_c = nash_constant(rs)
    p = d / (d + 2)
    q = 2 * d / (d - 2)
    return 2 ** (1 / (2 * p - 1)) * (2 ** q - 1) ** (1 / q) * nash_c


# -- carre du champ -------------------------------------------------------------------

def gamma_bound_constant(rs: RootSystem) -> float:
    """``C = (C~/sqrt|R+|) / (1 + C~/sqrt|R+|)`` with ``C~ = min 1/(2 k_alpha)``.

    Gives ``Gamma(f) >= C |grad_k f|^2``.  Roots with ``k = 0`` are ignored
    and ``C = 1`` when ``k = 0`` everywhere.
    """
    k = rs.k[rs.k > 0]
    if k.size == 0:
        return 1.0
    c = (1.0 / (2 * k.max())) / math.sqrt(rs.n_positive)
    return c / (1 + c)


def sharp_gamma_bound_constant(rs: RootSystem) -> float:
    """Largest ``C`` with ``Gamma(f) >= C |grad_k f|^2`` for all ``f``: ``1 / (1 + lambda_max)``.

    Here ``lambda_max`` is the top eigenvalue of ``sum_alpha k_alpha alpha alpha^T``.
    Writing ``grad_k f = grad f + sum_alpha k_alpha q_alpha alpha`` the ratio
    is extremal when the quotients ``q_alpha`` are aligned with the top
    eigenvector, which the values of ``f`` at reflected points can realize.
    """
    if rs.is_trivial:
        return 1.0
    R = rs.positive_roots
    M = (rs.k[:, None, None] * R[:, :, None] * R[:, None, :]).sum(axis=0)
    return 1.0 / (1.0 + float(np.linalg.eigvalsh(M)[-1]))


# -- report -----------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantsReport:
    gamma: float
    effective_dimension: float
    macdonald_mehta: float
    sphere_constant: float
    nash_constant: float
    sobolev_from_nash: float | None
    talenti_bound: float | None
    weyl_constant: float | None
    classical_constant: float | None
    dunkl_lower: float | None
    dunkl_upper: float | None
    gamma_bound_constant: float
    p: float = 2.0

    def to_dict(self) -> dict:
        return asdict(self)


def constants_report(rs: RootSystem, p: float = 2.0) -> ConstantsReport:
    """Every constant for ``rs``; entries outside their parameter range are ``None``."""
    d = rs.effective_dimension

    def opt(fn, *a):
        try:
            return fn(*a)
        except ParameterRangeError:
            return None

    lo_hi = opt(dunkl_constant_bounds, rs)
    return ConstantsReport(
        gamma=rs.gamma,
        effective_dimension=d,
        macdonald_mehta=macdonald_mehta(rs),
        sphere_constant=sphere_constant(rs),
        nash_constant=nash_constant(rs),
        sobolev_from_nash=opt(sobolev_from_nash, rs),
        talenti_bound=opt(talenti_bound, d, p),
        weyl_constant=opt(weyl_constant, rs, p),
        classical_constant=opt(classical_constant, rs, p),
        dunkl_lower=lo_hi[0] if lo_hi else None,
        dunkl_upper=lo_hi[1] if lo_hi else None,
        gamma_bound_constant=gamma_bound_constant(rs),
        p=p,
    )
