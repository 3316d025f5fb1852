"""Root systems, reflection groups, Weyl chambers and the Dunkl weight."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    ClosureOverflowError,
    NegativeMultiplicityError,
    NonClosedSystemError,
    OnWallError,
    ValidationError,
    ZeroRootError,
)

ROOT_NORM_TOL = 1e-12
CLOSURE_TOL = 1e-9
DEFAULT_GROUP_CAP = 1024

# generic direction used to pick a fundamental chamber; irrational ratios keep
# it off every wall of the built-in families
_GENERIC = np.array([1.0, math.sqrt(2) / 7, math.pi / 41, math.e / 97, 0.31415926, 0.0271828])


class Family(str, Enum):
    A1_PRODUCT = "A1_PRODUCT"
    A2 = "A2"
    B2 = "B2"
    DIHEDRAL_M = "DIHEDRAL_M"
    CUSTOM = "CUSTOM"


def reflect(root, point):
    """Reflect ``point`` (shape ``(..., N)``) in the hyperplane orthogonal to ``root``."""
    root = np.asarray(root, dtype=float)
    nn = float(root @ root)
    if nn == 0.0:
        raise ZeroRootError("cannot reflect in a zero root")
    point = np.asarray(point, dtype=float)
    coef = 2.0 * (point @ root) / nn
    return point - coef[..., None] * root if np.ndim(coef) else point - coef * root


def reflection_matrix(root) -> np.ndarray:
    root = np.asarray(root, dtype=float)
    nn = float(root @ root)
    if nn == 0.0:
        raise ZeroRootError("cannot reflect in a zero root")
    return np.eye(root.size) - 2.0 * np.outer(root, root) / nn


@dataclass(frozen=True)
class ReflectionGroup:
    elements: np.ndarray  # (|G|, N, N)

    @property
    def order(self) -> int:
        return int(self.elements.shape[0])

    def __len__(self):
        return self.order

    def __iter__(self):
        return iter(self.elements)


@dataclass(frozen=True)
class ChamberSign:
    """Sign pattern ``eps(alpha) = sgn <alpha, x>`` over the positive roots."""

    signs: tuple[int, ...]

    def __str__(self):
        return "".join("+" if s > 0 else "-" for s in self.signs)

    @classmethod
    def parse(cls, text: str) -> "ChamberSign":
        text = text.strip()
        if not text or any(c not in "+-" for c in text):
            raise ValidationError(f"bad chamber label {text!r}")
        return cls(tuple(1 if c == "+" else -1 for c in text))


def _group_key(m: np.ndarray) -> tuple:
    return tuple(np.round(m.ravel(), 8) + 0.0)


def _close(generators: Sequence[np.ndarray], cap: int) -> list[np.ndarray]:
    n = generators[0].shape[0]
    found = {_group_key(np.eye(n)): np.eye(n)}
    frontier = [np.eye(n)]
    while frontier:
        new = []
        for g in frontier:
            for s in generators:
                h = s @ g
                key = _group_key(h)
                if key not in found:
                    found[key] = h
                    new.append(h)
                    if len(found) > cap:
                        raise ClosureOverflowError(
                            f"group closure exceeded {cap} elements; the root system is probably not finite"
                        )
        frontier = new
    return [found[k] for k in sorted(found)]


@dataclass(frozen=True)
class RootSystem:
    """A reduced root system with positive subsystem and multiplicity function.

    Roots are stored normalized to squared length 2.  ``orbit`` gives, for each
    positive root, the label of its group orbit; ``multiplicity`` maps orbit
    labels to the values ``k_alpha``.
    """

    dimension: int
    positive_roots: np.ndarray
    orbit: tuple[str, ...]
    multiplicity: Mapping[str, float]
    family: Family = Family.CUSTOM
    params: Mapping[str, int] = field(default_factory=dict)
    group_cap: int = DEFAULT_GROUP_CAP

    # -- derived data -----------------------------------------------------
    @cached_property
    def k(self) -> np.ndarray:
        """Multiplicity of each positive root, in root order."""
        return np.array([self.multiplicity[o] for o in self.orbit], dtype=float)

    @property
    def n_positive(self) -> int:
        return int(self.positive_roots.shape[0])

    @property
    def gamma(self) -> float:
        return float(np.sum(self.k))

    @property
    def effective_dimension(self) -> float:
        return self.dimension + 2.0 * self.gamma

    @property
    def is_trivial(self) -> bool:
        """True when every multiplicity vanishes (the classical case)."""
        return not np.any(self.k > 0)

    @property
    def is_product(self) -> bool:
        return self.family is Family.A1_PRODUCT

    @cached_property
    def group(self) -> ReflectionGroup:
        return generate_group(self)

    @cached_property
    def generic_point(self) -> np.ndarray:
        v = _GENERIC[: self.dimension].copy()
        if self.dimension > _GENERIC.size:
            v = np.concatenate([_GENERIC, 1.0 / np.arange(7, self.dimension + 1) ** 1.37])
        return v / np.linalg.norm(v)

    @cached_property
    def chambers(self) -> tuple[ChamberSign, ...]:
        """All Weyl chambers, fundamental chamber first, then sorted by label."""
        pts = self.group.elements @ self.generic_point
        labels = {tuple(int(s) for s in np.sign(pts_i @ self.positive_roots.T)) for pts_i in pts}
        ordered = sorted(labels, reverse=True)
        return tuple(ChamberSign(s) for s in ordered)

    def chamber_direction(self, chamber: ChamberSign) -> np.ndarray:
        """A unit vector in the interior of ``chamber``."""
        pts = self.group.elements @ self.generic_point
        for p in pts:
            if tuple(int(s) for s in np.sign(p @ self.positive_roots.T)) == tuple(chamber.signs):
                return p / np.linalg.norm(p)
        raise ValidationError(f"{chamber} does not label a Weyl chamber")

    def summary(self) -> dict:
        return {
            "family": self.family.value,
            "dimension": self.dimension,
            "params": dict(self.params),
            "multiplicities": {k: float(v) for k, v in self.multiplicity.items()},
            "positive_roots": self.positive_roots.tolist(),
            "gamma": self.gamma,
            "effective_dimension": self.effective_dimension,
            "group_order": self.group.order,
        }

    def __repr__(self):
        ks = ",".join(f"{o}={v:g}" for o, v in self.multiplicity.items())
        return f"RootSystem({self.family.value}, N={self.dimension}, {ks})"


# -- construction -----------------------------------------------------------

def _a1_product(n):
    roots = np.sqrt(2.0) * np.eye(n)
    return roots, tuple(f"e{i + 1}" for i in range(n))


def _dihedral(m):
    # normals to the m mirror lines through the origin; angles pi*j/m + pi/2
    ang = np.pi * np.arange(m) / m + np.pi / 2
    roots = np.sqrt(2.0) * np.column_stack([np.cos(ang), np.sin(ang)])
    # make them positive w.r.t. the generic direction
    sgn = np.sign(roots @ _GENERIC[:2])
    roots = roots * sgn[:, None]
    if m % 2:
        labels = tuple("all" for _ in range(m))
    else:
        labels = tuple(f"orbit{j % 2}" for j in range(m))
    return roots, labels


def _b2():
    s = np.sqrt(2.0)
    roots = np.array([[s, 0.0], [0.0, s], [1.0, 1.0], [1.0, -1.0]])
    return roots, ("short", "short", "long", "long")


def _a2():
    s = np.sqrt(2.0)
    a1 = np.array([s, 0.0])
    a2 = np.array([-s / 2, np.sqrt(6.0) / 2])
    return np.array([a1, a2, a1 + a2]), ("all", "all", "all")


def _normalize(roots: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(roots, axis=1)
    if np.any(norms == 0):
        raise ZeroRootError("root list contains a zero vector")
    return roots * (np.sqrt(2.0) / norms)[:, None]


def _custom(roots) -> tuple[np.ndarray, tuple[str, ...]]:
    roots = np.atleast_2d(np.asarray(roots, dtype=float))
    roots = _normalize(roots)
    n = roots.shape[1]
    g = _GENERIC[:n] if n <= _GENERIC.size else np.ones(n)
    pos = []
    for a in roots:
        a = a if a @ g > 0 else -a
        if any(np.allclose(a, b, atol=CLOSURE_TOL) for b in pos):
            continue
        if any(abs(abs(a @ b) - 2.0) < CLOSURE_TOL for b in pos):
            raise NonClosedSystemError("two non-equal roots are parallel")
        pos.append(a)
    pos = np.array(pos)
    full = np.vstack([pos, -pos])
    for a in pos:
        img = reflect(a, full)
        d = np.min(np.linalg.norm(img[:, None, :] - full[None, :, :], axis=2), axis=1)
        if np.max(d) > CLOSURE_TOL:
            raise NonClosedSystemError("root list is not closed under its reflections")
    # orbits: union of roots related by a group element (up to sign)
    mats = _close([reflection_matrix(a) for a in pos], DEFAULT_GROUP_CAP)
    label = [-1] * len(pos)
    nxt = 0
    for i, a in enumerate(pos):
        if label[i] >= 0:
            continue
        imgs = np.array([m @ a for m in mats])
        for j, b in enumerate(pos):
            if label[j] < 0 and np.min(np.minimum(
                    np.linalg.norm(imgs - b, axis=1), np.linalg.norm(imgs + b, axis=1))) < CLOSURE_TOL:
                label[j] = nxt
        nxt += 1
    return pos, tuple(f"o{lab}" for lab in label)


def _resolve_multiplicities(labels: tuple[str, ...], values) -> dict[str, float]:
    orbits = list(dict.fromkeys(labels))
    if values is None:
        values = 1.0
    if isinstance(values, Mapping):
        missing = set(orbits) - set(values)
        extra = set(values) - set(orbits)
        if missing or extra:
            raise ValidationError(f"multiplicity keys must be {orbits}, got {sorted(values)}")
        out = {o: float(values[o]) for o in orbits}
    elif np.ndim(values) == 0:
        out = {o: float(values) for o in orbits}
    else:
        values = list(values)
        if len(values) == 1:
            values = values * len(orbits)
        if len(values) != len(orbits):
            raise ValidationError(f"expected {len(orbits)} multiplicities ({orbits}), got {len(values)}")
        out = {o: float(v) for o, v in zip(orbits, values)}
    for o, v in out.items():
        if not np.isfinite(v) or v < 0:
            raise NegativeMultiplicityError(f"multiplicity for orbit {o!r} must be >= 0, got {v}")
    return out


def build_root_system(family, dimension: int | None = None, multiplicities=None, *,
                      roots=None, m: int | None = None,
                      group_cap: int = DEFAULT_GROUP_CAP) -> RootSystem:
    """Build a root system from a family tag.

    Parameters
    ----------
    family : Family or str
        ``A1_PRODUCT`` (the group Z_2^N), ``A2``, ``B2``, ``DIHEDRAL_M`` or ``CUSTOM``.
    dimension : int
        Ambient dimension N.  Fixed to 2 for A2, B2 and dihedral families.
    multiplicities : float, sequence or mapping
        A scalar applies to every orbit; a sequence is read in orbit order
        (``e1..eN`` for products, ``short, long`` for B2, ``orbit0, orbit1`` for
        even dihedral groups); a mapping is keyed by orbit label.
    roots : array_like, optional
        Root vectors for ``CUSTOM``; either the positive half or the full system.
    m : int, optional
        Order parameter of the dihedral group I_2(m).
    """
    family = Family(family.upper() if isinstance(family, str) else family)
    params: dict[str, int] = {}
    if family is Family.A1_PRODUCT:
        if dimension is None or int(dimension) < 1:
            raise ValidationError("A1_PRODUCT needs dimension >= 1")
        pos, labels = _a1_product(int(dimension))
    elif family is Family.A2:
        pos, labels = _a2()
    elif family is Family.B2:
        pos, labels = _b2()
    elif family is Family.DIHEDRAL_M:
        if m is None or int(m) < 3:
            raise ValidationError("dihedral order m must be >= 3")
        params["m"] = int(m)
        pos, labels = _dihedral(int(m))
    else:
        if roots is None:
            raise ValidationError("CUSTOM root systems need an explicit root list")
        pos, labels = _custom(roots)
    n = pos.shape[1]
    if dimension is not None and int(dimension) != n:
        raise ValidationError(f"{family.value} lives in dimension {n}, got {dimension}")
    mult = _resolve_multiplicities(labels, multiplicities)
    rs = RootSystem(n, pos, labels, mult, family, params, group_cap)
    _check_invariants(rs)
    return rs


def _check_invariants(rs: RootSystem) -> None:
    sq = np.einsum("ij,ij->i", rs.positive_roots, rs.positive_roots)
    if np.max(np.abs(sq - 2.0)) > ROOT_NORM_TOL:
        raise ValidationError("roots are not normalized")
    # G-invariance of k: every reflection maps each orbit onto itself
    full = np.vstack([rs.positive_roots, -rs.positive_roots])
    lab = rs.orbit + rs.orbit
    for a in rs.positive_roots:
        img = reflect(a, full)
        d = np.linalg.norm(img[:, None, :] - full[None, :, :], axis=2)
        j = np.argmin(d, axis=1)
        if np.max(d[np.arange(len(full)), j]) > CLOSURE_TOL:
            raise NonClosedSystemError("root system not closed under reflections")
        if any(lab[i] != lab[jj] and rs.multiplicity[lab[i]] != rs.multiplicity[lab[jj]]
               for i, jj in enumerate(j)):
            raise ValidationError("multiplicity is not constant on group orbits")


def generate_group(rs: RootSystem, cap: int | None = None) -> ReflectionGroup:
    """Close the set of root reflections under multiplication.

    Elements are sorted lexicographically by their (rounded) matrix entries so
    the ordering is deterministic.
    """
    cap = rs.group_cap if cap is None else cap
    gens = [reflection_matrix(a) for a in rs.positive_roots]
    return ReflectionGroup(np.array(_close(gens, cap)))


def chamber_sign(rs: RootSystem, point) -> ChamberSign:
    x = np.asarray(point, dtype=float).reshape(rs.dimension)
    ip = rs.positive_roots @ x
    if np.any(np.abs(ip) <= 1e-12 * np.linalg.norm(x)):
        raise OnWallError(f"point {x.tolist()} lies on a reflecting hyperplane")
    return ChamberSign(tuple(int(s) for s in np.sign(ip)))


def weight(rs: RootSystem, point) -> np.ndarray | float:
    """Dunkl weight ``prod |<alpha, x>|^{2 k_alpha}``; accepts ``(..., N)`` arrays."""
    x = np.asarray(point, dtype=float)
    if rs.dimension == 1 and x.ndim == 0:
        x = x.reshape(1)
    ip = np.abs(x @ rs.positive_roots.T)
    out = np.prod(ip ** (2.0 * rs.k), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


# -- loading ----------------------------------------------------------------

def root_system_from_dict(doc: Mapping) -> RootSystem:
    family = doc.get("family")
    if family is None:
        raise ValidationError("root-system document needs a 'family'")
    fam = str(family).upper()
    if fam in ("Z2N", "Z_2^N", "A1"):
        fam = "A1_PRODUCT"
    return build_root_system(
        fam,
        doc.get("dimension"),
        doc.get("multiplicities", doc.get("k")),
        roots=doc.get("roots"),
        m=doc.get("m"),
    )


def _parse_numbers(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def parse_shorthand(text: str) -> RootSystem:
    """Parse ``a1:k=1``, ``a1x3:k=1,0.5,2``, ``a2:k=1``, ``b2:k=1,0.5``, ``i2m:m=5,k=1``."""
    head, _, rest = text.strip().partition(":")
    head = head.lower()
    opts: dict[str, str] = {}
    key = None
    for part in rest.split(","):
        if "=" in part:
            key, val = part.split("=", 1)
            key = key.strip()
            opts[key] = val.strip()
        elif key is not None and part.strip():
            opts[key] += "," + part.strip()
    ks = _parse_numbers(opts["k"]) if "k" in opts else [1.0]
    if head == "a1":
        return build_root_system("A1_PRODUCT", 1, ks)
    if head.startswith("a1x"):
        n = int(head[3:])
        return build_root_system("A1_PRODUCT", n, ks)
    if head == "a2":
        return build_root_system("A2", 2, ks)
    if head == "b2":
        return build_root_system("B2", 2, ks)
    if head in ("i2m", "i2", "dihedral"):
        if "m" not in opts:
            raise ValidationError("dihedral shorthand needs m=...")
        return build_root_system("DIHEDRAL_M", 2, ks, m=int(float(opts["m"])))
    raise ValidationError(f"unknown root-system shorthand {text!r}")


def load_root_system(source) -> RootSystem:
    """Load from a mapping, a JSON file path, a JSON string, or a shorthand."""
    if isinstance(source, RootSystem):
        return source
    if isinstance(source, Mapping):
        return root_system_from_dict(source)
    text = str(source)
    path = Path(text)
    if path.suffix == ".json" or (len(text) < 4096 and path.is_file()):
        return root_system_from_dict(json.loads(path.read_text()))
    if text.lstrip().startswith("{"):
        return root_system_from_dict(json.loads(text))
    return parse_shorthand(text)
