"""Quadrics of revolution with a focus at the origin.

A quadric is stored in focal form ``rho(x) = f / (1 - eps <x, axis>)`` with
``eps >= 0``; a hyperplane as ``rho(x) = f / <x, axis>``. The reciprocal
``w = 1/rho`` is the affine field ``S + C <x, xi>`` with ``S = 1/f``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (DomainError, ExcludedCaseError, NoElementsError, NoSolutionError,
                     ParameterError, SamplingError, UnrepresentableError)
from .sphere import AffineField, SpherePoint

DOMAIN_MARGIN = 1e-9
MIN_ACCEPTANCE = 1e-3
_PILOT = 20_000


class Kind(str, enum.Enum):
    ELLIPSOID = "ellipsoid"
    PARABOLOID = "paraboloid"
    HYPERBOLOID_SHEET = "hyperboloid_sheet"
    HYPERPLANE = "hyperplane"
    CENTERED_SPHERE = "centered_sphere"


_KIND_ALIASES = {
    "ellipsoid": Kind.ELLIPSOID,
    "paraboloid": Kind.PARABOLOID,
    "hyperboloid": Kind.HYPERBOLOID_SHEET,
    "hyperboloid_sheet": Kind.HYPERBOLOID_SHEET,
    "hyperboloid2sheet": Kind.HYPERBOLOID_SHEET,
    "hyperplane": Kind.HYPERPLANE,
    "sphere": Kind.CENTERED_SPHERE,
    "centered_sphere": Kind.CENTERED_SPHERE,
}


def parse_kind(name: str) -> Kind:
    key = name.strip().lower().replace("-", "_")
    if key in ("hyperboloid1sheet", "hyperboloid_1_sheet", "one_sheeted_hyperboloid"):
        raise UnrepresentableError(
            "a one-sheeted hyperboloid has no directrix hyperplane, so it has no "
            "focal radial representation f/(1 - eps<x,axis>)")
    try:
        return _KIND_ALIASES[key]
    except KeyError:
        raise ParameterError(f"unknown quadric kind {name!r}") from None


def _unit(v, what="axis") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    nv = np.linalg.norm(v)
    if v.ndim != 1 or v.size < 3:
        raise ParameterError(f"{what} must be a vector in R^(n+1), n >= 2")
    if not nv > 0:
        raise ParameterError(f"{what} must be nonzero")
    if abs(nv - 1.0) > 1e-12:
        raise ParameterError(f"{what} must be a unit vector (|{what}| = {nv!r})")
    return v


@dataclass(frozen=True, eq=False)
class SolutionParams:
    """Parameters of ``w = S + C <x, xi>`` with ``S^2 = C^2 + c2 - 1``."""

    c2: float
    C: float
    xi: np.ndarray
    branch: str = "plus"

    def __post_init__(self):
        object.__setattr__(self, "xi", _unit(self.xi, "xi"))
        if self.branch not in ("plus", "minus"):
            raise ParameterError("branch must be 'plus' or 'minus'")
        disc = self.C**2 + self.c2 - 1
        if disc < -1e-12 * (1 + self.C**2 + abs(self.c2)):
            raise NoSolutionError(f"C^2 + c^2 - 1 = {disc!r} < 0")
        if self.c2 >= 1 and self.branch == "minus":
            raise ParameterError("for c^2 >= 1 only the branch with S > 0 is admissible")

    @property
    def S(self) -> float:
        disc = self.C**2 + self.c2 - 1
        # boundary case C^2 = 1 - c^2 (hyperplane) snaps to S = 0
        if disc <= 1e-12 * (1 + self.C**2 + abs(self.c2)):
            return 0.0
        s = math.sqrt(disc)
        return s if self.branch == "plus" else -s

    @property
    def v(self) -> np.ndarray:
        return self.C * self.xi

    def field(self) -> AffineField:
        return AffineField(self.S, self.v)

    def canonical(self) -> "SolutionParams":
        """Same field with ``C >= 0`` (``(C, xi)`` and ``(-C, -xi)`` coincide)."""
        if self.C < 0:
            return SolutionParams(self.c2, -self.C, -self.xi, self.branch)
        return self


@dataclass(frozen=True, eq=False)
class QuadricParams:
    """Focal form of a quadric. For a centred sphere ``xi`` is nominal."""

    kind: Kind
    f: float
    eps: float
    xi: np.ndarray

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        f, eps = float(self.f), float(self.eps)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "xi", _unit(self.xi))
        if kind is Kind.ELLIPSOID and not (f > 0 and 0 <= eps < 1):
            raise ParameterError("ellipsoid needs f > 0 and 0 <= eps < 1")
        if kind is Kind.PARABOLOID and not (f > 0 and eps == 1):
            raise ParameterError("paraboloid needs f > 0 and eps = 1")
        if kind is Kind.HYPERBOLOID_SHEET and not (f != 0 and eps > 1):
            raise ParameterError("hyperboloid sheet needs f != 0 and eps > 1")
        if kind is Kind.CENTERED_SPHERE and not (f > 0 and eps == 0):
            raise ParameterError("centred sphere needs f > 0 and eps = 0")
        if kind is Kind.HYPERPLANE and f == 0:
            raise ParameterError("hyperplane needs f != 0")

    @property
    def dim(self) -> int:
        return self.xi.size - 1

    def reciprocal(self) -> AffineField:
        """``w = 1/rho`` as an affine field on the unit sphere."""
        if self.kind is Kind.HYPERPLANE:
            return AffineField(0.0, self.xi / self.f)
        if self.kind is Kind.CENTERED_SPHERE:
            return AffineField(1.0 / self.f, np.zeros_like(self.xi))
        return AffineField(1.0 / self.f, -(self.eps / self.f) * self.xi)


def focal_quadric(f: float, eps: float, xi) -> QuadricParams:
    """Quadric with ``rho = f / (1 - eps <x, xi>)``, kind inferred from ``eps``."""
    if eps < 0:
        eps, xi = -eps, -np.asarray(xi, dtype=float)
    if eps < 1:
        kind = Kind.ELLIPSOID
    elif eps == 1:
        kind = Kind.PARABOLOID
    else:
        kind = Kind.HYPERBOLOID_SHEET
    return QuadricParams(kind, f, eps, xi)


def solution_to_quadric(sol: SolutionParams) -> QuadricParams:
    S, C, xi = sol.S, sol.C, sol.xi
    if C == 0:
        if sol.c2 > 1:
            return QuadricParams(Kind.CENTERED_SPHERE, 1.0 / S, 0.0, xi)
        raise ParameterError("C = 0 with c^2 <= 1 gives w = 0 or an imaginary S")
    if S == 0:
        return QuadricParams(Kind.HYPERPLANE, 1.0 / abs(C), 0.0, math.copysign(1.0, C) * xi)
    f = 1.0 / S
    axis = -math.copysign(1.0, S) * math.copysign(1.0, C) * xi
    if sol.c2 > 1:
        return QuadricParams(Kind.ELLIPSOID, f, abs(C) / abs(S), axis)
    if sol.c2 == 1:
        return QuadricParams(Kind.PARABOLOID, f, 1.0, axis)
    return QuadricParams(Kind.HYPERBOLOID_SHEET, f, abs(C) / abs(S), axis)


def quadric_to_solution(q: QuadricParams) -> SolutionParams:
    """Inverse of :func:`solution_to_quadric`, returned with ``C >= 0``."""
    if q.kind is Kind.CENTERED_SPHERE:
        raise ExcludedCaseError("a sphere centred at the focus is the constant branch w^2 = c^2 - 1")
    if q.kind is Kind.HYPERPLANE:
        C = 1.0 / abs(q.f)
        return SolutionParams(1.0 - C * C, C, math.copysign(1.0, q.f) * q.xi, "plus")
    S = 1.0 / q.f
    C = q.eps / abs(q.f)
    c2 = 1.0 if q.kind is Kind.PARABOLOID else S * S - C * C + 1.0
    return SolutionParams(c2, C, -math.copysign(1.0, q.f) * q.xi, "plus" if q.f > 0 else "minus")


# ---------------------------------------------------------------------------
# radial function


def _denominators(q: QuadricParams, X: np.ndarray) -> np.ndarray:
    """``rho = f / d``; returns ``d`` for each row of ``X`` (unit vectors)."""
    if q.kind is Kind.CENTERED_SPHERE:
        return np.ones(X.shape[0])
    t = X @ q.xi
    if q.kind is Kind.HYPERPLANE:
        return t
    return 1.0 - q.eps * t


def _inside(q: QuadricParams, d: np.ndarray) -> np.ndarray:
    scale = 1.0 if q.kind is Kind.HYPERPLANE else 1.0 + q.eps
    return np.sign(q.f) * d > DOMAIN_MARGIN * scale


def radial_array(q: QuadricParams, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    d = _denominators(q, X)
    if not np.all(_inside(q, d)):
        raise DomainError("direction outside the positivity domain of the radial function")
    return q.f / d


def radial(q: QuadricParams, x: SpherePoint) -> float:
    return float(radial_array(q, x.unit[None, :])[0])


def domain_indicator(q: QuadricParams, x: SpherePoint) -> bool:
    u = x.unit[None, :]
    return bool(_inside(q, _denominators(q, u))[0])


def lift(q: QuadricParams, X: np.ndarray) -> np.ndarray:
    """Surface points ``rho(x) x`` for each row of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return radial_array(q, X)[:, None] * X


def _directions(rng: np.random.Generator, batch: int, m: int) -> np.ndarray:
    g = rng.standard_normal((batch, m))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def sample_directions(q: QuadricParams, count: int, seed: int, dim: int | None = None) -> np.ndarray:
    """Uniform directions restricted to the positivity domain.

    Direction ``i`` is drawn from its own stream seeded by ``(seed, i)``, so any
    subset of indices can be generated independently of the others.
    """
    if count < 1:
        raise ParameterError("count must be at least 1")
    m = (dim + 1) if dim is not None else q.dim + 1
    pilot = _directions(np.random.default_rng([seed, 2**32 - 1, 2**32 - 1]), _PILOT, m)
    rate = float(np.mean(_inside(q, _denominators(q, pilot))))
    if rate < MIN_ACCEPTANCE:
        raise SamplingError(f"acceptance rate {rate:.2e} is below {MIN_ACCEPTANCE:g}")
    batch = max(4, int(math.ceil(4.0 / rate)))
    out = np.empty((count, m))
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        while True:
            cand = _directions(rng, batch, m)
            ok = np.flatnonzero(_inside(q, _denominators(q, cand)))
            if ok.size:
                out[i] = cand[ok[0]]
                break
    return out


def sample_surface(q: QuadricParams, count: int, seed: int, dim: int | None = None) -> np.ndarray:
    """``count`` points of the surface, as a ``(count, n+1)`` array."""
    return lift(q, sample_directions(q, count, seed, dim))


# ---------------------------------------------------------------------------
# geometry


@dataclass(frozen=True, eq=False)
class GeometricElements:
    center: np.ndarray
    second_focus: np.ndarray
    a: float
    b: float


def geometric_elements(q: QuadricParams) -> GeometricElements:
    """Centre, second focus and semi-axes of an ellipsoid or hyperboloid; the
    first focus is the origin."""
    if q.kind not in (Kind.ELLIPSOID, Kind.HYPERBOLOID_SHEET):
        raise NoElementsError(f"{q.kind.value} has no centre or second focus")
    e2 = 1.0 - q.eps**2
    af = abs(q.f)
    center = (q.f * q.eps / e2) * q.xi
    return GeometricElements(center, 2 * center, af / abs(e2), af / math.sqrt(abs(e2)))
