"""Points, frames and sampling on round spheres, and the differential
operators (gradient, covariant Hessian, Laplace-Beltrami) of scalar fields.

Two kinds of field are supported. ``AffineField`` is ``S + <x, v>`` restricted
to the sphere and has exact derivatives. ``GenericField`` wraps an arbitrary
vectorised evaluator and is differentiated by central finite differences.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError, ParameterError, UnsupportedStrategyError

# default steps per stencil order; steps are angles, i.e. relative to the radius
H_GRAD = {2: 1e-4, 4: 1e-3}
H_HESS = {2: 1e-3, 4: 8e-3}
_REL_TOL = 1e-12

# central-difference weights for offsets 1..k (first derivative, antisymmetric)
# and 0..k (second derivative, symmetric)
_FIRST = {2: (0.5,), 4: (2 / 3, -1 / 12)}
_SECOND = {2: (-2.0, 1.0), 4: (-5 / 2, 4 / 3, -1 / 12)}


@dataclass(frozen=True, eq=False)
class SpherePoint:
    """A point of the sphere of given radius centred at the origin of R^{n+1}."""

    coords: np.ndarray
    radius: float = 1.0

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.ndim != 1 or c.size < 3:
            raise ParameterError("sphere points need n >= 2, i.e. at least 3 coordinates")
        if not self.radius > 0:
            raise ParameterError("radius must be positive")
        if abs(np.linalg.norm(c) - self.radius) > _REL_TOL * self.radius:
            raise DomainError(f"|coords| = {np.linalg.norm(c)!r} is not the radius {self.radius!r}")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def n(self) -> int:
        """Intrinsic dimension of the sphere."""
        return self.coords.size - 1

    @property
    def unit(self) -> np.ndarray:
        return self.coords / self.radius


@dataclass(frozen=True, eq=False)
class TangentFrame:
    base: SpherePoint
    basis: np.ndarray  # shape (n, n+1), rows orthonormal and orthogonal to base


def project_to_sphere(v, radius: float = 1.0) -> SpherePoint:
    v = np.asarray(v, dtype=float)
    nv = np.linalg.norm(v)
    if not nv > 0:
        raise DomainError("cannot project the zero vector onto a sphere")
    return SpherePoint(radius * v / nv, radius)


def tangent_frame(x: SpherePoint) -> TangentFrame:
    """Deterministic orthonormal basis of the tangent space at ``x``.

    The Householder reflection ``P`` swapping ``x`` with the coordinate axis
    ``s e_p`` of its largest component is symmetric and orthogonal, so its
    other rows are orthonormal and orthogonal to ``x``.
    """
    u = x.unit
    p = int(np.argmax(np.abs(u)))
    s = 1.0 if u[p] >= 0 else -1.0
    h = u.copy()
    h[p] -= s  # |h|^2 = 2(1 - |u_p|) > 0 unless u = s e_p
    hh = h @ h
    P = np.eye(u.size)
    if hh > 0:
        P -= (2.0 / hh) * np.outer(h, h)
    return TangentFrame(x, np.delete(P, p, axis=0))


def sphere_array(n: int, count: int, strategy: str = "uniform_random", seed: int = 0) -> np.ndarray:
    """Unit vectors as a ``(count, n+1)`` array; see :func:`sample_sphere`."""
    if n < 2:
        raise ParameterError("n must be at least 2")
    if count < 1:
        raise ParameterError("count must be at least 1")
    if strategy == "fibonacci":
        if n != 2:
            raise UnsupportedStrategyError("the Fibonacci lattice is only available on S^2")
        i = np.arange(count) + 0.5
        z = 1.0 - 2.0 * i / count
        r = np.sqrt(1.0 - z * z)
        phi = np.pi * (1.0 + np.sqrt(5.0)) * i
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    if strategy == "uniform_random":
        g = np.random.default_rng(seed).standard_normal((count, n + 1))
        return g / np.linalg.norm(g, axis=1, keepdims=True)
    raise UnsupportedStrategyError(f"unknown sampling strategy {strategy!r}")


def sample_sphere(n: int, count: int, strategy: str = "uniform_random", seed: int = 0,
                  radius: float = 1.0) -> list[SpherePoint]:
    pts = sphere_array(n, count, strategy, seed)
    return [SpherePoint(radius * p / np.linalg.norm(p), radius) for p in pts]


# ---------------------------------------------------------------------------
# scalar fields


@dataclass(frozen=True, eq=False)
class AffineField:
    """``w(x) = S + <x, v>`` on the sphere of the given radius (x = coordinates)."""

    S: float
    v: np.ndarray
    radius: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))
        object.__setattr__(self, "S", float(self.S))

    path = "analytic"

    def evaluate(self, pts: np.ndarray) -> np.ndarray:
        return self.S + np.asarray(pts) @ self.v

    def value(self, x: SpherePoint) -> float:
        return float(self.S + x.coords @ self.v)

    def grad(self, x: SpherePoint) -> np.ndarray:
        u = x.unit
        return self.v - (self.v @ u) * u

    def hess(self, x: SpherePoint, frame: TangentFrame) -> np.ndarray:
        # linear functions restricted to a radius-r sphere: Hess = -<x,v>/r^2 * h
        n = frame.basis.shape[0]
        return -(x.coords @ self.v) / x.radius**2 * np.eye(n)

    def as_generic(self, **kw) -> "GenericField":
        """Same field, differentiated numerically."""
        S, v = self.S, self.v
        return GenericField(lambda p: S + p @ v, radius=self.radius, **kw)


@dataclass(frozen=True, eq=False)
class GenericField:
    """Black-box field. ``func`` maps an ``(m, n+1)`` array of sphere points to
    ``m`` values; it is only ever called on points of the field's sphere."""

    func: Callable[[np.ndarray], np.ndarray]
    radius: float = 1.0
    h_grad: float | None = None
    h_hess: float | None = None
    fd_order: int = 2

    path = "fd"

    def __post_init__(self):
        if self.fd_order not in _FIRST:
            raise ParameterError("fd_order must be 2 or 4")
        if self.h_grad is None:
            object.__setattr__(self, "h_grad", H_GRAD[self.fd_order])
        if self.h_hess is None:
            object.__setattr__(self, "h_hess", H_HESS[self.fd_order])

    def evaluate(self, pts: np.ndarray) -> np.ndarray:
        return np.asarray(self.func(np.atleast_2d(pts)), dtype=float)

    def value(self, x: SpherePoint) -> float:
        return float(self.evaluate(x.coords[None, :])[0])

    def grad(self, x: SpherePoint) -> np.ndarray:
        # central differences of the degree-0 extension W(y) = w(r y/|y|)
        r = x.radius
        h = self.h_grad * r
        m = x.coords.size
        wts = _FIRST[self.fd_order]
        E = np.eye(m)
        steps = np.vstack([x.coords + s * (j + 1) * h * E for j in range(len(wts)) for s in (1, -1)])
        steps = r * steps / np.linalg.norm(steps, axis=1, keepdims=True)
        vals = self.evaluate(steps).reshape(len(wts), 2, m)
        g = sum(c * (vals[j, 0] - vals[j, 1]) for j, c in enumerate(wts)) / h
        u = x.unit
        return g - (g @ u) * u

    def hess(self, x: SpherePoint, frame: TangentFrame) -> np.ndarray:
        # second differences along unit-speed great circles through x; off-diagonal
        # entries by polarisation, so the result is symmetric by construction
        b = frame.basis
        n = b.shape[0]
        r = x.radius
        h = self.h_hess * r  # arc length
        dirs = [b[i] for i in range(n)]
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        for i, j in pairs:
            dirs.append((b[i] + b[j]) / np.sqrt(2.0))
            dirs.append((b[i] - b[j]) / np.sqrt(2.0))
        d = np.array(dirs)
        wts = _SECOND[self.fd_order]
        blocks = [x.coords[None, :]]
        for j in range(1, len(wts)):
            c, s = np.cos(j * h / r), r * np.sin(j * h / r)
            blocks += [c * x.coords + s * d, c * x.coords - s * d]
        vals = self.evaluate(np.vstack(blocks))
        k = len(dirs)
        second = wts[0] * vals[0]
        for j in range(1, len(wts)):
            lo = 1 + 2 * (j - 1) * k
            second = second + wts[j] * (vals[lo:lo + k] + vals[lo + k:lo + 2 * k])
        second = second / h**2
        H = np.diag(second[:n])
        for p, (i, j) in enumerate(pairs):
            H[i, j] = H[j, i] = 0.5 * (second[n + 2 * p] - second[n + 2 * p + 1])
        return H


ScalarField = AffineField | GenericField


def gradient(w: ScalarField, x: SpherePoint) -> np.ndarray:
    """Spherical gradient as an ambient vector tangent at ``x``."""
    return w.grad(x)


def hessian(w: ScalarField, x: SpherePoint, frame: TangentFrame | None = None) -> np.ndarray:
    """Covariant Hessian ``H[i, j] = (nabla^2 w)(b_i, b_j)`` in ``frame``."""
    if frame is None:
        frame = tangent_frame(x)
    elif frame.base.coords is not x.coords and not np.allclose(frame.base.coords, x.coords, atol=1e-12):
        raise ParameterError("frame is not based at x")
    return w.hess(x, frame)


def laplacian(w: ScalarField, x: SpherePoint, frame: TangentFrame | None = None) -> float:
    return float(np.trace(hessian(w, x, frame)))


def derivatives(w: ScalarField, x: SpherePoint, frame: TangentFrame | None = None):
    """``(w(x), grad w(x), Hess w(x))`` in one call."""
    if frame is None:
        frame = tangent_frame(x)
    return w.value(x), w.grad(x), w.hess(x, frame)


def hessian_fd_error(field: AffineField, points: list[SpherePoint], h: float) -> float:
    """Max entrywise difference between finite-difference and exact Hessians."""
    fd = field.as_generic(h_hess=h)
    err = 0.0
    for x in points:
        fr = tangent_frame(x)
        err = max(err, float(np.max(np.abs(fd.hess(x, fr) - field.hess(x, fr)))))
    return err


@dataclass
class ConvergenceRow:
    h: float
    max_error: float
    roundoff_bound: float
    reliable: bool
    order: float | None = None


@dataclass
class ConvergenceScan:
    rows: list[ConvergenceRow] = field(default_factory=list)
    fitted_order: float | None = None
    order_reliable: bool = False


def convergence_scan(field_: AffineField, points: list[SpherePoint], hs) -> ConvergenceScan:
    """Finite-difference Hessian error against the exact one for each step in ``hs``.

    A row is flagged unreliable when its error is within a factor 10 of the
    rounding bound ``4 eps max|w| / h^2``; orders involving such rows are
    flagged as well.
    """
    hs = [float(h) for h in hs]
    if not hs:
        raise ParameterError("empty step list")
    wmax = max(abs(field_.value(x)) for x in points)
    eps = np.finfo(float).eps
    scan = ConvergenceScan()
    for h in hs:
        e = hessian_fd_error(field_, points, h)
        bound = 4 * eps * max(wmax, 1.0) / h**2
        scan.rows.append(ConvergenceRow(h, e, bound, e > 10 * bound))
    for prev, row in zip(scan.rows, scan.rows[1:]):
        if prev.max_error > 0 and row.max_error > 0 and prev.h != row.h:
            row.order = float(np.log(prev.max_error / row.max_error) / np.log(prev.h / row.h))
    good = [r for r in scan.rows if r.max_error > 0]
    if len(good) >= 2:
        lh = np.log([r.h for r in good])
        le = np.log([r.max_error for r in good])
        scan.fitted_order = float(np.polyfit(lh, le, 1)[0])
        scan.order_reliable = all(r.reliable for r in good)
    return scan
