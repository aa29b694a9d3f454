"""Recover ``w = S + <x, v>`` from radial samples and classify the quadric.

Since ``1/rho`` is affine in the direction ``x`` for every surface of the
family, the fit is an ordinary linear least-squares problem in ``(S, v)``.
It is solved by Householder QR; the normal equations are never formed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGeometryError, ParameterError, ZeroSetError
from .quadric import Kind, QuadricParams, SolutionParams, solution_to_quadric
from .residuals import NormStats, ResidualReport, _s_stats, residual_report
from .sphere import AffineField, SpherePoint

COND_MAX = 1e12


@dataclass(frozen=True, eq=False)
class RadialSample:
    x: SpherePoint
    rho: float

    def __post_init__(self):
        if not self.rho > 0:
            raise ParameterError(f"radial values must be positive, got {self.rho!r}")


@dataclass
class Tolerances:
    """Classification bands. ``None`` selects the magnitude-scaled default.

    Each band is widened to ``z`` standard errors of the fitted quantity when
    the fit supplies them, so noisy data at a case boundary is not split by
    noise alone. Noiseless data has standard errors at rounding level and
    sees only the fixed bands.
    """

    tol_c: float | None = None
    tol_S: float | None = None
    tol_C: float | None = None
    z: float = 5.0

    def resolve(self, S: float, C: float, stderr: dict | None = None) -> dict:
        c2 = S * S - C * C + 1
        out = {
            "tol_c": self.tol_c if self.tol_c is not None else 1e-6 * (1 + abs(c2)),
            "tol_S": self.tol_S if self.tol_S is not None else 1e-6 * (1 + abs(S) + abs(C)),
            "tol_C": self.tol_C if self.tol_C is not None else 1e-6 * (1 + abs(S)),
        }
        if stderr:
            out["tol_c"] = max(out["tol_c"], self.z * stderr.get("c2", 0.0))
            out["tol_S"] = max(out["tol_S"], self.z * stderr.get("S", 0.0))
            out["tol_C"] = max(out["tol_C"], self.z * stderr.get("C", 0.0))
        return out


def classify(S: float, C: float, tol: Tolerances | None = None, stderr: dict | None = None) -> Kind:
    """Case split on ``c^2 = S^2 - C^2 + 1``, with bands at the boundaries."""
    t = (tol or Tolerances()).resolve(S, C, stderr)
    c2 = S * S - C * C + 1
    if abs(C) <= t["tol_C"]:
        return Kind.CENTERED_SPHERE
    if abs(S) <= t["tol_S"]:
        return Kind.HYPERPLANE
    if abs(c2 - 1) <= t["tol_c"]:
        return Kind.PARABOLOID
    return Kind.ELLIPSOID if c2 > 1 else Kind.HYPERBOLOID_SHEET


@dataclass
class FitResult:
    S: float
    v: np.ndarray
    c2: float
    kind: Kind
    rms_residual: float
    condition: float
    quadric: QuadricParams | None
    n_samples: int
    stderr: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    @property
    def C(self) -> float:
        return float(np.linalg.norm(self.v))

    @property
    def axis(self) -> np.ndarray | None:
        """``v / |v|``, undefined for a centred sphere."""
        if self.kind is Kind.CENTERED_SPHERE:
            return None
        return self.v / self.C

    def field(self) -> AffineField:
        return AffineField(self.S, self.v)


def _quadric_for(kind: Kind, S: float, v: np.ndarray, c2: float) -> QuadricParams | None:
    C = float(np.linalg.norm(v))
    if kind is Kind.CENTERED_SPHERE:
        if S <= 0:
            return None
        axis = v / C if C > 0 else np.eye(v.size)[-1]
        return QuadricParams(Kind.CENTERED_SPHERE, 1.0 / S, 0.0, axis)
    axis = v / C
    if kind is Kind.HYPERPLANE:
        return QuadricParams(Kind.HYPERPLANE, 1.0 / C, 0.0, axis)
    if kind is Kind.PARABOLOID:
        c2 = 1.0
    branch = "plus" if S > 0 else "minus"
    try:
        return solution_to_quadric(SolutionParams(c2, C, axis, branch))
    except ParameterError:
        return None


def fit_arrays(X: np.ndarray, rho: np.ndarray, *, weights: str | None = None,
               tol: Tolerances | None = None) -> FitResult:
    """Least-squares fit of ``S + <x_i, v> = 1/rho_i``.

    ``X`` holds unit directions row-wise. ``weights="rho2"`` weights each
    equation by ``rho_i^2``, which is the inverse variance of ``1/rho_i`` under
    multiplicative noise on ``rho``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    rho = np.asarray(rho, dtype=float)
    m, dim = X.shape
    p = dim + 1
    if dim < 3:
        raise ParameterError("directions must live in R^(n+1) with n >= 2")
    if rho.shape != (m,):
        raise ParameterError("one radial value per direction is required")
    if np.any(~(rho > 0)):
        raise ParameterError("radial values must be positive")
    if m < p:
        raise DegenerateGeometryError(f"{m} samples cannot determine {p} unknowns (need >= n+2)")
    A = np.column_stack([np.ones(m), X])
    y = 1.0 / rho
    if weights == "rho2":
        A, yw = A * rho[:, None], y * rho
    elif weights in (None, "none"):
        yw = y
    else:
        raise ParameterError(f"unknown weighting {weights!r}")
    Q, R = np.linalg.qr(A)
    sv = np.linalg.svd(R, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    if not cond < COND_MAX:
        raise DegenerateGeometryError(f"design matrix is rank deficient (condition {cond:.3g})")
    beta = np.linalg.solve(R, Q.T @ yw)
    S, v = float(beta[0]), beta[1:]
    resid = A @ beta - yw
    rms = float(np.sqrt(np.mean((np.column_stack([np.ones(m), X]) @ beta - y) ** 2)))
    stderr = {}
    if m > p:
        s2 = float(resid @ resid) / (m - p)
        Rinv = np.linalg.inv(R)
        cov = s2 * Rinv @ Rinv.T
        g = np.concatenate([[2 * S], -2 * v])
        stderr = {
            "S": float(np.sqrt(cov[0, 0])),
            "c2": float(np.sqrt(max(g @ cov @ g, 0.0))),
            "C": float(np.sqrt(max(np.linalg.eigvalsh(cov[1:, 1:])[-1], 0.0))),
        }
    C = float(np.linalg.norm(v))
    c2 = S * S - C * C + 1
    tol = tol or Tolerances()
    kind = classify(S, C, tol, stderr)
    return FitResult(S, v, c2, kind, rms, cond, _quadric_for(kind, S, v, c2), m, stderr,
                     tol.resolve(S, C, stderr))


def fit_inverse_radial(samples: list[RadialSample], **kw) -> FitResult:
    if not samples:
        raise DegenerateGeometryError("no samples")
    X = np.array([s.x.unit for s in samples])
    rho = np.array([s.rho for s in samples])
    return fit_arrays(X, rho, **kw)


def verify_arrays(X: np.ndarray, rho: np.ndarray, fit: FitResult) -> ResidualReport:
    """Residual report for the fitted field at the sample directions.

    ``eq1``, ``obata_shifted`` and ``trace`` are evaluated on the fitted affine
    field. The S-statistics use the observed values ``1/rho_i`` together with
    the fitted gradient, so they detect data that no member of the family
    reproduces. ``reciprocity`` is ``|w(x_i) rho_i - 1|``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    rho = np.asarray(rho, dtype=float)
    if X.shape[1] != fit.v.size:
        raise ParameterError("samples and fit live in different dimensions")
    w = fit.field()
    pts = [SpherePoint(x / np.linalg.norm(x)) for x in X]
    rep = residual_report(w, pts, c2=fit.c2, S=fit.S)
    wdata = 1.0 / rho
    grads2 = fit.v @ fit.v - (X @ fit.v) ** 2
    try:
        rep.s_stats = _s_stats(wdata, grads2, fit.c2 - 1)
    except ZeroSetError as exc:
        rep.s_stats = None
        rep.notes.append(str(exc))
    rep.systems["reciprocity"] = NormStats.of(w.evaluate(X) * rho - 1.0)
    rep.under_determined = X.shape[0] < X.shape[1] + 1
    rep.params.update(kind=fit.kind.value)
    return rep


def verify_solution(samples: list[RadialSample], fit: FitResult) -> ResidualReport:
    X = np.array([s.x.unit for s in samples]).reshape(len(samples), -1)
    rho = np.array([s.rho for s in samples])
    return verify_arrays(X, rho, fit)
