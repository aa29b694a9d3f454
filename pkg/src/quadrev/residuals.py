"""Pointwise residuals of the second-order systems satisfied by reciprocal
radial functions of quadrics, the S-invariant, and aggregate reports.

All matrix residuals are expressed in an orthonormal tangent frame, where the
metric is the identity.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ParameterError, PositivityError, ZeroSetError
from .sphere import ScalarField, SpherePoint, TangentFrame, derivatives, laplacian, tangent_frame


def _unit_sphere(w: ScalarField):
    if abs(w.radius - 1.0) > 1e-12:
        raise ParameterError("this system is posed on the unit sphere")


def eq1_residual(w: ScalarField, x: SpherePoint, c2: float, frame: TangentFrame | None = None) -> np.ndarray:
    """``2w Hess w + (w^2 - |grad w|^2 - c^2 + 1) I``."""
    _unit_sphere(w)
    val, g, H = derivatives(w, x, frame)
    return 2 * val * H + (val * val - g @ g - c2 + 1) * np.eye(H.shape[0])


def eq1k_residual(w: ScalarField, x: SpherePoint, c2: float, k: float,
                  frame: TangentFrame | None = None) -> np.ndarray:
    """Residual of ``2w Hess w + (k^2 w^2 - |grad w|^2) h = (c^2 - 1) h`` on the
    sphere of radius ``1/k``."""
    if not k > 0:
        raise ParameterError("k must be positive")
    if abs(w.radius * k - 1.0) > 1e-12:
        raise ParameterError(f"field lives on radius {w.radius}, expected 1/k = {1 / k}")
    val, g, H = derivatives(w, x, frame)
    return 2 * val * H + (k * k * val * val - g @ g - c2 + 1) * np.eye(H.shape[0])


def obata_residual(w: ScalarField, x: SpherePoint, k: float = 1.0,
                   frame: TangentFrame | None = None) -> np.ndarray:
    val, _, H = derivatives(w, x, frame)
    return H + k * k * val * np.eye(H.shape[0])


def default_floor(wmax: float) -> float:
    return 1e-8 * (1.0 + abs(wmax))


def s_field(w: ScalarField, x: SpherePoint, A: float, w_floor: float | None = None,
            k: float = 1.0) -> float:
    """S-invariant ``(k^2 w^2 + |grad w|^2 + A) / (2 k w)``; undefined on the zero set."""
    val = w.value(x)
    if w_floor is None:
        w_floor = default_floor(val)
    if abs(val) <= w_floor:
        raise ZeroSetError(f"|w(x)| = {abs(val):.3g} is below the floor {w_floor:.3g}")
    g = w.grad(x)
    return float((k * k * val * val + g @ g + A) / (2 * k * val))


@dataclass
class SStats:
    mean: float
    max_dev: float
    count: int
    excluded: int


def _s_stats(vals: np.ndarray, grads2: np.ndarray, A: float, k: float = 1.0) -> SStats:
    floor = default_floor(np.max(np.abs(vals)))
    ok = np.abs(vals) > floor
    if ok.sum() < 2:
        raise ZeroSetError("fewer than 2 samples off the zero set")
    s = (k * k * vals[ok] ** 2 + grads2[ok] + A) / (2 * k * vals[ok])
    mean = float(np.mean(s))
    return SStats(mean, float(np.max(np.abs(s - mean))), int(ok.sum()), int((~ok).sum()))


def s_constancy(w: ScalarField, samples: list[SpherePoint], A: float, k: float = 1.0) -> SStats:
    """Mean and max deviation of the S-invariant over ``samples`` off the zero set."""
    vals = np.array([w.value(x) for x in samples])
    grads2 = np.array([np.sum(w.grad(x) ** 2) for x in samples])
    return _s_stats(vals, grads2, A, k)


def obata_shifted_residual(w: ScalarField, x: SpherePoint, S: float,
                           frame: TangentFrame | None = None) -> np.ndarray:
    """``Hess w + (w - S) I``."""
    _unit_sphere(w)
    val, _, H = derivatives(w, x, frame)
    return H + (val - S) * np.eye(H.shape[0])


def trace_residual(w: ScalarField, x: SpherePoint, S: float) -> float:
    """``Lap w + n (w - S)``."""
    _unit_sphere(w)
    return laplacian(w, x) + x.n * (w.value(x) - S)


def schouten_residual(w: ScalarField, x: SpherePoint, c2: float,
                      frame: TangentFrame | None = None) -> np.ndarray:
    """Residual of the system rewritten for ``u = log w``:
    ``e^{2u} [Hess u + du (x) du + (1 - |du|^2)/2 h] - (c^2 - 1)/2 h``."""
    _unit_sphere(w)
    if frame is None:
        frame = tangent_frame(x)
    val, g, H = derivatives(w, x, frame)
    if not val > 0:
        raise PositivityError(f"w(x) = {val!r} must be positive to take log")
    gu = frame.basis @ g / val
    Hu = H / val - np.outer(gu, gu)
    n = H.shape[0]
    bracket = Hu + np.outer(gu, gu) + 0.5 * (1 - gu @ gu) * np.eye(n)
    return val * val * bracket - 0.5 * (c2 - 1) * np.eye(n)


# ---------------------------------------------------------------------------
# aggregation


def matrix_norm(R: np.ndarray) -> float:
    """Spectral norm of a symmetric matrix."""
    return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (R + R.T)))))


@dataclass
class NormStats:
    max: float
    rms: float

    @classmethod
    def of(cls, values) -> "NormStats":
        a = np.abs(np.asarray(values, dtype=float))
        if a.size == 0:
            return cls(0.0, 0.0)
        return cls(float(a.max()), float(np.sqrt(np.mean(a * a))))


@dataclass
class ResidualReport:
    systems: dict[str, NormStats] = field(default_factory=dict)
    s_stats: SStats | None = None
    sample_count: int = 0
    params: dict = field(default_factory=dict)
    path: str = "analytic"
    under_determined: bool = False
    notes: list[str] = field(default_factory=list)

    def worst(self) -> float:
        """Largest residual of any kind, including S deviation."""
        vals = [s.max for s in self.systems.values()]
        if self.s_stats is not None:
            vals.append(self.s_stats.max_dev)
        return max(vals, default=0.0)

    def to_dict(self) -> dict:
        return asdict(self)


def residual_report(w: ScalarField, samples: list[SpherePoint], *, c2: float | None = None,
                    k: float | None = None, S: float | None = None, A: float | None = None,
                    schouten: bool = False) -> ResidualReport:
    """Evaluate every applicable system at ``samples``.

    ``eq1`` needs ``c2``; with ``k`` the radius-``1/k`` variants of every system
    are used (shifted Obata becomes ``Hess w + k^2 (w - S/k) h``). ``obata_shifted``
    and ``trace`` need ``S``. The S-invariant uses ``A``, defaulting to ``c2 - 1``.
    """
    rep = ResidualReport(sample_count=len(samples), path=w.path,
                         params={"c2": c2, "k": k, "S": S, "A": A})
    if A is None and c2 is not None:
        A = c2 - 1
        rep.params["A"] = A
    kk = 1.0 if k is None else float(k)
    out: dict[str, list[float]] = {}
    vals, grads2 = [], []
    for x in samples:
        fr = tangent_frame(x)
        val, g, H = derivatives(w, x, fr)
        vals.append(val)
        grads2.append(g @ g)
        I = np.eye(H.shape[0])
        if c2 is not None:
            R = 2 * val * H + (kk * kk * val * val - g @ g - c2 + 1) * I
            out.setdefault("eq1" if k is None else "eq1k", []).append(matrix_norm(R))
            if schouten and k is None and val > 0:
                out.setdefault("schouten", []).append(matrix_norm(schouten_residual(w, x, c2, fr)))
        if S is not None:
            shifted = H + kk * kk * (val - S / kk) * I
            out.setdefault("obata_shifted", []).append(matrix_norm(shifted))
            out.setdefault("trace", []).append(abs(np.trace(shifted)))
    rep.systems = {name: NormStats.of(v) for name, v in out.items()}
    if A is not None:
        try:
            rep.s_stats = _s_stats(np.array(vals), np.array(grads2), A, kk)
        except ZeroSetError as exc:
            rep.notes.append(str(exc))
    return rep
