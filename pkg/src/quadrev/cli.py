"""Command-line interface.

Exit codes: 0 success, 2 input error, 3 degenerate geometry, 4 verification
failure. Errors are written to stderr as a JSON object ``{code, message}``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateGeometryError, QuadricError, UnrepresentableError
from .fitting import FitResult, Tolerances, fit_arrays, verify_arrays
from .quadric import (Kind, QuadricParams, SolutionParams, geometric_elements, lift, parse_kind,
                      quadric_to_solution, sample_directions, solution_to_quadric)
from .residuals import ResidualReport, residual_report
from .sphere import AffineField, GenericField, SpherePoint, convergence_scan, sample_sphere

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE, EXIT_VERIFY = 0, 2, 3, 4


class CLIError(Exception):
    def __init__(self, message: str, exit_code: int = EXIT_INPUT, code: str = "input_error"):
        super().__init__(message)
        self.exit_code = exit_code
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIError(message, EXIT_INPUT, "usage")


@dataclass
class RunConfig:
    command: str
    dim: int = 2
    axis: np.ndarray | None = None
    kind: str | None = None
    f: float | None = None
    eps: float | None = None
    c2: float | None = None
    C: float | None = None
    S: float | None = None
    branch: str = "plus"
    k: float | None = None
    radius: float | None = None
    count: int = 100
    seed: int | None = None
    noise_sigma: float = 0.0
    tol: Tolerances = field(default_factory=Tolerances)
    weights: str | None = None
    input: Path | None = None
    output: Path | None = None
    metadata: Path | None = None
    fmt: str = "csv"
    radial_schema: bool = False
    fail_above: float = 1e-8
    fixture: str | None = None
    hs: list[float] = field(default_factory=list)


# ---------------------------------------------------------------------------
# serialisation


def _num(x) -> str:
    return format(float(x), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, Kind):
        return obj.value
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _write(text: str, path: Path | None):
    if path is None:
        sys.stdout.write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")


def write_table(header: list[str], rows: np.ndarray) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(_num(v) for v in r) + "\n")
    return buf.getvalue()


def read_samples(path: Path) -> tuple[np.ndarray, np.ndarray]:
    """Read ``x0..xn,rho`` or ``p0..pn`` CSV; return unit directions and radii."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc}") from None
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise CLIError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float).reshape(-1, len(header))
    except ValueError as exc:
        raise CLIError(f"malformed CSV {path}: {exc}") from None
    m = len(header)
    if header == [f"x{i}" for i in range(m - 1)] + ["rho"]:
        X, rho = data[:, :-1], data[:, -1]
        norms = np.linalg.norm(X, axis=1)
        if np.any(np.abs(norms - 1) > 1e-9):
            raise CLIError("direction columns must hold unit vectors")
        X = X / norms[:, None]
    elif header == [f"p{i}" for i in range(m)]:
        rho = np.linalg.norm(data, axis=1)
        if np.any(rho == 0):
            raise CLIError("a surface point coincides with the focus")
        X = data / rho[:, None]
    else:
        raise CLIError(f"unrecognised CSV header {header}; expected x0..xn,rho or p0..pn")
    if X.shape[1] < 3:
        raise CLIError("need at least 3 coordinates per sample (n >= 2)")
    if not np.all(np.isfinite(data)) or np.any(rho <= 0):
        raise CLIError("radial values must be finite and positive")
    return X, rho


# ---------------------------------------------------------------------------
# parameter assembly


def _axis(cfg: RunConfig) -> np.ndarray:
    if cfg.axis is None:
        return np.eye(cfg.dim + 1)[-1]
    if cfg.axis.size != cfg.dim + 1:
        raise CLIError(f"axis has {cfg.axis.size} components, expected {cfg.dim + 1}")
    return cfg.axis / np.linalg.norm(cfg.axis)


def _quadric_and_solution(cfg: RunConfig) -> tuple[QuadricParams, SolutionParams | None]:
    axis = _axis(cfg)
    if cfg.kind is not None:
        if cfg.c2 is not None or cfg.C is not None:
            raise CLIError("give either --kind/--f/--eps or --c2/--C, not both")
        kind = parse_kind(cfg.kind)
        if cfg.f is None:
            raise CLIError("--f is required with --kind")
        eps = cfg.eps
        if eps is None:
            eps = {Kind.PARABOLOID: 1.0, Kind.HYPERPLANE: 0.0, Kind.CENTERED_SPHERE: 0.0}.get(kind)
            if eps is None:
                raise CLIError("--eps is required for this kind")
        q = QuadricParams(kind, cfg.f, eps, axis)
        sol = None if kind is Kind.CENTERED_SPHERE else quadric_to_solution(q)
        return q, sol
    if cfg.c2 is None or cfg.C is None:
        raise CLIError("specify the surface by --kind/--f/--eps or by --c2/--C")
    sol = SolutionParams(cfg.c2, cfg.C, axis, cfg.branch)
    return solution_to_quadric(sol), sol


def _quadric_dict(q: QuadricParams) -> dict:
    return {"kind": q.kind.value, "f": q.f, "eps": q.eps, "axis": q.xi}


def _solution_dict(sol: SolutionParams | None) -> dict | None:
    if sol is None:
        return None
    return {"c2": sol.c2, "C": sol.C, "xi": sol.xi, "branch": sol.branch, "S": sol.S}


def _elements_dict(q: QuadricParams) -> dict | None:
    if q.kind not in (Kind.ELLIPSOID, Kind.HYPERBOLOID_SHEET):
        return None
    el = geometric_elements(q)
    return {"center": el.center, "second_focus": el.second_focus, "a": el.a, "b": el.b}


def _need_seed(cfg: RunConfig):
    if cfg.seed is None:
        raise CLIError(f"{cfg.command} is stochastic and requires --seed")
    if cfg.seed < 0:
        raise CLIError("--seed must be non-negative")


def _fit_dict(fit: FitResult) -> dict:
    sol = None
    if fit.quadric is not None and fit.kind is not Kind.CENTERED_SPHERE:
        sol = _solution_dict(quadric_to_solution(fit.quadric))
    return {
        "S": fit.S, "v": fit.v, "C": fit.C, "axis": fit.axis, "c2": fit.c2,
        "kind": fit.kind.value, "rms_residual": fit.rms_residual, "condition": fit.condition,
        "n_samples": fit.n_samples, "stderr": fit.stderr, "tolerances": fit.tolerances,
        "quadric": None if fit.quadric is None else _quadric_dict(fit.quadric),
        "solution": sol,
        "excluded_branch": fit.kind is Kind.CENTERED_SPHERE,
    }


def _report_dict(rep: ResidualReport, fail_above: float) -> dict:
    d = rep.to_dict()
    d["worst"] = rep.worst()
    d["fail_above"] = fail_above
    d["passed"] = rep.worst() <= fail_above
    return d


# ---------------------------------------------------------------------------
# commands


def cmd_generate(cfg: RunConfig) -> int:
    _need_seed(cfg)
    if cfg.count < 1:
        raise CLIError("--count must be at least 1")
    if cfg.noise_sigma < 0:
        raise CLIError("--noise-sigma must be non-negative")
    q, sol = _quadric_and_solution(cfg)
    X = sample_directions(q, cfg.count, cfg.seed)
    P = lift(q, X)
    rho = np.linalg.norm(P, axis=1)
    if cfg.noise_sigma > 0:
        z = np.random.default_rng([cfg.seed, 2**32 - 2]).standard_normal(cfg.count)
        rho = rho * (1 + cfg.noise_sigma * z)
        if np.any(rho <= 0):
            raise CLIError("noise produced non-positive radial values; lower --noise-sigma")
        P = rho[:, None] * X
    dim = X.shape[1]
    if cfg.radial_schema:
        header, rows = [f"x{i}" for i in range(dim)] + ["rho"], np.column_stack([X, rho])
    else:
        header, rows = [f"p{i}" for i in range(dim)], P
    meta = {
        "command": "generate", "count": cfg.count, "seed": cfg.seed, "dim": dim - 1,
        "noise_sigma": cfg.noise_sigma, "schema": header,
        "quadric": _quadric_dict(q), "solution": _solution_dict(sol), "elements": _elements_dict(q),
    }
    if cfg.fmt == "json":
        _write(_dumps({"metadata": meta, "header": header, "rows": rows}), cfg.output)
    else:
        _write(write_table(header, rows), cfg.output)
        meta_path = cfg.metadata
        if meta_path is None and cfg.output is not None:
            meta_path = cfg.output.with_suffix(".json")
        if meta_path is not None:
            _write(_dumps(meta), meta_path)
    return EXIT_OK


def cmd_fit(cfg: RunConfig) -> int:
    if cfg.input is None:
        raise CLIError("fit requires --input")
    X, rho = read_samples(cfg.input)
    fit = fit_arrays(X, rho, weights=cfg.weights, tol=cfg.tol)
    _write(_dumps(_fit_dict(fit)), cfg.output)
    return EXIT_OK


def _quadratic_fixture(axis):
    return GenericField(lambda p: 1.0 + (p @ axis) ** 2)


FIXTURES = {"quadratic": _quadratic_fixture}


def cmd_verify(cfg: RunConfig) -> int:
    if cfg.input is not None:
        X, rho = read_samples(cfg.input)
        fit = fit_arrays(X, rho, weights=cfg.weights, tol=cfg.tol)
        rep = verify_arrays(X, rho, fit)
        out = {"fit": _fit_dict(fit), "report": _report_dict(rep, cfg.fail_above)}
    else:
        _need_seed(cfg)
        axis = _axis(cfg)
        pts_unit = None
        if cfg.fixture is not None:
            if cfg.fixture not in FIXTURES:
                raise CLIError(f"unknown fixture {cfg.fixture!r}; choose from {sorted(FIXTURES)}")
            c2 = 1.0 if cfg.c2 is None else cfg.c2
            w = FIXTURES[cfg.fixture](axis)
            pts_unit = sample_sphere(cfg.dim, cfg.count, seed=cfg.seed)
            probe = residual_report(w, pts_unit, A=c2 - 1)
            S = probe.s_stats.mean if probe.s_stats is not None else 0.0
            rep = residual_report(w, pts_unit, c2=c2, S=S, schouten=True)
            out = {"fixture": cfg.fixture, "report": _report_dict(rep, cfg.fail_above)}
        else:
            if cfg.c2 is None or cfg.C is None:
                raise CLIError("verify needs --input, --fixture, or --c2 and --C")
            sol = SolutionParams(cfg.c2, cfg.C, axis, cfg.branch)
            k = cfg.k
            radius = cfg.radius
            if k is None and radius is not None:
                k = 1.0 / radius
            if k is not None:
                if not k > 0:
                    raise CLIError("--k must be positive")
                if radius is not None and abs(radius * k - 1) > 1e-12:
                    raise CLIError("--radius must equal 1/k")
                w = AffineField(sol.S / k, sol.v, radius=1.0 / k)
                pts = sample_sphere(cfg.dim, cfg.count, seed=cfg.seed, radius=1.0 / k)
                rep = residual_report(w, pts, c2=sol.c2, k=k, S=sol.S)
            else:
                w = sol.field()
                pts = sample_sphere(cfg.dim, cfg.count, seed=cfg.seed)
                rep = residual_report(w, pts, c2=sol.c2, S=sol.S, schouten=True)
            out = {"solution": _solution_dict(sol), "report": _report_dict(rep, cfg.fail_above)}
    _write(_dumps(out), cfg.output)
    return EXIT_OK if out["report"]["passed"] else EXIT_VERIFY


def cmd_classify(cfg: RunConfig) -> int:
    from .fitting import classify
    if cfg.C is None:
        raise CLIError("classify needs --C and one of --S or --c2")
    if cfg.S is not None:
        S = cfg.S
    elif cfg.c2 is not None:
        S = SolutionParams(cfg.c2, abs(cfg.C), _axis(cfg), cfg.branch).S
    else:
        raise CLIError("classify needs --S or --c2")
    kind = classify(S, cfg.C, cfg.tol)
    out = {"S": S, "C": cfg.C, "c2": S * S - cfg.C**2 + 1, "kind": kind.value,
           "tolerances": cfg.tol.resolve(S, cfg.C), "excluded_branch": kind is Kind.CENTERED_SPHERE}
    _write(_dumps(out), cfg.output)
    return EXIT_OK


def cmd_elements(cfg: RunConfig) -> int:
    q, sol = _quadric_and_solution(cfg)
    el = _elements_dict(q)
    if el is None:
        raise CLIError(f"{q.kind.value} has no centre or second focus", code="no_elements")
    _write(_dumps({"quadric": _quadric_dict(q), "solution": _solution_dict(sol), "elements": el}),
           cfg.output)
    return EXIT_OK


def cmd_residual_scan(cfg: RunConfig) -> int:
    _need_seed(cfg)
    if not cfg.hs:
        raise CLIError("residual-scan needs a non-empty --h list")
    if any(not h > 0 for h in cfg.hs):
        raise CLIError("step sizes must be positive")
    c2 = 2.0 if cfg.c2 is None else cfg.c2
    C = 1.0 if cfg.C is None else cfg.C
    sol = SolutionParams(c2, C, _axis(cfg), cfg.branch)
    pts = sample_sphere(cfg.dim, cfg.count, seed=cfg.seed)
    scan = convergence_scan(sol.field(), pts, cfg.hs)
    if cfg.fmt == "json":
        _write(_dumps({"rows": [r.__dict__ for r in scan.rows], "fitted_order": scan.fitted_order,
                       "order_reliable": scan.order_reliable}), cfg.output)
    else:
        buf = io.StringIO()
        buf.write("h,max_error,roundoff_bound,reliable,order\n")
        for r in scan.rows:
            order = "" if r.order is None else _num(r.order)
            buf.write(f"{_num(r.h)},{_num(r.max_error)},{_num(r.roundoff_bound)},"
                      f"{str(r.reliable).lower()},{order}\n")
        fitted = "" if scan.fitted_order is None else _num(scan.fitted_order)
        buf.write(f"fitted,,,{str(scan.order_reliable).lower()},{fitted}\n")
        _write(buf.getvalue(), cfg.output)
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate, "fit": cmd_fit, "verify": cmd_verify, "classify": cmd_classify,
    "elements": cmd_elements, "residual-scan": cmd_residual_scan,
}


# ---------------------------------------------------------------------------
# argument parsing


def _vector(text: str) -> np.ndarray:
    try:
        v = np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not np.linalg.norm(v) > 0:
        raise argparse.ArgumentTypeError("axis must be nonzero")
    return v


def _floats(text: str) -> list[float]:
    if not text.strip():
        return []
    try:
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="quadrev", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--dim", type=int, default=2, help="sphere dimension n (>= 2)")
        sp.add_argument("--axis", type=_vector, help="axis as comma-separated components")
        sp.add_argument("--output", type=Path)

    def surface(sp):
        sp.add_argument("--kind")
        sp.add_argument("--f", type=float)
        sp.add_argument("--eps", type=float)
        sp.add_argument("--c2", type=float)
        sp.add_argument("--C", type=float)
        sp.add_argument("--branch", choices=["plus", "minus"], default="plus")

    def tolerances(sp):
        sp.add_argument("--tol-c", type=float)
        sp.add_argument("--tol-S", type=float)
        sp.add_argument("--tol-C", type=float)
        sp.add_argument("--z", type=float, default=5.0, help="standard errors per band")
        sp.add_argument("--weights", choices=["none", "rho2"], default="none")

    g = sub.add_parser("generate", help="sample a quadric point cloud")
    common(g)
    surface(g)
    g.add_argument("--count", type=int, default=100)
    g.add_argument("--seed", type=int)
    g.add_argument("--noise-sigma", type=float, default=0.0)
    g.add_argument("--metadata", type=Path)
    g.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")
    g.add_argument("--radial", dest="radial_schema", action="store_true",
                   help="write x0..xn,rho instead of p0..pn")

    f = sub.add_parser("fit", help="fit and classify radial samples")
    common(f)
    f.add_argument("--input", type=Path)
    tolerances(f)

    v = sub.add_parser("verify", help="residual report for a fit, a solution, or a fixture")
    common(v)
    v.add_argument("--input", type=Path)
    v.add_argument("--c2", type=float)
    v.add_argument("--C", type=float)
    v.add_argument("--branch", choices=["plus", "minus"], default="plus")
    v.add_argument("--k", type=float)
    v.add_argument("--radius", type=float)
    v.add_argument("--samples", dest="count", type=int, default=200)
    v.add_argument("--seed", type=int)
    v.add_argument("--fixture", help="built-in non-solution field: " + ", ".join(FIXTURES))
    v.add_argument("--fail-above", type=float, default=1e-8)
    tolerances(v)

    c = sub.add_parser("classify", help="classify (S, C)")
    common(c)
    c.add_argument("--S", type=float)
    c.add_argument("--c2", type=float)
    c.add_argument("--C", type=float)
    c.add_argument("--branch", choices=["plus", "minus"], default="plus")
    tolerances(c)

    e = sub.add_parser("elements", help="centre, second focus and semi-axes")
    common(e)
    surface(e)

    r = sub.add_parser("residual-scan", help="finite-difference Hessian convergence table")
    common(r)
    r.add_argument("--h", dest="hs", type=_floats, required=True)
    r.add_argument("--c2", type=float)
    r.add_argument("--C", type=float)
    r.add_argument("--branch", choices=["plus", "minus"], default="plus")
    r.add_argument("--samples", dest="count", type=int, default=50)
    r.add_argument("--seed", type=int)
    r.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    d = vars(ns).copy()
    tol = Tolerances(d.pop("tol_c", None), d.pop("tol_S", None), d.pop("tol_C", None),
                     d.pop("z", 5.0))
    weights = d.pop("weights", "none")
    cfg = RunConfig(tol=tol, weights=None if weights == "none" else weights,
                    **{k: v for k, v in d.items() if k in RunConfig.__dataclass_fields__})
    if cfg.dim < 2:
        raise CLIError("--dim must be at least 2")
    return cfg


def _fail(code: str, message: str, exit_code: int) -> int:
    sys.stderr.write(json.dumps({"code": code, "message": message}) + "\n")
    return exit_code


def main(argv: list[str] | None = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = config_from_args(ns)
        return COMMANDS[cfg.command](cfg)
    except CLIError as exc:
        return _fail(exc.code, str(exc), exc.exit_code)
    except DegenerateGeometryError as exc:
        return _fail("degenerate_geometry", str(exc), EXIT_DEGENERATE)
    except UnrepresentableError as exc:
        return _fail("unrepresentable", str(exc), EXIT_INPUT)
    except QuadricError as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_INPUT)
    except (ValueError, ArithmeticError) as exc:
        return _fail("input_error", str(exc), EXIT_INPUT)


if __name__ == "__main__":
    sys.exit(main())
