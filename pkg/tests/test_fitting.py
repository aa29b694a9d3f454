import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_rotation, unit
from quadrev.errors import DegenerateGeometryError, ParameterError
from quadrev.fitting import (RadialSample, Tolerances, classify, fit_arrays, fit_inverse_radial,
                             verify_arrays, verify_solution)
from quadrev.quadric import Kind, QuadricParams, radial_array, sample_directions
from quadrev.sphere import SpherePoint, sphere_array

E1, E2, E3 = np.eye(3)
R2 = math.sqrt(2)
seeds = st.integers(0, 2**31 - 1)


def cloud(q, count=200, seed=0):
    X = sample_directions(q, count, seed)
    return X, radial_array(q, X)


def test_classify_examples():
    assert classify(R2, 1.0) is Kind.ELLIPSOID
    assert classify(1.0, 1.0) is Kind.PARABOLOID
    assert classify(0.0, 0.9) is Kind.HYPERPLANE
    assert classify(0.5, 1.0) is Kind.HYPERBOLOID_SHEET
    assert classify(-0.5, 1.0) is Kind.HYPERBOLOID_SHEET
    assert classify(2.0, 0.0) is Kind.CENTERED_SPHERE
    assert classify(1.0, 1.0 + 1e-3) is Kind.HYPERBOLOID_SHEET
    assert classify(1.0, 1.0 + 1e-3, Tolerances(tol_c=1e-2)) is Kind.PARABOLOID
    # standard errors widen the bands
    assert classify(1.0, 1.0 + 1e-4, stderr={"c2": 1e-4}) is Kind.PARABOLOID


def test_fit_examples():
    q = QuadricParams(Kind.ELLIPSOID, 1 / R2, 1 / R2, E3)
    fit = fit_arrays(*cloud(q))
    assert fit.S == pytest.approx(R2, abs=1e-10)
    assert fit.C == pytest.approx(1.0, abs=1e-10)
    assert np.linalg.norm(fit.axis + E3) <= 1e-10  # v = -C axis for a focal ellipsoid
    assert fit.kind is Kind.ELLIPSOID
    assert fit.c2 == fit.S**2 - fit.C**2 + 1 and fit.rms_residual >= 0

    plane = QuadricParams(Kind.HYPERPLANE, 1.0, 0.0, E2)
    fit = fit_arrays(*cloud(plane))
    assert abs(fit.S) <= 1e-10 and fit.kind is Kind.HYPERPLANE
    np.testing.assert_allclose(fit.quadric.xi, E2, atol=1e-10)

    X = sphere_array(2, 200, seed=1)
    fit = fit_arrays(X, np.full(200, 2.0))
    assert fit.C <= 1e-10 and fit.kind is Kind.CENTERED_SPHERE and fit.axis is None
    assert fit.quadric.kind is Kind.CENTERED_SPHERE and fit.quadric.f == pytest.approx(2.0)


def test_fit_errors():
    X = sphere_array(2, 3, seed=0)
    with pytest.raises(DegenerateGeometryError):
        fit_arrays(X, np.ones(3))
    # all directions on a great circle
    t = np.linspace(0, 2 * np.pi, 50, endpoint=False)
    ring = np.column_stack([np.cos(t), np.sin(t), np.zeros_like(t)])
    with pytest.raises(DegenerateGeometryError):
        fit_arrays(ring, np.ones(50))
    with pytest.raises(ParameterError):
        fit_arrays(sphere_array(2, 10), -np.ones(10))
    with pytest.raises(ParameterError):
        RadialSample(SpherePoint(E1), 0.0)
    with pytest.raises(ParameterError):
        fit_arrays(sphere_array(2, 10), np.ones(10), weights="bogus")
    with pytest.raises(DegenerateGeometryError):
        fit_inverse_radial([])


QS = [QuadricParams(Kind.ELLIPSOID, 1.0, 0.5, E3),
      QuadricParams(Kind.PARABOLOID, 1.0, 1.0, E1),
      QuadricParams(Kind.HYPERBOLOID_SHEET, 1.0, 1.5, E2),
      QuadricParams(Kind.HYPERBOLOID_SHEET, -0.7, 2.5, E1),
      QuadricParams(Kind.HYPERPLANE, 1.0, 0.0, E3)]


@pytest.mark.parametrize("q", QS, ids=lambda q: q.kind.value)
def test_exact_recovery(q):
    X, rho = cloud(q, 500, seed=2)
    fit = fit_inverse_radial([RadialSample(SpherePoint(x), r) for x, r in zip(X, rho)])
    w = q.reciprocal()
    assert abs(fit.S - w.S) <= 1e-9
    assert np.max(np.abs(fit.v - w.v)) <= 1e-9
    assert fit.kind is q.kind
    assert fit.quadric.f == pytest.approx(q.f, abs=1e-9)
    np.testing.assert_allclose(fit.quadric.xi, q.xi, atol=1e-9)
    rep = verify_arrays(X, rho, fit)
    assert rep.worst() <= 1e-9


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_rotation_equivariance(seed):
    rng = np.random.default_rng(seed)
    q = QuadricParams(Kind.ELLIPSOID, rng.uniform(0.3, 2), rng.uniform(0, 0.9), unit(rng, 3))
    X, rho = cloud(q, 100, seed)
    Q = random_rotation(rng, 3)
    a, b = fit_arrays(X, rho), fit_arrays(X @ Q.T, rho)
    assert abs(a.S - b.S) <= 1e-10
    np.testing.assert_allclose(b.v, Q @ a.v, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(0.01, 100.0))
def test_scale_law(seed, lam):
    rng = np.random.default_rng(seed)
    X = sphere_array(3, 60, seed=seed)
    rho = rng.uniform(0.5, 2.0, 60)  # arbitrary data: the law is algebraic
    a, b = fit_arrays(X, rho), fit_arrays(X, lam * rho)
    assert b.S == pytest.approx(a.S / lam, rel=1e-9, abs=1e-12)
    np.testing.assert_allclose(b.v, a.v / lam, rtol=1e-9, atol=1e-12)
    assert b.C / abs(b.S) == pytest.approx(a.C / abs(a.S), rel=1e-8)


@settings(max_examples=30, deadline=None)
@given(seeds, st.floats(1e-3, 1.0), st.integers(0, 3))
def test_monotone_residual(seed, delta, coord):
    rng = np.random.default_rng(seed)
    q = QuadricParams(Kind.ELLIPSOID, 1.0, 0.6, unit(rng, 3))
    X, rho = cloud(q, 100, seed)
    fit = fit_arrays(X, rho)
    beta = np.concatenate([[fit.S], fit.v])
    beta[coord] += delta * rng.choice([-1, 1])
    A = np.column_stack([np.ones(len(X)), X])
    rms_pert = np.sqrt(np.mean((A @ beta - 1 / rho) ** 2))
    assert fit.rms_residual <= rms_pert


def test_weights_rho2():
    q = QS[2]
    X, rho = cloud(q, 300, seed=3)
    fit = fit_arrays(X, rho, weights="rho2")
    assert abs(fit.S - 1.0) <= 1e-9 and fit.kind is q.kind
    noisy = rho * (1 + 1e-3 * np.random.default_rng(0).standard_normal(300))
    f0, f1 = fit_arrays(X, noisy), fit_arrays(X, noisy, weights="rho2")
    for f in (f0, f1):
        assert np.degrees(np.arccos(min(1, abs(f.axis @ q.xi)))) < 1


@pytest.mark.parametrize("eps", [0.3, 1.0, 1.5])
def test_noise_robustness(eps):
    q = QuadricParams(Kind.ELLIPSOID if eps < 1 else Kind.PARABOLOID if eps == 1 else Kind.HYPERBOLOID_SHEET,
                      1.0, eps, E3)
    good = 0
    for trial in range(100):
        X, rho = cloud(q, 500, seed=trial)
        rng = np.random.default_rng([trial, 99])
        fit = fit_arrays(X, rho * (1 + 1e-3 * rng.standard_normal(500)))
        ang = math.acos(min(1.0, abs(fit.axis @ q.xi)))
        good += ang <= 1e-2 and fit.kind is q.kind
    assert good >= 95


def test_verify_negative_control():
    X = sphere_array(2, 300, seed=5)
    rho = 1 / (1 + (X @ E3) ** 2)
    fit = fit_arrays(X, rho)
    rep = verify_arrays(X, rho, fit)
    assert rep.systems["reciprocity"].max > 1e-2
    assert rep.s_stats.max_dev > 1e-2


def test_verify_single_sample():
    q = QS[0]
    X, rho = cloud(q, 100, seed=0)
    fit = fit_arrays(X, rho)
    rep = verify_solution([RadialSample(SpherePoint(X[0]), rho[0])], fit)
    assert rep.under_determined and rep.sample_count == 1
    assert rep.s_stats is None and rep.notes
    assert rep.systems["reciprocity"].max <= 1e-12
    assert not verify_arrays(X, rho, fit).under_determined
