import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import unit
from quadrev.errors import ParameterError, PositivityError, ZeroSetError
from quadrev.residuals import (eq1_residual, eq1k_residual, obata_residual, obata_shifted_residual,
                               residual_report, s_constancy, s_field, schouten_residual,
                               trace_residual)
from quadrev.sphere import AffineField, GenericField, SpherePoint, project_to_sphere, sample_sphere

E1, E2, E3 = np.eye(3)
R2 = math.sqrt(2)
seeds = st.integers(0, 2**31 - 1)


def const(c, radius=1.0):
    return GenericField(lambda p: np.full(len(p), float(c)), radius=radius)


def random_solution(rng, n=2):
    """(S, C, xi, c2) with S^2 = C^2 + c2 - 1 across all three cases."""
    case = rng.integers(3)
    C = rng.uniform(0.25, 1.0) * rng.choice([-1, 1])
    if case == 0:
        c2 = rng.uniform(1.0, 10.0)
    elif case == 1:
        c2 = 1.0
    else:
        c2 = rng.uniform(1 - C * C, 1.0)
    S = math.sqrt(C * C + c2 - 1) * (rng.choice([-1, 1]) if c2 < 1 else 1)
    return S, C, unit(rng, n + 1), c2


# --- examples ---------------------------------------------------------------

def test_eq1_examples():
    w = AffineField(R2, E1)
    np.testing.assert_allclose(eq1_residual(w, SpherePoint(E2), 2.0), 0, atol=1e-15)
    np.testing.assert_allclose(eq1_residual(const(2), SpherePoint(E3), 5.0), 0, atol=1e-9)
    for x in sample_sphere(2, 10, seed=3):
        np.testing.assert_allclose(eq1_residual(const(2), x, 2.0), 3 * np.eye(2), atol=1e-8)


def test_eq1_requires_unit_sphere():
    with pytest.raises(ParameterError):
        eq1_residual(AffineField(1.0, E1, radius=2.0), SpherePoint(2 * E1, 2.0), 2.0)


def test_eq1k_examples():
    w = AffineField(R2, E1)
    x = project_to_sphere([0.2, 0.5, -0.3])
    np.testing.assert_allclose(eq1k_residual(w, x, 2.0, 1.0), eq1_residual(w, x, 2.0), atol=0)
    C, c2 = 0.7, 3.0
    S = math.sqrt(C * C + c2 - 1)
    for k in (0.5, 2.0):
        wk = AffineField(S / k, C * E3, radius=1 / k)
        for x in sample_sphere(2, 20, seed=1, radius=1 / k):
            np.testing.assert_allclose(eq1k_residual(wk, x, c2, k), 0, atol=1e-13)
    np.testing.assert_allclose(eq1k_residual(const(1, 0.5), SpherePoint(0.5 * E1, 0.5), 5.0, 2.0), 0,
                               atol=1e-8)
    with pytest.raises(ParameterError):
        eq1k_residual(w, x, 2.0, 2.0)


def test_obata_examples():
    w = AffineField(0.0, -1.7 * unit(np.random.default_rng(0), 3))
    for x in sample_sphere(2, 20, seed=0):
        np.testing.assert_allclose(obata_residual(w, x), 0, atol=1e-15)
    np.testing.assert_allclose(obata_residual(const(1), SpherePoint(E1)), np.eye(2), atol=1e-9)
    # w = <x, xi>^2 at x = xi: Gauss formula gives Hess = -2 I, so residual = -I
    q = GenericField(lambda p: (p @ E3) ** 2)
    R = obata_residual(q, SpherePoint(E3))
    np.testing.assert_allclose(R, -np.eye(2), atol=1e-6)


def test_s_field_examples():
    w = AffineField(R2, E1)
    assert s_field(w, SpherePoint(E1), 1.0) == pytest.approx(R2, abs=1e-15)
    assert s_field(w, SpherePoint(E2), 1.0) == pytest.approx(R2, abs=1e-15)
    parab = AffineField(1.0, E1)  # |C| + C<x, xi>, vanishes at -xi
    with pytest.raises(ZeroSetError):
        s_field(parab, SpherePoint(-E1), 0.0)


def test_s_constancy_examples():
    rng = np.random.default_rng(11)
    for _ in range(10):
        S, C, xi, c2 = random_solution(rng)
        st_ = s_constancy(AffineField(S, C * xi), sample_sphere(2, 100, seed=1), c2 - 1)
        assert st_.max_dev <= 1e-10
        assert st_.mean == pytest.approx(S, abs=1e-10)
    # closed form for w = 1 + t^2: S(t) = ((1+t^2)^2 + 4t^2(1-t^2)) / (2(1+t^2))
    pts = sample_sphere(2, 100, "fibonacci")
    t = np.array([p.coords @ E3 for p in pts])
    oracle = ((1 + t**2) ** 2 + 4 * t**2 * (1 - t**2)) / (2 * (1 + t**2))
    oracle_dev = np.max(np.abs(oracle - oracle.mean()))
    got = s_constancy(GenericField(lambda p: 1 + (p @ E3) ** 2), pts, 0.0)
    assert got.max_dev == pytest.approx(oracle_dev, rel=1e-6)
    assert got.max_dev > 0.1
    w0, A = 1.7, 0.4
    got = s_constancy(const(w0), pts, A)
    assert got.mean == pytest.approx((w0 * w0 + A) / (2 * w0), abs=1e-12)
    with pytest.raises(ZeroSetError):
        s_constancy(AffineField(1.0, E1), [SpherePoint(-E1), SpherePoint(E1)], 0.0)


def test_shifted_and_trace_examples():
    w = AffineField(R2, E1)
    wbar = AffineField(0.0, 0.6 * E2)
    for x in sample_sphere(2, 30, seed=5):
        np.testing.assert_allclose(obata_shifted_residual(w, x, R2), 0, atol=1e-15)
        np.testing.assert_allclose(obata_shifted_residual(wbar, x, 0.0), 0, atol=1e-15)
        assert abs(trace_residual(w, x, R2)) < 1e-14
        assert abs(trace_residual(const(5), x, 5.0)) < 1e-8
    np.testing.assert_allclose(obata_shifted_residual(const(1), SpherePoint(E3), 0.0), np.eye(2), atol=1e-9)
    # w = t^2: Lap = 2(1 - t^2) - 2n t^2 (Gauss formula), so residual = 2 - 2t^2 - 4t^2 + 2t^2
    x = project_to_sphere([0.3, 0.4, 0.2])
    t = x.coords @ E3
    q = GenericField(lambda p: (p @ E3) ** 2)
    assert trace_residual(q, x, 0.0) == pytest.approx(2 - 4 * t * t, abs=1e-6)
    assert abs(2 - 4 * t * t) > 0.1


def test_schouten_examples():
    rng = np.random.default_rng(2)
    C, c2 = 0.8, 2.5
    w = AffineField(math.sqrt(C * C + c2 - 1), C * unit(rng, 3))
    for x in sample_sphere(2, 30, seed=2):
        np.testing.assert_allclose(schouten_residual(w, x, c2), 0, atol=1e-14)
    np.testing.assert_allclose(schouten_residual(const(math.e), SpherePoint(E1), math.e**2 + 1), 0, atol=1e-8)
    with pytest.raises(PositivityError):
        schouten_residual(AffineField(0.0, E1), SpherePoint(-E1), 1.0)


# --- properties ---------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 4))
def test_schouten_is_half_eq1(seed, n):
    rng = np.random.default_rng(seed)
    xi = unit(rng, n + 1)
    a, b = rng.uniform(1.5, 3), rng.uniform(-1, 1)  # keeps w > 0
    c2 = rng.uniform(-1, 5)
    for w in (GenericField(lambda p: a + b * (p @ xi) + 0.3 * (p @ xi) ** 2),
              AffineField(a + 1.0, b * xi)):
        for x in sample_sphere(n, 5, seed=seed):
            np.testing.assert_allclose(schouten_residual(w, x, c2), eq1_residual(w, x, c2) / 2, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(2, 5))
def test_trace_consistency_and_isotropy(seed, n):
    rng = np.random.default_rng(seed)
    w = AffineField(rng.normal(), rng.standard_normal(n + 1))
    c2, S = rng.uniform(-2, 4), rng.normal()
    for x in sample_sphere(n, 5, seed=seed):
        R = obata_shifted_residual(w, x, S)
        assert abs(np.trace(R) - trace_residual(w, x, S)) <= 1e-10
        E = eq1_residual(w, x, c2)
        np.testing.assert_allclose(E, E[0, 0] * np.eye(n), atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_affine_identity(seed):
    """For the affine family the eq1 residual is (S^2 - C^2 - c2 + 1) I."""
    rng = np.random.default_rng(seed)
    S, C, c2 = rng.normal(), rng.normal(), rng.uniform(-2, 5)
    w = AffineField(S, C * unit(rng, 3))
    for x in sample_sphere(2, 5, seed=seed):
        np.testing.assert_allclose(eq1_residual(w, x, c2), (S * S - C * C - c2 + 1) * np.eye(2), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(seeds, st.floats(1e-7, 1e-3))
def test_near_solution_bounds(seed, delta):
    """A near-solution with eq1 residual tau has S deviation and shifted residual O(tau)."""
    rng = np.random.default_rng(seed)
    S, C, xi, c2 = random_solution(rng)
    xi2 = unit(rng, 3)
    w = GenericField(lambda p: S + C * (p @ xi) + delta * (p @ xi2) ** 2, fd_order=4)
    pts = [x for x in sample_sphere(2, 40, seed=seed) if abs(w.value(x)) > 0.1]
    if len(pts) < 2:
        return
    tau = max(np.abs(eq1_residual(w, x, c2)).max() for x in pts)
    wmin = min(abs(w.value(x)) for x in pts)
    dev = s_constancy(w, pts, c2 - 1).max_dev
    shifted = max(np.abs(obata_shifted_residual(w, x, S)).max() for x in pts)
    assert dev <= 20 * (tau + delta) / wmin
    assert shifted <= 20 * (tau + delta) / wmin


def test_excluded_branch_has_zero_residual():
    rep = residual_report(const(2.0), sample_sphere(2, 50, seed=0), c2=5.0)
    assert rep.systems["eq1"].max < 1e-8


def test_residual_report():
    S, C, c2 = math.sqrt(2), 1.0, 2.0
    w = AffineField(S, C * E1)
    rep = residual_report(w, sample_sphere(2, 100, seed=0), c2=c2, S=S, schouten=True)
    assert set(rep.systems) == {"eq1", "schouten", "obata_shifted", "trace"}
    assert rep.worst() <= 1e-12
    assert rep.path == "analytic" and rep.params["A"] == pytest.approx(1.0)
    assert all(s.max >= 0 and s.rms >= 0 for s in rep.systems.values())
    rep_fd = residual_report(w.as_generic(), sample_sphere(2, 20, seed=0), c2=c2, S=S)
    assert rep_fd.path == "fd" and rep_fd.worst() < 1e-6
    k = 2.0
    wk = AffineField(S / k, C * E1, radius=1 / k)
    rep_k = residual_report(wk, sample_sphere(2, 50, seed=0, radius=1 / k), c2=c2, k=k, S=S)
    assert set(rep_k.systems) == {"eq1k", "obata_shifted", "trace"}
    assert rep_k.worst() <= 1e-12
