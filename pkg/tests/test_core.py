import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from _reference import mtls_reference
from conftest import problem_family, random_problem
from mtlscond import (
    MtlsProblem,
    WeightPattern,
    eigen_system_residual,
    genericity_gap,
    rayleigh_quotient,
    solve,
    stationarity_residual,
    stationarity_tolerance,
    tls_solve,
)
from mtlscond.errors import ConsistentSystem, DimensionError, NonGeneric
from mtlscond.experiments import gen_gap_controlled, gen_intercept, gen_transfer_function, rng_for


def test_golden_tls(golden_tls):
    s = solve(golden_tls)
    assert s.x[0] == pytest.approx((math.sqrt(5) - 1) / 2, abs=1e-12)
    assert s.sigma2 == pytest.approx(3 - math.sqrt(5), abs=1e-12)
    assert rayleigh_quotient(golden_tls, s.x) == pytest.approx(3 - math.sqrt(5), abs=1e-12)
    assert eigen_system_residual(s) <= 1e-12
    assert stationarity_residual(s) <= 1e-12 * np.linalg.norm(s.A.T @ s.r)


def test_golden_ls(golden_ls):
    s = solve(golden_ls)
    assert s.x[0] == pytest.approx(2.0, abs=1e-12)
    assert s.gap == math.inf
    assert s.sigma2 == pytest.approx(s.r_norm**2)
    # W = 0: the top rows of the eigen system are the normal equations
    assert eigen_system_residual(s) <= 1e-14


def test_decoupled(decoupled):
    s = solve(decoupled)
    np.testing.assert_allclose(s.x, [1.0, 0.0], atol=1e-12)
    assert math.sqrt(s.sigma2) == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(s.r, [0.0, 0.0, -0.5], atol=1e-12)
    assert rayleigh_quotient(decoupled, np.array([1.0, 0.0])) == pytest.approx(0.25)
    assert stationarity_residual(s) <= 1e-15
    assert eigen_system_residual(s) <= 1e-14
    assert s.gap == pytest.approx(0.5, abs=1e-12)


def test_consistent_system():
    with pytest.raises(ConsistentSystem):
        solve(MtlsProblem(np.array([[1.0], [0.0]]), np.array([2.0, 0.0]), 1))


def test_genericity_gap_zero_is_nongeneric():
    # R22 = [1; 0], R2b = [0; 1]: both singular values of [R22, R2b] equal 1
    A = np.array([[1.0], [0.0]])
    b = np.array([0.0, 1.0])
    p = MtlsProblem(A, b, 0)
    assert genericity_gap(p) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(NonGeneric):
        solve(p)


def test_genericity_gap_decoupled_and_ls(decoupled, golden_ls):
    assert genericity_gap(decoupled) == pytest.approx(0.5)
    assert genericity_gap(golden_ls) == math.inf


def test_rayleigh_quotient_at_zero():
    p = random_problem(1)
    assert rayleigh_quotient(p, np.zeros(p.n)) == pytest.approx(p.b @ p.b)


def test_weight_pattern():
    w = WeightPattern(2, 3)
    x = np.arange(1.0, 6.0)
    np.testing.assert_array_equal(w.apply(x), [0, 0, 3, 4, 5])
    assert w.quadratic(x) == 50.0
    np.testing.assert_array_equal(w.dense() @ x, w.apply(x))


def test_problem_validation():
    with pytest.raises(DimensionError):
        MtlsProblem(np.ones((2, 3)), np.ones(2), 0)
    with pytest.raises(DimensionError):
        MtlsProblem(np.ones((3, 2)), np.ones(2), 0)
    with pytest.raises(DimensionError):
        MtlsProblem(np.ones((3, 2)), np.ones(3), -1)
    p = MtlsProblem(np.array([1.0, 2.0]), np.array([1.0, 1.0]), 0)
    assert p.A.shape == (2, 1) and p.n2 == 1


def test_unknown_method():
    with pytest.raises(ValueError):
        solve(random_problem(0), method="cholesky")


@pytest.mark.parametrize("problem", problem_family(100, seed=1), ids=lambda p: f"{p.m}x{p.n}n1{p.n1}")
def test_solution_invariants(problem):
    s = solve(problem)
    assert s.gap > 0
    assert rayleigh_quotient(problem, s.x) == pytest.approx(s.sigma2, rel=1e-10)
    assert stationarity_residual(s) <= stationarity_tolerance(s)
    scale = np.linalg.norm(s.A, 2) * s.r_norm + s.sigma2 * np.linalg.norm(s.x)
    assert stationarity_residual(s) <= 1e-10 * scale
    assert eigen_system_residual(s) <= 1e-10


@pytest.mark.parametrize("seed", range(20))
def test_generator_outputs_satisfy_identities(seed):
    for problem in (
        gen_transfer_function(seed=seed),
        gen_gap_controlled(40, 20, seed % 20, 1e-3 if seed % 2 else 0.5, seed),
    ):
        s = solve(problem)
        scale = np.linalg.norm(s.A, 2) * s.r_norm + s.sigma2 * np.linalg.norm(s.x)
        assert stationarity_residual(s) <= 1e-10 * scale
        assert stationarity_residual(s) <= stationarity_tolerance(s)
        assert eigen_system_residual(s) <= 1e-10


@given(st.integers(0, 2**31))
def test_rayleigh_local_minimum(seed):
    p = random_problem(seed, 10, 4, 1)
    s = solve(p)
    rng = rng_for(seed + 1)
    for _ in range(5):
        d = rng.standard_normal(p.n)
        d *= 1e-4 / np.linalg.norm(d)
        assert rayleigh_quotient(p, s.x + d) >= s.sigma2 * (1 - 1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_reduces_to_tls_and_ls(seed):
    p = random_problem(seed, 15, 4, 0)
    np.testing.assert_allclose(solve(p).x, tls_solve(p.A, p.b), rtol=1e-10)
    q = random_problem(seed, 15, 4, 4)
    np.testing.assert_allclose(solve(q).x, np.linalg.lstsq(q.A, q.b, rcond=None)[0], rtol=1e-10)


@pytest.mark.parametrize("seed", range(10))
def test_orthogonal_invariance_tls(seed):
    p = random_problem(seed, 12, 5, 0)
    Q = np.linalg.qr(rng_for(seed + 99).standard_normal((12, 12)))[0]
    rotated = MtlsProblem(Q @ p.A, Q @ p.b, 0)
    np.testing.assert_allclose(solve(rotated).x, solve(p).x, rtol=1e-10)


@pytest.mark.parametrize("seed", range(10))
def test_methods_agree_on_well_scaled_problems(seed):
    p = random_problem(seed, 20, 6, 2)
    np.testing.assert_allclose(solve(p, method="vector").x, solve(p).x, rtol=1e-11, atol=1e-13)


@pytest.mark.parametrize("seed", range(3))
@pytest.mark.parametrize("n1", [0, 2])
def test_matches_high_precision_reference(seed, n1):
    p = random_problem(seed, 14, 5, n1)
    x_ref, s2_ref = mtls_reference(p)
    s = solve(p)
    np.testing.assert_allclose(s.x, x_ref, rtol=1e-12, atol=1e-14)
    assert s.sigma2 == pytest.approx(s2_ref, rel=1e-12)


def test_small_rhs_accuracy():
    # ||b|| is 1e-6 of ||A||: the default path keeps full relative accuracy
    p, _ = gen_intercept(30, "toeplitz", {"omega": 2, "lam": 1e-6}, 3)
    x_ref, s2_ref = mtls_reference(p)
    err = np.abs(solve(p).x - x_ref).max() / np.abs(x_ref).max()
    assert err <= 1e-13
    assert solve(p).sigma2 == pytest.approx(s2_ref, rel=1e-12)


@pytest.mark.parametrize("n1", [1, 3])
def test_normal_equation_cross_check(n1):
    p = random_problem(4, 16, 6, n1)
    s = solve(p)
    P = p.A.T @ p.A - s.sigma2 * p.weight.dense()
    np.testing.assert_allclose(np.linalg.solve(P, p.A.T @ p.b), s.x, rtol=1e-10)


def test_tie_in_trailing_singular_values_is_nongeneric():
    # [R22, R2b] = diag(2, 1, 1): the two smallest singular values coincide
    A = np.array([[2.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    b = np.array([0.0, 0.0, 1.0])
    with pytest.raises(NonGeneric):
        solve(MtlsProblem(A, b, 0))
