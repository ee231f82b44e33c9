import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import problem_family, random_problem
from mtlscond import (
    MtlsProblem,
    MtlsSolution,
    componentwise_ratio,
    condition_report,
    jacobian_new,
    kappa1,
    kappa2,
    kappa3,
    kappa4,
    kappa_full,
    kappa_zy28,
    kappa_zy_new,
    mixed_compw_exact,
    mixed_compw_upper,
    norm_k,
    norm_k_zy,
    p_inverse_block,
    perturbation_bound,
    perturbation_bound_coefficients,
    predict_delta_x_compact,
    relative,
    solve,
)
from mtlscond.errors import NonGeneric, SizeOverflow
from mtlscond.experiments import gen_gap_controlled, gen_transfer_function, rng_for
from mtlscond.kernels import spectral_norm
from mtlscond.io import dumps

FAMILY = problem_family(100, seed=4)


def _ids(p):
    return f"{p.m}x{p.n}n1{p.n1}"


@pytest.mark.parametrize("problem", FAMILY, ids=_ids)
def test_compact_forms_agree(problem):
    s = solve(problem)
    ref = norm_k(s)
    for value in (kappa1(s), kappa2(s), kappa3(s), kappa4(s), kappa_zy_new(s), norm_k_zy(s)):
        assert value == pytest.approx(ref, rel=1e-8)
    assert kappa_zy_new(s) == pytest.approx(kappa2(s), rel=1e-10)
    assert kappa4(s, branch=-1) == pytest.approx(kappa4(s), rel=1e-10)


@pytest.mark.parametrize("problem", FAMILY[:40], ids=_ids)
def test_p_inverse_block(problem):
    s = solve(problem)
    P = problem.A.T @ problem.A - s.sigma2 * problem.weight.dense()
    P_inv = p_inverse_block(s.fact, s.sigma2)
    np.testing.assert_allclose(P_inv, np.linalg.inv(P), rtol=1e-9, atol=1e-9 * np.abs(P_inv).max())
    assert np.linalg.norm(P_inv @ P - np.eye(problem.n)) <= 1e-10


def test_p_inverse_tls_reduces_to_shifted_inverse():
    s = solve(random_problem(3, 12, 4, 0))
    R22 = s.fact.R22
    np.testing.assert_allclose(
        p_inverse_block(s.fact, s.sigma2), np.linalg.inv(R22.T @ R22 - s.sigma2 * np.eye(4)), rtol=1e-10
    )


def test_p_inverse_singular_shift():
    s = solve(random_problem(3, 12, 4, 1))
    smallest = np.linalg.svd(s.fact.R22, compute_uv=False)[-1]
    with pytest.raises(NonGeneric):
        p_inverse_block(s.fact, smallest**2)


def test_zy28_differs_on_transfer_function():
    s = solve(gen_transfer_function(seed=0))
    assert abs(kappa_zy28(s) / kappa2(s) - 1) > 1e-6
    assert kappa2(s) == pytest.approx(norm_k(s), rel=1e-8)


def test_zy28_equals_kappa2_when_wx_vanishes(decoupled):
    s = solve(decoupled)
    assert np.all(s.Wx == 0)
    assert kappa_zy28(s) == pytest.approx(kappa2(s), rel=1e-14)
    assert kappa_zy_new(s) == pytest.approx(kappa2(s), rel=1e-14)


def test_tls_and_ls_reductions():
    for n1 in (0, 4):
        s = solve(random_problem(6, 15, 4, n1))
        assert kappa3(s) == pytest.approx(norm_k(s), rel=1e-8)
        assert kappa4(s) == pytest.approx(norm_k(s), rel=1e-8)


@pytest.mark.parametrize("seed", range(5))
def test_kappa_full_relative_and_scale_invariance(seed):
    p = random_problem(seed, 14, 5, 2)
    s = solve(p)
    assert kappa_full(s) == pytest.approx(relative(s, kappa4(s)), rel=1e-8)
    scaled = solve(MtlsProblem(10 * p.A, 10 * p.b, p.n1))
    assert kappa_full(scaled) == pytest.approx(kappa_full(s), rel=1e-10)
    rep, rep_s = condition_report(s), condition_report(scaled)
    for key in ("kappa_rel", "mixed", "compw", "mixed_upper", "compw_upper"):
        assert getattr(rep_s, key) == pytest.approx(getattr(rep, key), rel=1e-10)


def test_perturbation_bound_zero_da():
    s = solve(random_problem(0))
    kappa_A, kappa_b = perturbation_bound_coefficients(s)
    assert perturbation_bound(s, 0.0, 0.3) == pytest.approx(kappa_b * 0.3 / np.linalg.norm(s.b))
    expected_b = np.linalg.norm(s.b) / np.linalg.norm(s.x) * spectral_norm(s.P_inv @ s.A.T)
    assert kappa_b == pytest.approx(expected_b)
    assert kappa_A > 0


@given(st.integers(0, 2**31))
def test_perturbation_bound_dominates_prediction(seed):
    s = solve(random_problem(seed % 500, 12, 5, 2))
    rng = rng_for(seed)
    dA, db = rng.standard_normal(s.A.shape), rng.standard_normal(s.A.shape[0])
    pred = predict_delta_x_compact(s, dA, db)
    bound = perturbation_bound(s, spectral_norm(dA), np.linalg.norm(db))
    assert np.linalg.norm(pred) / np.linalg.norm(s.x) <= bound * (1 + 1e-12)


@pytest.mark.parametrize("problem", FAMILY, ids=_ids)
def test_mixed_componentwise_dominated_by_upper(problem):
    s = solve(problem)
    m, c = mixed_compw_exact(s)
    mu, cu = mixed_compw_upper(s)
    assert m <= mu * (1 + 1e-10)
    assert c <= cu * (1 + 1e-10)
    assert m <= c * (1 + 1e-12)


def test_mixed_componentwise_from_definition():
    s = solve(random_problem(8, 10, 3, 1))
    K = jacobian_new(s)
    num = np.abs(K) @ np.abs(np.concatenate([s.A.reshape(-1, order="F"), s.b]))
    m, c = mixed_compw_exact(s)
    assert m == pytest.approx(num.max() / np.abs(s.x).max())
    assert c == pytest.approx(np.max(num / np.abs(s.x)))


def test_componentwise_ratio_convention():
    assert componentwise_ratio([0.0, 2.0], [0.0, 4.0]) == (0.5, False)
    assert componentwise_ratio([1.0, 2.0], [0.0, 4.0]) == (0.5, True)
    assert componentwise_ratio([0.0], [0.0]) == (0.0, False)


def test_componentwise_infinite_flag():
    # least squares with exact solution x = [1, 0]; the zero entry still moves under perturbation
    p = MtlsProblem(np.array([[1.0, 1.0], [1.0, -1.0], [0.0, 0.0]]), np.array([1.0, 1.0, 1.0]), 2)
    s = solve(p)
    x = np.array([1.0, 0.0])
    np.testing.assert_allclose(s.x, x, atol=1e-15)
    exact = MtlsSolution(problem=p, x=x, sigma2=1.0, r=p.A @ x - p.b, gap=s.gap, fact=s.fact)
    m, c = mixed_compw_exact(exact)
    mu, cu = mixed_compw_upper(exact)
    assert m == pytest.approx(2.0) and mu == pytest.approx(2.0)
    assert c == math.inf and cu == math.inf
    rep = condition_report(exact)
    assert rep.flags["compw_infinite"] and rep.flags["compw_upper_infinite"]
    assert rep.compw == pytest.approx(2.0) and rep.compw_upper == pytest.approx(2.0)
    assert "Infinity" not in dumps(rep)


def test_zero_entry_with_zero_numerator_is_finite(decoupled):
    # x2 = 0 here but no admissible perturbation moves it: 0/0 counts as 0
    m, c = mixed_compw_exact(solve(decoupled))
    assert math.isfinite(c) and m <= c


def test_upper_bounds_scale_linearly():
    s = solve(random_problem(2))
    mu, cu = mixed_compw_upper(s)
    eps2 = 3e-9
    assert (2 * eps2) * mu == 2 * (eps2 * mu)
    assert (2 * eps2) * cu == 2 * (eps2 * cu)


def test_condition_report_contents():
    s = solve(random_problem(1, 12, 5, 2))
    rep = condition_report(s)
    assert set(rep.kappa_variants) == {"k1", "k2", "k3", "k4", "k_full", "k_zy28", "k_zy_new"}
    assert rep.kappa_abs == rep.kappa_variants["k4"]
    assert rep.flags["used_explicit_K"] and rep.flags["used_cross_product"]
    assert not rep.flags["sigma2_is_ls_residual"]
    for key in ("k1", "k2", "k3", "k_full"):
        assert rep.kappa_variants[key] == pytest.approx(rep.kappa_abs, rel=1e-8)
    d = json.loads(dumps(rep))
    assert d["kappa_abs"] == pytest.approx(rep.kappa_abs)

    lean = condition_report(s, full_k=False, cross_product=False)
    assert set(lean.kappa_variants) == {"k3", "k4"}
    assert lean.mixed is None and not lean.flags["used_explicit_K"]
    assert lean.mixed_upper == rep.mixed_upper


def test_condition_report_respects_cap():
    s = solve(random_problem(1, 12, 5, 2))
    assert not condition_report(s, cap=10).flags["used_explicit_K"]
    with pytest.raises(SizeOverflow):
        condition_report(s, full_k=True, cap=10)


def test_condition_report_ls_flag(golden_ls):
    rep = condition_report(solve(golden_ls))
    assert rep.flags["sigma2_is_ls_residual"]
    assert rep.kappa_abs == pytest.approx(rep.kappa_variants["k_full"], rel=1e-8)


@pytest.mark.parametrize("e_p", [0.9, 0.0009])
def test_bound_close_to_normwise_on_gap_family(e_p):
    s = solve(gen_gap_controlled(60, 30, 10, e_p, 0))
    kappa_A, kappa_b = perturbation_bound_coefficients(s)
    kappa_rel = relative(s, kappa4(s))
    assert max(kappa_A, kappa_b) <= 10 * kappa_rel
