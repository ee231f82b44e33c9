import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mtlscond import kron, qr_partition, singular_values, spectral_norm, svd, unvec, vec, vec_permutation
from mtlscond.errors import DimensionError, RankDeficient, SizeOverflow
from mtlscond.experiments import rng_for
from mtlscond.kernels import check_dense_size, vec_permutation_indices

seeds = st.integers(0, 2**32 - 1)


def test_qr_partition_triangular_input():
    A = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    f = qr_partition(A, [1.0, 0.0, 0.5], 1)
    np.testing.assert_allclose(f.R11, [[1.0]], atol=1e-15)
    np.testing.assert_allclose(f.R12, [[0.0]], atol=1e-15)
    np.testing.assert_allclose(f.R1b, [1.0], atol=1e-15)
    np.testing.assert_allclose(f.trailing, [[1.0, 0.0], [0.0, 0.5]], atol=1e-15)


def test_qr_partition_sign_normalized():
    f = qr_partition(np.array([[-2.0], [0.0]]), [1.0, 1.0], 1)
    assert f.R11[0, 0] == pytest.approx(2.0, abs=1e-15)


def test_qr_partition_reconstruction_5x3():
    rng = rng_for(5)
    A, b = rng.standard_normal((5, 3)), rng.standard_normal(5)
    f = qr_partition(A, b, 1)
    Ab = np.column_stack([A, b])
    assert np.linalg.norm(f.Q @ f.assemble() - Ab) <= 1e-12 * np.linalg.norm(Ab)


@pytest.mark.parametrize("seed", range(100))
def test_qr_partition_residuals(seed):
    rng = rng_for(seed)
    n = int(rng.integers(1, 20))
    m = int(rng.integers(n, 51))
    n1 = int(rng.integers(0, n + 1))
    A, b = rng.standard_normal((m, n)), rng.standard_normal(m)
    f = qr_partition(A, b, n1)
    Ab = np.column_stack([A, b])
    assert np.linalg.norm(f.Q.T @ Ab - f.assemble()) <= 1e-12 * np.linalg.norm(Ab)
    assert np.linalg.norm(f.Q.T @ f.Q - np.eye(m)) <= 1e-12 * m
    assert np.all(np.diag(f.R11) >= 0)
    np.testing.assert_allclose(np.triu(f.R11), f.R11)


def test_qr_partition_implicit_q_matches_explicit():
    rng = rng_for(11)
    A, b = rng.standard_normal((30, 6)), rng.standard_normal(30)
    explicit = qr_partition(A, b, 2)
    implicit = qr_partition(A, b, 2, q_cap=10)
    assert implicit.Q is None
    np.testing.assert_allclose(implicit.assemble(), explicit.assemble(), atol=1e-13)
    M = rng.standard_normal((30, 3))
    np.testing.assert_allclose(implicit.apply_q(M), explicit.Q @ M, atol=1e-13)
    np.testing.assert_allclose(implicit.apply_q(implicit.assemble()), np.column_stack([A, b]), atol=1e-12)


def test_qr_partition_rank_deficient():
    A = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
    with pytest.raises(RankDeficient):
        qr_partition(A, [1.0, 0.0, 0.0], 1)
    with pytest.raises(RankDeficient):
        qr_partition(np.zeros((3, 1)), [1.0, 0.0, 0.0], 1)


@pytest.mark.parametrize(
    "A, b, n1",
    [
        (np.ones((2, 3)), np.ones(2), 0),  # m < n
        (np.ones((3, 2)), np.ones(4), 0),  # b length
        (np.ones((3, 2)), np.ones(3), 3),  # n1 > n
        (np.array([[np.nan], [1.0]]), np.ones(2), 0),
    ],
)
def test_qr_partition_dimension_errors(A, b, n1):
    with pytest.raises(DimensionError):
        qr_partition(A, b, n1)


def test_svd_examples():
    np.testing.assert_allclose(svd(np.diag([3.0, 1.0, 2.0]))[1], [3, 2, 1])
    np.testing.assert_allclose(svd(np.eye(4))[1], np.ones(4))
    s = svd(np.array([[2.0, 1.0], [0.0, 1.0]]))[1]
    np.testing.assert_allclose(s**2, [3 + np.sqrt(5), 3 - np.sqrt(5)], rtol=1e-14)


@given(seeds, st.integers(1, 8), st.integers(1, 8))
def test_svd_reconstruction_and_orthogonality(seed, p, q):
    M = rng_for(seed).standard_normal((p, q))
    U, s, Vt = svd(M)
    assert np.linalg.norm(U * s @ Vt - M) <= 1e-12 * max(np.linalg.norm(M), 1.0)
    k = min(p, q)
    np.testing.assert_allclose(U.T @ U, np.eye(k), atol=1e-12)
    np.testing.assert_allclose(Vt @ Vt.T, np.eye(k), atol=1e-12)
    assert np.all(np.diff(s) <= 0) and np.all(s >= 0)


def test_spectral_norm_examples():
    assert spectral_norm(np.eye(3)) == pytest.approx(1.0)
    assert spectral_norm(np.array([[0.0, 2.0], [0.0, 0.0]])) == pytest.approx(2.0)
    assert spectral_norm(np.zeros((0, 3))) == 0.0
    assert singular_values(np.zeros((0, 0))).size == 0


def test_spectral_norm_power_iteration_oracle():
    M = rng_for(7).standard_normal((6, 4))
    v = np.ones(4)
    for _ in range(500):
        v = M.T @ (M @ v)
        v /= np.linalg.norm(v)
    assert spectral_norm(M) == pytest.approx(np.linalg.norm(M @ v), rel=1e-10)


@given(seeds, st.integers(1, 7), st.integers(1, 7))
def test_spectral_norm_transpose_invariant(seed, p, q):
    M = rng_for(seed).standard_normal((p, q))
    assert spectral_norm(M) == pytest.approx(spectral_norm(M.T), rel=1e-12)


def test_vec_kron_examples():
    np.testing.assert_array_equal(vec(np.array([[1, 2], [3, 4]])), [1, 3, 2, 4])
    np.testing.assert_array_equal(kron(np.eye(2), [[5.0]]), np.diag([5.0, 5.0]))
    M = np.arange(6.0).reshape(2, 3)
    np.testing.assert_array_equal(unvec(vec(M), 2, 3), M)


def test_vec_permutation_transposes():
    rng = rng_for(3)
    Pi = vec_permutation(2, 3)
    for _ in range(20):
        C = rng.standard_normal((2, 3))
        np.testing.assert_array_equal(Pi @ vec(C), vec(C.T))
    np.testing.assert_array_equal(Pi.T @ Pi, np.eye(6))


@given(seeds, st.integers(1, 6), st.integers(1, 6))
def test_vec_permutation_indices(seed, m, n):
    C = rng_for(seed).standard_normal((m, n))
    np.testing.assert_array_equal(vec(C)[vec_permutation_indices(m, n)], vec(C.T))


@given(seeds, st.integers(1, 5), st.integers(1, 5), st.integers(1, 5), st.integers(1, 5))
def test_vec_kron_identity(seed, p, q, r, s):
    rng = rng_for(seed)
    A, X, B = rng.standard_normal((p, q)), rng.standard_normal((q, r)), rng.standard_normal((r, s))
    lhs = vec(A @ X @ B)
    rhs = kron(B.T, A) @ vec(X)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * np.abs(lhs).max())


@given(seeds, st.integers(1, 4), st.integers(1, 4), st.integers(1, 4), st.integers(1, 4))
def test_kron_abs_and_transpose_exact(seed, p, q, r, s):
    rng = rng_for(seed)
    A, B = rng.standard_normal((p, q)), rng.standard_normal((r, s))
    np.testing.assert_array_equal(np.abs(kron(A, B)), kron(np.abs(A), np.abs(B)))
    np.testing.assert_array_equal(kron(A, B).T, kron(A.T, B.T))


def test_kron_respects_cap(monkeypatch):
    with pytest.raises(SizeOverflow):
        kron(np.ones((10, 10)), np.ones((10, 10)), cap=9999)
    monkeypatch.setenv("MTLS_DENSE_CAP", "15")
    with pytest.raises(SizeOverflow):
        check_dense_size(4, 4)
    check_dense_size(3, 5)
    with pytest.raises(SizeOverflow):
        vec_permutation(2, 2)
