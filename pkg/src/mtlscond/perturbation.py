"""First-order perturbation map of the mixed LS-TLS solution.

Both Jacobians act on ``vec([dA, db])`` with ``A`` stacked column by column
first and ``b`` last, so they are ``n x m(n+1)`` and directly comparable.
"""

import numpy as np

from .errors import ConsistentSystem
from .kernels import check_dense_size, kron, vec, vec_permutation_indices

__all__ = [
    "residual_reflector",
    "jacobian_new",
    "jacobian_zy",
    "predict_delta_x",
    "predict_delta_x_compact",
    "equivalence_residual",
]


def _require_residual(solution):
    if solution.r_norm == 0.0:
        raise ConsistentSystem("zero residual: H0 is undefined")


def residual_reflector(r):
    """Dense ``H0 = I - 2 r r^T / ||r||^2``. Only for tests and small demos."""
    r = np.asarray(r, dtype=float)
    rr = r @ r
    if rr == 0.0:
        raise ConsistentSystem("zero residual: H0 is undefined")
    return np.eye(r.size) - (2.0 / rr) * np.outer(r, r)


def jacobian_new(solution, cap=None):
    """``K = -P^{-1} (A^T H0 G(x) + [I_n (x) r^T, 0])``.

    Uses ``P^{-1} A^T H0 G(x) = [x^T (x) D, -D]`` with ``D = P^{-1} A^T H0``,
    so the Kronecker product is never formed, only the result.
    """
    _require_residual(solution)
    m, n = solution.A.shape
    check_dense_size(n, m * (n + 1), cap, "Jacobian")
    D = solution.D
    P_inv = solution.P_inv
    x, r = solution.x, solution.r
    K = np.empty((n, m * (n + 1)))
    # block j (columns j*m .. j*m+m-1) = -(x_j D + P^{-1}[:, j] r^T)
    blocks = D[:, None, :] * x[None, :, None] + P_inv[:, :, None] * r[None, None, :]
    K[:, : n * m] = -blocks.reshape(n, n * m)
    K[:, n * m :] = D
    return K


def jacobian_zy(solution, cap=None):
    """``K_ZY = [-(x^T (x) D) - (r^T (x) P^{-1}) Pi_{m,n}, D]``.

    Here ``D = P^{-1}(A^T - 2 W x r^T / gamma_bar)``; the Kronecker products are
    built explicitly and the vec-permutation is applied as a column reindexing.
    """
    _require_residual(solution)
    m, n = solution.A.shape
    check_dense_size(n, m * (n + 1), cap, "Jacobian")
    x, r = solution.x, solution.r
    P_inv = solution.P_inv
    D = P_inv @ (solution.A.T - (2.0 / solution.gamma_bar) * np.outer(solution.Wx, r))
    left = kron(x[None, :], D, cap)
    rp = kron(r[None, :], P_inv, cap)
    # (M Pi)[:, k] = M[:, p^{-1}(k)] with Pi vec(C) = vec(C^T)
    perm = vec_permutation_indices(m, n)
    inverse = np.empty_like(perm)
    inverse[perm] = np.arange(perm.size)
    rp_pi = rp[:, inverse]
    return np.hstack([-left - rp_pi, D])


def predict_delta_x(K, dA, db):
    """First-order change ``K @ vec([dA, db])``."""
    return K @ np.concatenate([vec(dA), np.asarray(db, dtype=float).reshape(-1)])


def predict_delta_x_compact(solution, dA, db):
    """Kronecker-free prediction ``-P^{-1}(A^T H0 (dA x - db) + dA^T r)``."""
    _require_residual(solution)
    dA = np.asarray(dA, dtype=float)
    g = dA @ solution.x - np.asarray(db, dtype=float)
    return solution.D @ -g - solution.P_inv @ (dA.T @ solution.r)


def equivalence_residual(solution, cap=None):
    """``max|K - K_ZY| / max|K|``."""
    K = jacobian_new(solution, cap)
    K_zy = jacobian_zy(solution, cap)
    return float(np.max(np.abs(K - K_zy)) / np.max(np.abs(K)))
