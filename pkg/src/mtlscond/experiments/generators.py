"""Seeded test-problem generators for the three experiment families.

Every generator draws from ``numpy.random.Generator(PCG64(seed))``: uniform
``[0, 1)`` draws use ``Generator.random`` and normal draws
``Generator.standard_normal``. The same arguments always give bit-identical
problems.
"""

import numpy as np
import scipy.linalg as sla

from ..core import MtlsProblem
from ..errors import DimensionError
from ..structured import reconstruct, toeplitz_intercept_basis

__all__ = [
    "rng_for",
    "child_seeds",
    "gen_transfer_function",
    "gen_gap_controlled",
    "gen_intercept",
    "delta_block",
]


def rng_for(seed):
    return np.random.Generator(np.random.PCG64(seed))


def child_seeds(seed, count):
    """``count`` independent 64-bit seeds derived from ``seed``."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(count, dtype=np.uint64)]


def gen_transfer_function(m=30, n1=10, n2=10, noise_var=0.01, seed=0, return_model=False):
    """Errors-in-variables ARX problem ``phi(t)^T x ~ y(t)``.

    The noise-free output obeys
    ``y0(t) = sum_i b_i u(t-i) - sum_i c_i y0(t-i)``; the input ``u`` is
    standard normal and exact, the measured output is ``y = y0 + e`` with
    white noise ``e`` of variance ``noise_var``. Rows are
    ``phi(t) = [u(t-1), .., u(t-n1), -y(t-1), .., -y(t-n2)]`` for
    ``t = k0+1, .., k0+m`` with ``k0 = max(n1, n2)`` and samples at
    ``t <= 0`` set to zero. The noisy ``y`` enters both the regressor and
    the right-hand side, so only the first ``n1`` columns are exact.

    The true coefficients are drawn uniformly from ``[-1, 1)``; the ``c_i``
    are rescaled to ``sum |c_i| = 0.9`` so the simulated system is stable.
    """
    if n1 < 0 or n2 < 0 or n1 + n2 < 1:
        raise DimensionError("need n1, n2 >= 0 and n1 + n2 >= 1")
    if m < n1 + n2:
        raise DimensionError(f"need m >= n1 + n2, got m={m}")
    rng = rng_for(seed)
    b_coef = rng.uniform(-1.0, 1.0, n1)
    c_coef = rng.uniform(-1.0, 1.0, n2)
    if n2:
        c_coef *= 0.9 / np.abs(c_coef).sum()
    k0 = max(n1, n2)
    T = k0 + m
    # index t of these arrays is time t; index 0 stands for every t <= 0
    u = np.zeros(T + 1)
    u[1:] = rng.standard_normal(T)
    y0 = np.zeros(T + 1)
    for t in range(1, T + 1):
        acc = 0.0
        for i in range(1, n1 + 1):
            if t - i >= 1:
                acc += b_coef[i - 1] * u[t - i]
        for i in range(1, n2 + 1):
            if t - i >= 1:
                acc -= c_coef[i - 1] * y0[t - i]
        y0[t] = acc
    y = y0.copy()
    y[1:] += np.sqrt(noise_var) * rng.standard_normal(T)

    def lagged(sig, t, lag):
        return sig[t - lag] if t - lag >= 1 else 0.0

    rows = np.arange(k0 + 1, k0 + m + 1)
    A = np.empty((m, n1 + n2))
    for k, t in enumerate(rows):
        A[k, :n1] = [lagged(u, t, i) for i in range(1, n1 + 1)]
        A[k, n1:] = [-lagged(y, t, i) for i in range(1, n2 + 1)]
    problem = MtlsProblem(A, y[rows], n1)
    if return_model:
        return problem, np.concatenate([b_coef, c_coef])
    return problem


def _householder(v):
    v = v / np.linalg.norm(v)
    return np.eye(v.size) - 2.0 * np.outer(v, v)


def gen_gap_controlled(m, n, n1, e_p, seed=0):
    """Random problem whose distance to non-genericity is at most ``e_p``.

    ``[A, b] = Q R~`` with ``Q`` the orthogonal factor of a Gaussian matrix,
    ``[R11, R12, R1b]`` the triangular factor of a uniform ``n1 x (n+1)``
    matrix and ``[R22, R2b]`` the triangular factor of ``Y [D; 0] Z^T``,
    where ``Y``, ``Z`` are Householder reflectors of random unit vectors and
    ``D = diag(n2, n2-1, .., 1, 1-e_p)``.
    """
    n2 = n - n1
    if not 0.0 < e_p < 1.0:
        raise DimensionError(f"need 0 < e_p < 1, got {e_p}")
    if m <= n or n2 < 1 or n1 < 0:
        raise DimensionError(f"need m > n and 0 <= n1 < n, got m={m}, n={n}, n1={n1}")
    rng = rng_for(seed)
    Q = sla.qr(rng.standard_normal((m, m)))[0]
    R = np.zeros((m, n + 1))
    if n1:
        R[:n1] = np.triu(sla.qr(rng.random((n1, n + 1)))[1])
    Y = _householder(rng.standard_normal(m - n1))
    Z = _householder(rng.standard_normal(n2 + 1))
    D = np.r_[np.arange(n2, 0, -1, dtype=float), 1.0 - e_p]
    block = Y[:, : n2 + 1] @ (D[:, None] * Z.T)
    R[n1:, n1:] = np.triu(sla.qr(block)[1])
    Ab = Q @ R
    return MtlsProblem(Ab[:, :n], Ab[:, n], n1)


def delta_block(delta):
    """The ``6 x 4`` sparse pattern with three ``delta`` entries."""
    C = np.zeros((6, 4))
    C[0, 0] = C[1, 1] = C[5, 3] = delta
    C[2, 3] = C[3, 2] = C[4, 2] = 1.0
    return C


def gen_intercept(m=None, mode="delta", params=None, seed=0):
    """Intercept model ``[1_m, C] [alpha; x] ~ b`` with an exact ones column.

    ``mode="delta"``: ``m = 6``, ``C = delta_block(delta)``; ``params`` takes
    ``delta`` (default ``1e-2``) and ``n1`` (default 1).

    ``mode="toeplitz"``: ``C`` is the banded Toeplitz matrix with first
    column ``1, 2, .., 2 omega + 1, 0, ..``; ``params`` takes ``omega``
    (default 8) and ``lam`` (default 1), and ``b = lam * rand(m)``.

    Returns
    -------
    problem : MtlsProblem
    basis : ToeplitzInterceptBasis or None
        Structure of ``A`` for the Toeplitz mode.
    """
    params = dict(params or {})
    rng = rng_for(seed)
    if mode == "delta":
        if m not in (None, 6):
            raise DimensionError("the delta-block model has m = 6")
        A = np.column_stack([np.ones(6), delta_block(params.get("delta", 1e-2))])
        b = rng.random(6)
        return MtlsProblem(A, b, params.get("n1", 1)), None
    if mode == "toeplitz":
        omega = int(params.get("omega", 8))
        if m is None or m <= 2 * omega:
            raise DimensionError(f"need m > 2*omega, got m={m}, omega={omega}")
        t_col = np.arange(1.0, 2 * omega + 2)
        basis = toeplitz_intercept_basis(m, omega, t_col)
        A = reconstruct(basis)
        b = params.get("lam", 1.0) * rng.random(m)
        return MtlsProblem(A, b, 1), basis
    raise ValueError(f"unknown intercept mode {mode!r}")
