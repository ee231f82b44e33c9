"""Dense linear-algebra substrate: partitioned QR, SVD, norms, vec/Kronecker.

Matrices are plain :class:`numpy.ndarray` objects. ``vec`` stacks columns
(Fortran order), so for an ``m x n`` matrix ``C`` entry ``C[i, j]`` sits at
position ``j*m + i`` of ``vec(C)``.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from . import _config
from .errors import DimensionError, NoConvergence, RankDeficient, SizeOverflow

__all__ = [
    "PartitionedFactorization",
    "qr_partition",
    "svd",
    "singular_values",
    "spectral_norm",
    "vec",
    "unvec",
    "kron",
    "vec_permutation",
    "vec_permutation_indices",
    "check_dense_size",
]


def check_dense_size(rows, cols, cap=None, what="matrix"):
    """Raise :class:`SizeOverflow` if a dense ``rows x cols`` object exceeds ``cap``."""
    if cap is None:
        cap = _config.dense_cap()
    size = int(rows) * int(cols)
    if size > cap:
        raise SizeOverflow(
            f"dense {what} of size {rows}x{cols} ({size} entries) exceeds cap {cap}; "
            "use a Kronecker-free formula instead"
        )


@dataclass(frozen=True)
class PartitionedFactorization:
    """Blocks of ``Q^T [A1, A2, b]`` in the mixed LS-TLS partition.

    ``R11`` is ``n1 x n1`` upper triangular with a nonnegative diagonal,
    ``R12`` is ``n1 x n2``, ``R1b`` has length ``n1``, ``R22`` is
    ``(m - n1) x n2`` and ``R2b`` has length ``m - n1``.

    ``Q`` is kept only for ``m <= q_cap``; otherwise the Householder
    reflectors ``(h, tau)`` and the column signs applied to ``Q`` are kept
    and :meth:`apply_q` works from them.
    """

    R11: np.ndarray
    R12: np.ndarray
    R1b: np.ndarray
    R22: np.ndarray
    R2b: np.ndarray
    Q: Optional[np.ndarray] = None
    reflectors: Optional[tuple] = None
    signs: Optional[np.ndarray] = None

    @property
    def m(self):
        return self.R11.shape[0] + self.R22.shape[0]

    @property
    def n1(self):
        return self.R11.shape[0]

    @property
    def n2(self):
        return self.R22.shape[1]

    @property
    def trailing(self):
        """``[R22, R2b]``, the block defining the reduced TLS problem."""
        return np.column_stack([self.R22, self.R2b])

    @property
    def R_A(self):
        """Upper-trapezoidal factor of ``A`` alone (``m x n``)."""
        top = np.hstack([self.R11, self.R12])
        bottom = np.hstack([np.zeros((self.R22.shape[0], self.n1)), self.R22])
        return np.vstack([top, bottom])

    def assemble(self):
        """The full ``m x (n+1)`` block matrix ``R~``."""
        R = np.empty((self.m, self.n1 + self.n2 + 1))
        R[:, :-1] = self.R_A
        R[: self.n1, -1] = self.R1b
        R[self.n1 :, -1] = self.R2b
        return R

    def apply_q(self, M):
        """Return ``Q @ M``."""
        M = np.asarray(M, dtype=float)
        if self.Q is not None:
            return self.Q @ M
        h, tau = self.reflectors
        squeeze = M.ndim == 1
        C = M.reshape(self.m, -1) * self.signs_padded()[:, None]
        out = _ormqr("L", "N", h, tau, C)
        return out[:, 0] if squeeze else out

    def signs_padded(self):
        s = np.ones(self.m)
        s[: self.signs.size] = self.signs
        return s


def _ormqr(side, trans, h, tau, C):
    C = np.asfortranarray(C, dtype=float)
    work = lapack.dormqr(side, trans, h, tau, C, lwork=-1)
    lwork = int(work[1][0])
    cq, _, info = lapack.dormqr(side, trans, h, tau, C, lwork=max(lwork, 1))
    if info != 0:
        raise NoConvergence(f"dormqr failed with info={info}")
    return cq


def _as_matrix(A, name):
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DimensionError(f"{name} has non-finite entries")
    return A


def qr_partition(A, b, n1, q_cap=None, check_rank=True):
    """Householder QR of ``[A, b]`` split into the mixed LS-TLS blocks.

    Parameters
    ----------
    A : (m, n) array_like
        Coefficient matrix; its first ``n1`` columns are the exact ones.
    b : (m,) array_like
        Right-hand side.
    n1 : int
        Number of error-free leading columns, ``0 <= n1 <= n``.
    q_cap : int, optional
        Keep an explicit ``Q`` only for ``m <= q_cap`` (default 2000).
    check_rank : bool
        Raise :class:`RankDeficient` when ``A`` is numerically rank deficient.

    Returns
    -------
    PartitionedFactorization
        Every diagonal entry of the triangular factor is made nonnegative by
        flipping the matching rows of ``R`` and columns of ``Q``.
    """
    A = _as_matrix(A, "A")
    b = np.asarray(b, dtype=float).reshape(-1)
    m, n = A.shape
    if b.shape[0] != m:
        raise DimensionError(f"b has length {b.shape[0]}, expected {m}")
    if not np.all(np.isfinite(b)):
        raise DimensionError("b has non-finite entries")
    if m < n or n < 1:
        raise DimensionError(f"need m >= n >= 1, got m={m}, n={n}")
    if not 0 <= n1 <= n:
        raise DimensionError(f"need 0 <= n1 <= n, got n1={n1}, n={n}")
    q_cap = _config.Q_CAP if q_cap is None else q_cap

    Ab = np.column_stack([A, b])
    k = min(m, n + 1)
    Q = reflectors = None
    if m <= q_cap:
        Q, R = sla.qr(Ab)
    else:
        reflectors, Rk = sla.qr(Ab, mode="raw")
        R = np.zeros((m, n + 1))
        R[: Rk.shape[0]] = Rk
    signs = np.where(np.diag(R)[:k] < 0, -1.0, 1.0)
    R[:k] *= signs[:, None]
    if Q is not None:
        Q[:, :k] *= signs

    fact = PartitionedFactorization(
        R11=R[:n1, :n1],
        R12=R[:n1, n1:n],
        R1b=R[:n1, n].copy(),
        R22=R[n1:, n1:n],
        R2b=R[n1:, n].copy(),
        Q=Q,
        reflectors=reflectors,
        signs=signs,
    )
    if check_rank:
        sigma_max = spectral_norm(R[:k])
        tol_rank = max(m, n) * _config.EPS * sigma_max
        diag11 = np.abs(np.diag(fact.R11))
        if diag11.size and diag11.min() <= tol_rank:
            raise RankDeficient("leading exact columns of A are rank deficient")
        if fact.n2 and singular_values(fact.R22)[-1] <= tol_rank:
            raise RankDeficient("A is not of full column rank")
    return fact


def svd(M, full_matrices=False):
    """Singular value decomposition ``M = U @ diag(s) @ Vt``.

    Uses the divide-and-conquer LAPACK driver and falls back to the
    QR-iteration driver if it does not converge.

    Returns
    -------
    U, s, Vt : ndarray
        ``s`` is sorted in decreasing order.
    """
    M = np.asarray(M, dtype=float)
    try:
        return sla.svd(M, full_matrices=full_matrices, lapack_driver="gesdd")
    except np.linalg.LinAlgError:
        pass
    try:
        return sla.svd(M, full_matrices=full_matrices, lapack_driver="gesvd")
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc


def singular_values(M):
    """Singular values of ``M`` in decreasing order."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return np.zeros(0)
    try:
        return sla.svdvals(M)
    except np.linalg.LinAlgError:
        return svd(M)[1]


def spectral_norm(M):
    """Largest singular value of ``M`` (0 for an empty matrix)."""
    s = singular_values(M)
    return float(s[0]) if s.size else 0.0


def vec(M):
    """Stack the columns of ``M`` into a vector."""
    return np.asarray(M).reshape(-1, order="F")


def unvec(v, rows, cols):
    """Inverse of :func:`vec`."""
    return np.asarray(v).reshape(rows, cols, order="F")


def kron(A, B, cap=None):
    """Kronecker product, refusing to build anything larger than the dense cap."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    check_dense_size(A.shape[0] * B.shape[0], A.shape[1] * B.shape[1], cap, "Kronecker product")
    return np.kron(A, B)


def vec_permutation_indices(m, n):
    """Index array ``p`` with ``vec(C.T) == vec(C)[p]`` for every ``m x n`` matrix ``C``."""
    return np.arange(m * n).reshape(m, n, order="F").ravel(order="C")


def vec_permutation(m, n, cap=None):
    """The ``mn x mn`` permutation ``Pi`` with ``Pi @ vec(C) == vec(C.T)``."""
    check_dense_size(m * n, m * n, cap, "vec-permutation matrix")
    Pi = np.zeros((m * n, m * n))
    Pi[np.arange(m * n), vec_permutation_indices(m, n)] = 1.0
    return Pi
