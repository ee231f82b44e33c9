"""The mixed LS-TLS problem and its QR/SVD solver.

The problem is ``min ||[E2, f]||_F`` subject to
``A1 x1 + (A2 + E2) x2 = b + f`` where the first ``n1`` columns ``A1`` of
``A`` are known exactly. The solution ``x`` satisfies the generalized
eigenproblem ``[A, b]^T [A, b] [x; -1] = s2 * diag(W, 1) [x; -1]`` with
``W = diag(0_{n1}, I_{n2})`` and ``s2`` the squared smallest singular value
of the trailing block ``[R22, R2b]``.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as sla

from . import _config
from .errors import ConsistentSystem, DimensionError, NonGeneric
from .kernels import PartitionedFactorization, qr_partition, singular_values, spectral_norm, svd

__all__ = [
    "MtlsProblem",
    "MtlsSolution",
    "WeightPattern",
    "genericity_gap",
    "solve",
    "tls_solve",
    "rayleigh_quotient",
    "stationarity_residual",
    "stationarity_tolerance",
    "eigen_system_residual",
    "p_inverse_block",
]


@dataclass(frozen=True)
class WeightPattern:
    """Implicit ``W = diag(0_{n1}, I_{n2})``."""

    n1: int
    n2: int

    def apply(self, x):
        out = np.array(x, dtype=float, copy=True)
        out[: self.n1] = 0.0
        return out

    def quadratic(self, x):
        """``x^T W x``."""
        x = np.asarray(x, dtype=float)
        return float(x[self.n1 :] @ x[self.n1 :])

    def dense(self):
        return np.diag(np.r_[np.zeros(self.n1), np.ones(self.n2)])


@dataclass(frozen=True, eq=False)
class MtlsProblem:
    """Data ``(A, b)`` with ``n1`` exactly known leading columns."""

    A: np.ndarray
    b: np.ndarray
    n1: int

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        if A.shape[0] == 1 and np.ndim(self.A) == 1:
            A = A.T
        b = np.asarray(self.b, dtype=float).reshape(-1)
        m, n = A.shape
        if b.shape[0] != m:
            raise DimensionError(f"b has length {b.shape[0]}, expected {m}")
        if m < n or n < 1:
            raise DimensionError(f"need m >= n >= 1, got m={m}, n={n}")
        if not 0 <= int(self.n1) <= n:
            raise DimensionError(f"need 0 <= n1 <= n, got n1={self.n1}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "n1", int(self.n1))

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def n2(self):
        return self.n - self.n1

    @property
    def weight(self):
        return WeightPattern(self.n1, self.n2)

    @property
    def Ab(self):
        return np.column_stack([self.A, self.b])

    def perturbed(self, dA, db):
        return MtlsProblem(self.A + dA, self.b + db, self.n1)


@dataclass(frozen=True, eq=False)
class MtlsSolution:
    """Solution ``x`` with shift ``sigma2``, residual ``r = Ax - b`` and factorization."""

    problem: MtlsProblem
    x: np.ndarray
    sigma2: float
    r: np.ndarray
    gap: float
    fact: PartitionedFactorization = field(repr=False)

    @property
    def A(self):
        return self.problem.A

    @property
    def b(self):
        return self.problem.b

    @property
    def weight(self):
        return self.problem.weight

    @cached_property
    def Wx(self):
        return self.weight.apply(self.x)

    @cached_property
    def gamma(self):
        """``1 + ||x||^2``."""
        return 1.0 + float(self.x @ self.x)

    @cached_property
    def gamma_bar(self):
        """``1 + x^T W x``."""
        return 1.0 + self.weight.quadratic(self.x)

    @cached_property
    def r_norm(self):
        return float(np.linalg.norm(self.r))

    @cached_property
    def P_inv(self):
        """``(A^T A - sigma2 W)^{-1}`` built from the factorization blocks."""
        return p_inverse_block(self.fact, self.sigma2)

    @cached_property
    def D(self):
        """``P^{-1} A^T H0`` with ``H0 = I - 2 r r^T / ||r||^2`` applied as a rank-1 update."""
        PAt = self.P_inv @ self.A.T
        Atr = self.A.T @ self.r
        return PAt - np.outer(self.P_inv @ Atr, self.r) * (2.0 / self.r_norm**2)


def _tls_block(fact):
    """SVD data of ``[R22, R2b]``, padded with zero rows to be at least square."""
    C = fact.trailing
    n2 = fact.n2
    if C.shape[0] < n2 + 1:
        C = np.vstack([C, np.zeros((n2 + 1 - C.shape[0], n2 + 1))])
    _, s, Vt = svd(C, full_matrices=False)
    return s, Vt


def _gap_from(fact, s):
    s22 = singular_values(fact.R22)
    n2 = fact.n2
    sigma_n2 = s22[n2 - 1] if s22.size >= n2 else 0.0
    return float(sigma_n2 - s[n2])


def genericity_gap(problem, fact=None):
    """``sigma_{n2}(R22) - sigma_{n2+1}([R22, R2b])``; ``inf`` when ``n2 == 0``."""
    if problem.n2 == 0:
        return float("inf")
    if fact is None:
        fact = qr_partition(problem.A, problem.b, problem.n1)
    s, _ = _tls_block(fact)
    return _gap_from(fact, s)


def solve(problem, q_cap=None, method="filter"):
    """Solve the mixed LS-TLS problem.

    ``sigma2`` is the squared smallest singular value of ``[R22, R2b]``.
    ``x2 = (R22^T R22 - sigma2 I)^{-1} R22^T R2b`` is evaluated through the
    SVD ``R22 = U Sigma V^T`` as ``V diag(s / (s^2 - sigma2)) U^T R2b``, which
    is linear in ``R2b`` and so keeps its accuracy when ``||b|| << ||A||``
    (the singular-vector quotient loses digits relative to ``||b||`` there).
    ``method="vector"`` instead takes ``x2 = -v[:n2] / v[n2]`` from the right
    singular vector ``v`` of ``[R22, R2b]``. ``x1`` comes from back
    substitution with ``R11``.
    For ``n2 == 0`` this is ordinary least squares and ``sigma2`` is set to
    ``||r||^2``.

    Raises
    ------
    NonGeneric
        The genericity gap is below tolerance, the two smallest singular
        values of ``[R22, R2b]`` tie, or the last component of the singular
        vector vanishes.
    ConsistentSystem
        ``||Ax - b|| <= tol * ||b||``.
    """
    if method not in ("filter", "vector"):
        raise ValueError(f"unknown method {method!r}")
    fact = qr_partition(problem.A, problem.b, problem.n1, q_cap=q_cap)
    n1, n2 = problem.n1, problem.n2

    if n2 == 0:
        x = sla.solve_triangular(fact.R11, fact.R1b)
        gap = float("inf")
        sigma2 = None
    else:
        s, Vt = _tls_block(fact)
        gap = _gap_from(fact, s)
        tol_gap = _config.TOL_GAP_FACTOR * _config.EPS * s[0]
        if gap <= tol_gap or s[n2 - 1] - s[n2] <= tol_gap:
            raise NonGeneric(f"genericity gap {gap:.3e} is below tolerance {tol_gap:.3e}")
        v = Vt[n2]
        if abs(v[-1]) < _config.TOL_GAP_FACTOR * _config.EPS:
            raise NonGeneric("singular vector has a vanishing last component")
        sigma = s[n2]
        if method == "filter":
            U22, s22, V22t = svd(fact.R22, full_matrices=False)
            x2 = V22t.T @ ((s22 / ((s22 - sigma) * (s22 + sigma))) * (U22.T @ fact.R2b))
        else:
            x2 = -v[:n2] / v[-1]
        if n1:
            x1 = sla.solve_triangular(fact.R11, fact.R1b - fact.R12 @ x2)
            x = np.concatenate([x1, x2])
        else:
            x = x2
        sigma2 = float(sigma**2)

    r = problem.A @ x - problem.b
    r_norm = np.linalg.norm(r)
    if r_norm <= _config.TOL_CONSISTENT * np.linalg.norm(problem.b):
        raise ConsistentSystem("Ax = b is consistent; the MTLS perturbation theory needs r != 0")
    if sigma2 is None:
        sigma2 = float(r_norm**2)
    return MtlsSolution(problem=problem, x=x, sigma2=sigma2, r=r, gap=gap, fact=fact)


def tls_solve(A, b):
    """Classical total least squares from the SVD of ``[A, b]`` (no partitioning)."""
    Ab = np.column_stack([A, b])
    _, _, Vt = svd(Ab)
    v = Vt[-1]
    return -v[:-1] / v[-1]


def rayleigh_quotient(problem, x):
    """``||b - A x||^2 / (1 + x^T W x)``."""
    res = problem.b - problem.A @ x
    return float(res @ res) / (1.0 + problem.weight.quadratic(x))


def stationarity_residual(solution):
    """``||A^T r - sigma2 W x||``, zero at an exact solution."""
    return float(np.linalg.norm(solution.A.T @ solution.r - solution.sigma2 * solution.Wx))


def stationarity_tolerance(solution, factor=None):
    """Bound ``tol_stat * (||A|| (||A|| ||x|| + ||b||) + sigma2 ||x||)`` on the stationarity residual.

    The ``||A|| ||x|| + ||b||`` factor is the size of the terms cancelling
    in ``r = A x - b``; evaluating ``r`` alone already costs that much.
    """
    factor = _config.TOL_STAT if factor is None else factor
    A_norm = spectral_norm(solution.A)
    x_norm = np.linalg.norm(solution.x)
    scale = A_norm * (A_norm * x_norm + np.linalg.norm(solution.b)) + solution.sigma2 * x_norm
    return factor * scale


def eigen_system_residual(solution):
    """Relative residual of the generalized eigen system at ``[x; -1]``.

    Normalized by ``||[A, b]||_2^2 * ||[x; -1]||_2``.
    """
    A, b, r = solution.A, solution.b, solution.r
    lhs = np.r_[A.T @ r, b @ r]
    rhs = solution.sigma2 * np.r_[solution.Wx, -1.0]
    scale = spectral_norm(solution.problem.Ab) ** 2 * np.sqrt(solution.gamma)
    return float(np.linalg.norm(lhs - rhs) / scale)


def p_inverse_block(fact, sigma2):
    """``(A^T A - sigma2 W)^{-1}`` from the 2x2 block formula.

    With ``S = R22^T R22 - sigma2 I``,

    ``P^{-1} = [[R11^{-1} R11^{-T} + F S^{-1} F^T, -F S^{-1}], [-S^{-1} F^T, S^{-1}]]``

    where ``F = R11^{-1} R12``. ``S^{-1}`` is applied through the SVD of
    ``R22`` (``S = V (Sigma^2 - sigma2) V^T``), so no cross product is formed.

    Raises
    ------
    NonGeneric
        If ``S`` is numerically singular.
    """
    n1, n2 = fact.n1, fact.n2
    if n2:
        _, sv, Vt = svd(fact.R22)
        sigma = np.sqrt(max(sigma2, 0.0))
        # same scaling as the genericity test in solve(): on the gap, not its square
        if (sv - sigma).min() <= _config.TOL_GAP_FACTOR * _config.EPS * sv[0]:
            raise NonGeneric("R22^T R22 - sigma2 I is numerically singular")
        d = (sv - sigma) * (sv + sigma)
        S_inv = (Vt.T / d) @ Vt
        if not n1:
            return S_inv
    if n1:
        eye = np.eye(n1)
        R11_inv = sla.solve_triangular(fact.R11, eye)
        top_left = R11_inv @ R11_inv.T
        if not n2:
            return top_left
        F = sla.solve_triangular(fact.R11, fact.R12)
        FS = F @ S_inv
        P_inv = np.empty((n1 + n2, n1 + n2))
        P_inv[:n1, :n1] = top_left + FS @ F.T
        P_inv[:n1, n1:] = -FS
        P_inv[n1:, :n1] = -FS.T
        P_inv[n1:, n1:] = S_inv
        return P_inv
    raise DimensionError("empty problem")
