"""Linearly structured perturbations of ``A``.

A structured matrix is ``A = sum_i alpha_i S_i`` for fixed sparse basis
matrices ``S_1 .. S_q``. Perturbations ``dA = sum_i dalpha_i S_i`` keep the
structure while ``b`` stays unstructured, so the perturbation map becomes
the ``n x (q+m)`` matrix ``K Phi`` which is assembled without Kronecker
products:

    ``K Phi = -P^{-1} (A^T H0 [S_1 x, .., S_q x, -I_m] + [S_1^T r, .., S_q^T r, 0])``
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .condition import componentwise_ratio
from .errors import DimensionError
from .kernels import spectral_norm

__all__ = [
    "StructureBasis",
    "ToeplitzInterceptBasis",
    "StructuredReport",
    "reconstruct",
    "k_phi_structured",
    "structured_condition_numbers",
    "toeplitz_intercept_basis",
    "elementary_basis",
    "read_basis",
    "write_basis",
]


@dataclass(frozen=True, eq=False)
class StructureBasis:
    """Basis matrices ``S_1 .. S_q`` (sparse COO) and parameters ``alpha``.

    Invariants checked by :meth:`validate`: the ``vec(S_i)`` have pairwise
    disjoint supports (so ``Phi^T Phi`` is diagonal and ``Phi`` has full
    column rank) and no basis matrix is zero.
    """

    m: int
    n: int
    mats: tuple
    alpha: np.ndarray

    def __post_init__(self):
        mats = tuple(sp.coo_array(S, dtype=float) for S in self.mats)
        alpha = np.asarray(self.alpha, dtype=float).reshape(-1)
        for S in mats:
            if S.shape != (self.m, self.n):
                raise DimensionError(f"basis matrix has shape {S.shape}, expected {(self.m, self.n)}")
        if alpha.size != len(mats):
            raise DimensionError(f"alpha has length {alpha.size}, expected {len(mats)}")
        object.__setattr__(self, "mats", mats)
        object.__setattr__(self, "alpha", alpha)

    @property
    def q(self):
        return len(self.mats)

    def phi(self):
        """Sparse ``mn x q`` matrix ``[vec(S_1), .., vec(S_q)]``."""
        rows, cols, vals = [], [], []
        for k, S in enumerate(self.mats):
            rows.append(S.col * self.m + S.row)
            cols.append(np.full(S.nnz, k))
            vals.append(S.data)
        return sp.csc_array(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.m * self.n, self.q),
        )

    def validate(self):
        """Raise :class:`ValueError` unless the basis invariants hold."""
        phi = self.phi().tocsr()
        phi.sum_duplicates()
        phi.eliminate_zeros()
        per_row = np.diff(phi.indptr)
        if per_row.size and per_row.max() > 1:
            raise ValueError("two basis matrices share an entry; Phi rows must have at most one nonzero")
        col_nnz = np.bincount(phi.indices, minlength=self.q)
        if np.any(col_nnz == 0):
            raise ValueError("basis contains a zero matrix")
        return self

    def products(self, x):
        """``[S_1 x, .., S_q x]`` (``m x q``)."""
        return np.column_stack([S @ x for S in self.mats])

    def transpose_products(self, r):
        """``[S_1^T r, .., S_q^T r]`` (``n x q``)."""
        return np.column_stack([S.T @ r for S in self.mats])

    def delta(self, dalpha):
        """Structured perturbation ``sum_i dalpha_i S_i`` as a dense matrix."""
        return reconstruct(self, dalpha)


@dataclass(frozen=True, eq=False)
class ToeplitzInterceptBasis(StructureBasis):
    """Basis of ``[1_m, T]`` with ``T`` banded lower Toeplitz of bandwidth ``2 omega + 1``.

    The products with ``x`` and ``r`` have closed forms: a lower Toeplitz
    ``T_x`` and a Hankel ``H_r``.
    """

    omega: int = 0

    def products(self, x):
        m, w = self.m, 2 * self.omega + 1
        cols = m - 2 * self.omega
        out = np.zeros((m, w + 1))
        out[:, 0] = x[0]
        # column i of T_x is x[1:] shifted down by i
        for i in range(w):
            out[i : i + cols, i + 1] = x[1:]
        return out

    def products_generic(self, x):
        return StructureBasis.products(self, x)

    def transpose_products(self, r):
        m, w = self.m, 2 * self.omega + 1
        cols = m - 2 * self.omega
        out = np.zeros((cols + 1, w + 1))
        out[0, 0] = r.sum()
        idx = np.arange(cols)[:, None] + np.arange(w)[None, :]
        out[1:, 1:] = r[idx]
        return out

    def transpose_products_generic(self, r):
        return StructureBasis.transpose_products(self, r)


def reconstruct(basis, alpha=None):
    """Dense ``sum_i alpha_i S_i`` (defaults to the basis' own ``alpha``)."""
    alpha = basis.alpha if alpha is None else np.asarray(alpha, dtype=float)
    out = np.zeros((basis.m, basis.n))
    for a, S in zip(alpha, basis.mats):
        np.add.at(out, (S.row, S.col), a * S.data)
    return out


def elementary_basis(A):
    """Unstructured basis: one elementary matrix per entry of ``A`` (column-major order)."""
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    mats = [sp.coo_array(([1.0], ([i], [j])), shape=(m, n)) for j in range(n) for i in range(m)]
    return StructureBasis(m, n, tuple(mats), A.reshape(-1, order="F"))


def toeplitz_intercept_basis(m, omega, t_col):
    """Basis of the intercept model ``A = [1_m, T]``.

    ``T`` is ``m x (m - 2 omega)`` with first column ``t_col`` padded with
    zeros and a first row that is zero beyond ``t_1``. ``S_1 = [1_m, 0]`` and
    ``S_{i+1} = [0, Y0^(i-1) [I; 0]]`` for the lower shift ``Y0``, so that
    ``alpha = [1, t_1, .., t_{2 omega + 1}]``.
    """
    t_col = np.asarray(t_col, dtype=float).reshape(-1)
    w = 2 * omega + 1
    if omega < 0 or m <= 2 * omega:
        raise DimensionError(f"need m > 2*omega, got m={m}, omega={omega}")
    if t_col.size != w:
        raise DimensionError(f"t_col must have length {w}, got {t_col.size}")
    cols = m - 2 * omega
    n = cols + 1
    mats = [sp.coo_array((np.ones(m), (np.arange(m), np.zeros(m, dtype=int))), shape=(m, n))]
    j = np.arange(cols)
    for i in range(w):
        mats.append(sp.coo_array((np.ones(cols), (j + i, j + 1)), shape=(m, n)))
    basis = ToeplitzInterceptBasis(m, n, tuple(mats), np.r_[1.0, t_col], omega=omega)
    return basis.validate()


def k_phi_structured(solution, basis):
    """Structured perturbation map ``K Phi`` (``n x (q+m)``), Kronecker-free."""
    m, n = solution.A.shape
    if (basis.m, basis.n) != (m, n):
        raise DimensionError(f"basis is {basis.m}x{basis.n}, problem is {m}x{n}")
    D = solution.D
    SX = basis.products(solution.x)
    STr = basis.transpose_products(solution.r)
    # -P^{-1}(A^T H0 [SX, -I] + [STr, 0]) = [-(D SX + P^{-1} STr), D]
    return np.hstack([-(D @ SX + solution.P_inv @ STr), D])


@dataclass
class StructuredReport:
    kappa_s: float
    mixed_s: float
    compw_s: float
    k_phi: np.ndarray = field(repr=False)
    flags: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "kappa_s": self.kappa_s,
            "mixed_s": self.mixed_s,
            "compw_s": self.compw_s,
            "flags": dict(self.flags),
        }


def structured_condition_numbers(solution, basis):
    """Structured relative normwise, mixed and componentwise condition numbers.

    ``kappa_s = ||K Phi||_2 ||[alpha; b]|| / ||x||``,
    ``m_s = || |K Phi| [|alpha|; |b|] ||_inf / ||x||_inf`` and ``c_s`` divides
    componentwise by ``|x|`` instead.
    """
    KP = k_phi_structured(solution, basis)
    s = np.concatenate([basis.alpha, solution.b])
    x = solution.x
    num = np.abs(KP) @ np.abs(s)
    kappa_s = spectral_norm(KP) * np.linalg.norm(s) / np.linalg.norm(x)
    mixed_s = float(np.max(num) / np.max(np.abs(x)))
    compw_s, infinite = componentwise_ratio(num, x)
    return StructuredReport(
        kappa_s=float(kappa_s),
        mixed_s=mixed_s,
        compw_s=compw_s,
        k_phi=KP,
        flags={"compw_infinite": infinite},
    )


def structured_compw(report):
    """Componentwise value with ``inf`` restored from the flag."""
    return math.inf if report.flags.get("compw_infinite") else report.compw_s


def write_basis(basis, path):
    """Write ``basis`` in the plain-text structure format.

    Layout (indices are 1-based)::

        m n q
        alpha_1 nnz_1
        i j value      (nnz_1 lines)
        alpha_2 nnz_2
        ...
    """
    with open(path, "w") as fh:
        fh.write(f"{basis.m} {basis.n} {basis.q}\n")
        for a, S in zip(basis.alpha, basis.mats):
            fh.write(f"{float(a)!r} {S.nnz}\n")
            for i, j, v in zip(S.row, S.col, S.data):
                fh.write(f"{i + 1} {j + 1} {float(v)!r}\n")


def read_basis(path):
    """Read a basis written by :func:`write_basis`; the result is validated."""
    with open(path) as fh:
        tokens = [line.split() for line in fh if line.strip() and not line.lstrip().startswith("%")]
    try:
        m, n, q = (int(t) for t in tokens[0])
        pos = 1
        mats, alpha = [], []
        for _ in range(q):
            a, nnz = float(tokens[pos][0]), int(tokens[pos][1])
            pos += 1
            trip = np.array(tokens[pos : pos + nnz], dtype=float).reshape(nnz, 3)
            pos += nnz
            rows = trip[:, 0].astype(int) - 1
            cols = trip[:, 1].astype(int) - 1
            mats.append(sp.coo_array((trip[:, 2], (rows, cols)), shape=(m, n)))
            alpha.append(a)
    except (IndexError, ValueError) as exc:
        raise DimensionError(f"malformed structure file {path}: {exc}") from exc
    if pos != len(tokens):
        raise DimensionError(f"malformed structure file {path}: trailing data")
    return StructureBasis(m, n, tuple(mats), np.array(alpha)).validate()
