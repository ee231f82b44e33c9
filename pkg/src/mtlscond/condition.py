"""Normwise, mixed and componentwise condition numbers of the mixed LS-TLS problem.

All compact forms avoid the ``n x m(n+1)`` Jacobian. The absolute normwise
condition number ``||K||_2`` has four equivalent Kronecker-free expressions:

* ``kappa1``/``kappa2`` take the square root of the norm of an ``n x n``
  symmetric matrix and form ``A^T A``;
* ``kappa3``/``kappa4`` are norms of ``n x (2m+n)`` and ``n x (m+n)``
  matrices and avoid the cross product. ``kappa4`` is the default.

Throughout ``gamma = 1 + ||x||^2``, ``gamma_bar = 1 + x^T W x`` and the
stationarity identity ``A^T r = sigma2 W x`` replaces ``A^T r``.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import _config
from .core import p_inverse_block
from .kernels import check_dense_size, spectral_norm, vec
from .perturbation import jacobian_new, jacobian_zy

__all__ = [
    "ConditionReport",
    "p_inverse_block",
    "norm_k",
    "norm_k_zy",
    "kappa_full",
    "kappa1",
    "kappa2",
    "kappa3",
    "kappa4",
    "kappa_zy28",
    "kappa_zy_new",
    "relative",
    "perturbation_bound_coefficients",
    "perturbation_bound",
    "componentwise_ratio",
    "mixed_compw_exact",
    "mixed_compw_upper",
    "condition_report",
]


def _sym_root(solution, middle):
    M = solution.P_inv @ middle @ solution.P_inv
    return math.sqrt(spectral_norm(M))


def norm_k(solution, cap=None):
    """``||K||_2`` from the explicit Jacobian."""
    return spectral_norm(jacobian_new(solution, cap))


def norm_k_zy(solution, cap=None):
    """``||K_ZY||_2`` from the explicit Zheng-Yang Jacobian."""
    return spectral_norm(jacobian_zy(solution, cap))


def relative(solution, kappa_abs):
    """Scale an absolute normwise condition number by ``||[A, b]||_F / ||x||_2``."""
    return kappa_abs * np.linalg.norm(solution.problem.Ab) / np.linalg.norm(solution.x)


def kappa_full(solution, cap=None):
    """Relative normwise condition number ``||K||_2 ||[A, b]||_F / ||x||_2``."""
    return relative(solution, norm_k(solution, cap))


def kappa1(solution):
    A, x, r = solution.A, solution.x, solution.r
    Atr = A.T @ r
    middle = (
        solution.gamma * (A.T @ A)
        - np.outer(Atr, x)
        - np.outer(x, Atr)
        + solution.r_norm**2 * np.eye(x.size)
    )
    return _sym_root(solution, middle)


def kappa2(solution):
    A, x, Wx = solution.A, solution.x, solution.Wx
    g, gb, s2 = solution.gamma, solution.gamma_bar, solution.sigma2
    sym = np.outer(Wx, x) + np.outer(x, Wx)
    middle = A.T @ A + (s2 * gb / g) * (np.eye(x.size) - sym / gb)
    return math.sqrt(g) * _sym_root(solution, middle)


def _trailing_block(solution):
    # ||r|| I - sigma2 W x x^T / ||r||
    rn = solution.r_norm
    n = solution.x.size
    return rn * np.eye(n) - (solution.sigma2 / rn) * np.outer(solution.Wx, solution.x)


def kappa3(solution):
    """Norm of ``P^{-1} [A^T, ||x|| A^T P0, ||r|| I - sigma2 W x x^T / ||r||]``.

    ``P0 = I - r r^T / ||r||^2`` so ``A^T P0 = A^T - sigma2 W x r^T / ||r||^2``.
    """
    A, x, r = solution.A, solution.x, solution.r
    xn = np.linalg.norm(x)
    At_P0 = A.T - (solution.sigma2 / solution.r_norm**2) * np.outer(solution.Wx, r)
    Z = np.hstack([A.T, xn * At_P0, _trailing_block(solution)])
    return spectral_norm(solution.P_inv @ Z)


def kappa4(solution, branch=1):
    """Norm of ``P^{-1} [(1+beta) A^T - beta sigma2 W x r^T / ||r||^2, ||r|| I - sigma2 W x x^T / ||r||]``.

    ``beta = -1 + branch * sqrt(1 + ||x||^2)``; both branches give the same value.
    """
    A, r = solution.A, solution.r
    beta = -1.0 + branch * math.sqrt(solution.gamma)
    first = (1.0 + beta) * A.T - (beta * solution.sigma2 / solution.r_norm**2) * np.outer(solution.Wx, r)
    Z = np.hstack([first, _trailing_block(solution)])
    return spectral_norm(solution.P_inv @ Z)


def kappa_zy28(solution):
    """Corrected Zheng-Yang expression; reported for comparison, not equal to ``||K||_2`` in general."""
    A, Wx = solution.A, solution.Wx
    g, gb, s2 = solution.gamma, solution.gamma_bar, solution.sigma2
    middle = A.T @ A + (s2 * gb / g) * (np.eye(Wx.size) - 2.0 * np.outer(Wx, Wx) / gb)
    return math.sqrt(g) * _sym_root(solution, middle)


def kappa_zy_new(solution):
    """Re-derived norm of ``K_ZY``; equal to ``kappa2``."""
    A, x, Wx = solution.A, solution.x, solution.Wx
    s2 = solution.sigma2
    middle = (
        solution.gamma * (A.T @ A)
        - s2 * np.outer(Wx, x)
        - s2 * np.outer(x, Wx)
        + solution.r_norm**2 * np.eye(x.size)
    )
    return _sym_root(solution, middle)


def perturbation_bound_coefficients(solution):
    """``(kappa_A, kappa_b)`` of the first-order relative error bound."""
    A, b, x = solution.A, solution.b, solution.x
    xn = np.linalg.norm(x)
    PAt = spectral_norm(solution.P_inv @ A.T)
    Pn = spectral_norm(solution.P_inv)
    A_norm = spectral_norm(A)
    kappa_b = np.linalg.norm(b) / xn * PAt
    kappa_A = A_norm / xn * (solution.r_norm * Pn + xn * PAt)
    return float(kappa_A), float(kappa_b)


def perturbation_bound(solution, dA_norm, db_norm):
    """``kappa_b ||db|| / ||b|| + kappa_A ||dA||_2 / ||A||_2``, bounding ``||dx|| / ||x||`` to first order."""
    kappa_A, kappa_b = perturbation_bound_coefficients(solution)
    return kappa_b * db_norm / np.linalg.norm(solution.b) + kappa_A * dA_norm / spectral_norm(solution.A)


def componentwise_ratio(num, den):
    """``max_i |num_i / den_i|`` with ``0/0 = 0`` and ``t/0 = inf`` for ``t != 0``.

    Returns
    -------
    value : float
        Maximum over the finite ratios.
    infinite : bool
        Whether some ratio is infinite.
    """
    num = np.abs(np.asarray(num, dtype=float))
    den = np.abs(np.asarray(den, dtype=float))
    zero = den == 0.0
    infinite = bool(np.any(zero & (num != 0.0)))
    finite = ~zero
    value = float(np.max(num[finite] / den[finite])) if np.any(finite) else 0.0
    return value, infinite


def _numerator_exact(solution, cap=None):
    K = jacobian_new(solution, cap)
    a = np.concatenate([vec(np.abs(solution.A)), np.abs(solution.b)])
    return np.abs(K) @ a


def _numerator_upper(solution):
    A, b, x, r = solution.A, solution.b, solution.x, solution.r
    absA = np.abs(A)
    return np.abs(solution.D) @ (absA @ np.abs(x) + np.abs(b)) + np.abs(solution.P_inv) @ (absA.T @ np.abs(r))


def _mixed_and_compw(num, x):
    mixed = float(np.max(num) / np.max(np.abs(x)))
    value, infinite = componentwise_ratio(num, x)
    return mixed, value, infinite


def mixed_compw_exact(solution, cap=None):
    """Mixed and componentwise condition numbers from the explicit Jacobian.

    Returns ``(m, c)``; ``c`` is ``inf`` when some ``x_i = 0`` has a nonzero numerator.
    """
    mixed, value, infinite = _mixed_and_compw(_numerator_exact(solution, cap), solution.x)
    return mixed, (math.inf if infinite else value)


def mixed_compw_upper(solution):
    """Kronecker-free upper bounds ``(m_u, c_u)`` on the mixed/componentwise numbers.

    Numerator ``|P^{-1} A^T H0| (|A||x| + |b|) + |P^{-1}| |A^T| |r|``.
    """
    mixed, value, infinite = _mixed_and_compw(_numerator_upper(solution), solution.x)
    return mixed, (math.inf if infinite else value)


@dataclass
class ConditionReport:
    """Condition numbers of one solved problem.

    ``kappa_abs`` is ``kappa4`` and ``kappa_rel`` its relative version.
    Infinite componentwise values are stored as the maximum over finite
    components with the matching ``flags`` entry set.
    """

    kappa_abs: float
    kappa_rel: float
    kappa_variants: dict
    kappa_A: float
    kappa_b: float
    mixed: Optional[float]
    compw: Optional[float]
    mixed_upper: float
    compw_upper: float
    flags: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

def condition_report(solution, full_k=None, cross_product=True, cap=None):
    """Evaluate every condition number available for ``solution``.

    Parameters
    ----------
    full_k : bool or None
        ``None`` builds the explicit Jacobian only if it fits the dense cap,
        ``True`` requires it, ``False`` skips it.
    cross_product : bool
        Also evaluate the forms that build ``A^T A`` (``k1``, ``k2``,
        ``k_zy28``, ``k_zy_new``).
    """
    m, n = solution.A.shape
    if full_k is None:
        limit = _config.dense_cap() if cap is None else cap
        full_k = n * m * (n + 1) <= limit
    if full_k:
        check_dense_size(n, m * (n + 1), cap, "Jacobian")

    k4 = kappa4(solution)
    variants = {"k3": kappa3(solution), "k4": k4}
    if cross_product:
        variants.update(
            k1=kappa1(solution),
            k2=kappa2(solution),
            k_zy28=kappa_zy28(solution),
            k_zy_new=kappa_zy_new(solution),
        )
    mixed = compw = None
    compw_inf = False
    if full_k:
        variants["k_full"] = norm_k(solution, cap)
        mixed, compw, compw_inf = _mixed_and_compw(_numerator_exact(solution, cap), solution.x)
    mu, cu, cu_inf = _mixed_and_compw(_numerator_upper(solution), solution.x)
    kappa_A, kappa_b = perturbation_bound_coefficients(solution)
    return ConditionReport(
        kappa_abs=k4,
        kappa_rel=float(relative(solution, k4)),
        kappa_variants=variants,
        kappa_A=kappa_A,
        kappa_b=kappa_b,
        mixed=mixed,
        compw=compw,
        mixed_upper=mu,
        compw_upper=cu,
        flags={
            "used_explicit_K": bool(full_k),
            "used_cross_product": bool(cross_product),
            "compw_infinite": compw_inf,
            "compw_upper_infinite": cu_inf,
            "sigma2_is_ls_residual": solution.problem.n2 == 0,
        },
    )

