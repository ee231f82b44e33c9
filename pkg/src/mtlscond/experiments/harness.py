"""Perturbation trials, error measures and the finite-difference oracle."""

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ..condition import (
    componentwise_ratio,
    condition_report,
    kappa2,
    kappa4,
    kappa_zy28,
    perturbation_bound,
    relative,
)
from ..core import solve
from ..errors import ConsistentSystem, MtlsError, NonGeneric
from ..kernels import spectral_norm
from ..perturbation import jacobian_new, jacobian_zy, predict_delta_x
from ..structured import reconstruct, structured_condition_numbers
from .generators import rng_for

__all__ = [
    "BoundViolation",
    "EpsMeasures",
    "TrialRecord",
    "BOUND_PAIRS",
    "perturb_entrywise",
    "perturb_structured",
    "eps_measures",
    "run_first_order_trial",
    "run_bound_trial",
    "finite_difference_jacobian",
    "loglog_slope",
]

#: bound column -> error column it must dominate
BOUND_PAIRS = {
    "eps1_kappa0": "dx_rel_2",
    "eps1_kappa4": "dx_rel_2",
    "bound_kab": "dx_rel_2",
    "eps1s_kappas": "dx_rel_2",
    "eps2_m": "dx_rel_inf",
    "eps2_mu": "dx_rel_inf",
    "eps2s_ms": "dx_rel_inf",
    "eps2_c": "dx_compw",
    "eps2_cu": "dx_compw",
    "eps2s_cs": "dx_compw",
}


class BoundViolation(MtlsError, AssertionError):
    """An emitted bound is smaller than the error it should dominate."""


@dataclass
class EpsMeasures:
    """Relative sizes of a perturbation.

    ``eps2`` is the smallest ``e`` with ``|dA| <= e|A|`` and ``|db| <= e|b|``;
    when a nonzero perturbation hits a zero entry ``eps2`` holds the finite
    maximum and ``eps2_infinite`` is set. The ``_s`` fields measure the
    structured parameters ``[alpha; b]`` instead.
    """

    eps1: float
    eps2: float
    eps2_infinite: bool = False
    eps1_s: Optional[float] = None
    eps2_s: Optional[float] = None
    eps2_s_infinite: bool = False


@dataclass
class TrialRecord:
    """Outcome of one perturbation trial.

    ``skipped`` holds the error name when the base or perturbed problem was
    rejected; the numeric fields are then ``None``.
    """

    seed: int
    epsilon: float
    eps1: Optional[float] = None
    eps2: Optional[float] = None
    eps1_s: Optional[float] = None
    eps2_s: Optional[float] = None
    dx_norm: Optional[float] = None
    dx_rel_2: Optional[float] = None
    dx_rel_inf: Optional[float] = None
    dx_compw: Optional[float] = None
    eta_new: Optional[float] = None
    eta_zy: Optional[float] = None
    bounds: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    skipped: Optional[str] = None

    def violations(self):
        """Names of bounds that fall below their paired error."""
        out = []
        for bound, error in BOUND_PAIRS.items():
            value = self.bounds.get(bound)
            observed = getattr(self, error)
            if value is None or observed is None:
                continue
            if value < observed:
                out.append(bound)
        return out

    def to_dict(self):
        return asdict(self)


def _exact_mask(shape, exact_mask):
    m, cols = shape
    if exact_mask is None:
        return np.zeros(shape, dtype=bool)
    mask = np.asarray(exact_mask)
    if mask.dtype == bool and mask.shape == shape:
        return mask
    out = np.zeros(shape, dtype=bool)
    out[:, np.asarray(exact_mask, dtype=int)] = True
    return out


def perturb_entrywise(problem, epsilon, seed, exact_mask=None, distribution="uniform"):
    """Entrywise relative perturbation ``[dA, db] = epsilon * U .* [A, b]``.

    ``U`` is drawn uniformly from ``[0, 1)`` (or standard normal with
    ``distribution="normal"``). ``exact_mask`` is either a boolean array of
    the shape of ``[A, b]`` or a sequence of column indices of ``[A, b]``
    that must stay unperturbed.
    """
    rng = rng_for(seed)
    m, n = problem.A.shape
    if distribution == "uniform":
        U = rng.random((m, n + 1))
    elif distribution == "normal":
        U = rng.standard_normal((m, n + 1))
    else:
        raise ValueError(f"unknown distribution {distribution!r}")
    dAb = epsilon * U * problem.Ab
    dAb[_exact_mask((m, n + 1), exact_mask)] = 0.0
    return dAb[:, :n], dAb[:, n].copy()


def perturb_structured(basis, b, epsilon, seed, exact_params=(0,)):
    """Structure-preserving perturbation ``dalpha = epsilon * randn .* alpha``, ``db = epsilon * randn .* b``.

    Parameters listed in ``exact_params`` (by default the intercept) are not
    perturbed. Returns ``(dA, db, dalpha)``.
    """
    rng = rng_for(seed)
    dalpha = epsilon * rng.standard_normal(basis.q) * basis.alpha
    dalpha[list(exact_params)] = 0.0
    db = epsilon * rng.standard_normal(len(b)) * np.asarray(b)
    return reconstruct(basis, dalpha), db, dalpha


def eps_measures(A, b, dA, db, alpha=None, dalpha=None):
    """Normwise and componentwise sizes of ``[dA, db]`` relative to ``[A, b]``."""
    Ab = np.column_stack([A, b])
    dAb = np.column_stack([dA, db])
    eps1 = float(np.linalg.norm(dAb) / np.linalg.norm(Ab))
    eps2, inf2 = componentwise_ratio(dAb, Ab)
    out = EpsMeasures(eps1=eps1, eps2=eps2, eps2_infinite=inf2)
    if alpha is not None:
        s = np.concatenate([alpha, b])
        ds = np.concatenate([dalpha, db])
        out.eps1_s = float(np.linalg.norm(ds) / np.linalg.norm(s))
        out.eps2_s, out.eps2_s_infinite = componentwise_ratio(ds, s)
    return out


def _errors(record, x, dx):
    record.dx_norm = float(np.linalg.norm(dx))
    record.dx_rel_2 = record.dx_norm / float(np.linalg.norm(x))
    record.dx_rel_inf = float(np.max(np.abs(dx)) / np.max(np.abs(x)))
    value, infinite = componentwise_ratio(dx, x)
    record.dx_compw = value
    record.flags["dx_compw_infinite"] = infinite


def run_first_order_trial(problem, epsilon, seed, base=None, dA=None, db=None):
    """Compare the true solution change with both first-order predictions.

    Records ``eta_new = ||dx - K vec||`` and ``eta_zy = ||dx - K_ZY vec||``
    and, in ``bounds``, the five absolute normwise values ``norm_k_zy``,
    ``k_zy28``, ``norm_k``, ``kappa2`` and ``kappa4``.
    """
    record = TrialRecord(seed=seed, epsilon=epsilon)
    try:
        base = solve(problem) if base is None else base
        if dA is None:
            dA, db = perturb_entrywise(problem, epsilon, seed)
        pert = solve(problem.perturbed(dA, db))
    except (NonGeneric, ConsistentSystem) as exc:
        record.skipped = type(exc).__name__
        return record
    try:
        K = jacobian_new(base)
        K_zy = jacobian_zy(base)
    except (NonGeneric, ConsistentSystem) as exc:
        record.skipped = type(exc).__name__
        return record
    dx = pert.x - base.x
    _errors(record, base.x, dx)
    eps = eps_measures(problem.A, problem.b, dA, db)
    record.eps1, record.eps2 = eps.eps1, eps.eps2
    record.eta_new = float(np.linalg.norm(dx - predict_delta_x(K, dA, db)))
    record.eta_zy = float(np.linalg.norm(dx - predict_delta_x(K_zy, dA, db)))
    record.bounds = {
        "norm_k_zy": spectral_norm(K_zy),
        "k_zy28": kappa_zy28(base),
        "norm_k": spectral_norm(K),
        "kappa2": kappa2(base),
        "kappa4": kappa4(base),
    }
    return record


def run_bound_trial(
    problem,
    epsilon,
    seed,
    structured=None,
    exact_mask=None,
    full_k=None,
    base=None,
    strict=True,
):
    """Relative forward errors of one perturbed solve next to their first-order bounds.

    Parameters
    ----------
    structured : StructureBasis, optional
        Perturb the structure parameters (normal draws, intercept exact) and
        also record the structured bounds.
    exact_mask : optional
        Columns of ``[A, b]`` left unperturbed in the unstructured case.
    full_k : bool or None
        Forwarded to :func:`condition_report`; the explicit Jacobian gives
        ``eps1_kappa0``, ``eps2_m`` and ``eps2_c``.
    strict : bool
        Raise :class:`BoundViolation` if any bound is below its error.

    Bounds recorded: ``eps1_kappa4``, ``bound_kab``, ``eps2_mu``, ``eps2_cu``
    and, when available, ``eps1_kappa0``, ``eps2_m``, ``eps2_c``,
    ``eps1s_kappas``, ``eps2s_ms``, ``eps2s_cs``.
    """
    record = TrialRecord(seed=seed, epsilon=epsilon)
    try:
        base = solve(problem) if base is None else base
        if structured is not None:
            dA, db, dalpha = perturb_structured(structured, problem.b, epsilon, seed)
        else:
            dA, db = perturb_entrywise(problem, epsilon, seed, exact_mask)
            dalpha = None
        pert = solve(problem.perturbed(dA, db))
    except (NonGeneric, ConsistentSystem) as exc:
        record.skipped = type(exc).__name__
        return record

    try:
        report = condition_report(base, full_k=full_k, cross_product=False)
        srep = None if structured is None else structured_condition_numbers(base, structured)
    except (NonGeneric, ConsistentSystem) as exc:
        record.skipped = type(exc).__name__
        return record

    _errors(record, base.x, pert.x - base.x)
    eps = eps_measures(
        problem.A, problem.b, dA, db,
        alpha=None if structured is None else structured.alpha,
        dalpha=dalpha,
    )
    record.eps1, record.eps2 = eps.eps1, eps.eps2
    record.eps1_s, record.eps2_s = eps.eps1_s, eps.eps2_s
    record.flags["eps2_infinite"] = eps.eps2_infinite

    bounds = {
        "eps1_kappa4": eps.eps1 * report.kappa_rel,
        "bound_kab": perturbation_bound(base, spectral_norm(dA), np.linalg.norm(db)),
        "eps2_mu": eps.eps2 * report.mixed_upper,
        "eps2_cu": eps.eps2 * report.compw_upper,
    }
    if report.flags["used_explicit_K"]:
        bounds["eps1_kappa0"] = eps.eps1 * relative(base, report.kappa_variants["k_full"])
        bounds["eps2_m"] = eps.eps2 * report.mixed
        bounds["eps2_c"] = eps.eps2 * report.compw
        record.flags["m_le_mu"] = report.mixed <= report.mixed_upper * (1 + 1e-10)
        record.flags["c_le_cu"] = report.compw <= report.compw_upper * (1 + 1e-10)
    if srep is not None:
        bounds["eps1s_kappas"] = eps.eps1_s * srep.kappa_s
        bounds["eps2s_ms"] = eps.eps2_s * srep.mixed_s
        bounds["eps2s_cs"] = eps.eps2_s * srep.compw_s
        record.flags["compw_s_infinite"] = srep.flags["compw_infinite"]
    record.flags["compw_upper_infinite"] = report.flags["compw_upper_infinite"]
    record.bounds = {k: float(v) for k, v in bounds.items()}
    bad = record.violations()
    if strict and bad:
        raise BoundViolation(f"bounds {bad} fall below the observed error (seed {seed})")
    return record


def finite_difference_jacobian(problem, h=1e-6):
    """Central-difference Jacobian of ``vec([A, b]) -> x``.

    Entry ``a`` of ``[A, b]`` is stepped by ``h * max(1, |a|)``. Every stencil
    point is solved from scratch, so :class:`NonGeneric` propagates.
    """
    m, n = problem.A.shape
    Ab = problem.Ab
    flat = Ab.reshape(-1, order="F")
    J = np.empty((n, flat.size))
    for k in range(flat.size):
        step = h * max(1.0, abs(flat[k]))
        cols = []
        for sign in (1.0, -1.0):
            pert = flat.copy()
            pert[k] += sign * step
            M = pert.reshape(m, n + 1, order="F")
            cols.append(solve(type(problem)(M[:, :n], M[:, n], problem.n1)).x)
        J[:, k] = (cols[0] - cols[1]) / (2.0 * step)
    return J


def loglog_slope(xs, ys):
    """Least-squares slope of ``log10(ys)`` against ``log10(xs)``."""
    return float(np.polyfit(np.log10(xs), np.log10(ys), 1)[0])

