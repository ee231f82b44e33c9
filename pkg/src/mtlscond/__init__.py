"""Mixed least squares / total least squares solver with perturbation and condition analysis."""

from .condition import (
    ConditionReport,
    componentwise_ratio,
    condition_report,
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
    perturbation_bound,
    perturbation_bound_coefficients,
    relative,
)
from .core import (
    MtlsProblem,
    MtlsSolution,
    WeightPattern,
    eigen_system_residual,
    genericity_gap,
    p_inverse_block,
    rayleigh_quotient,
    solve,
    stationarity_residual,
    stationarity_tolerance,
    tls_solve,
)
from .errors import (
    ConsistentSystem,
    DimensionError,
    MtlsError,
    NoConvergence,
    NonGeneric,
    RankDeficient,
    SizeOverflow,
)
from .kernels import (
    PartitionedFactorization,
    kron,
    qr_partition,
    singular_values,
    spectral_norm,
    svd,
    unvec,
    vec,
    vec_permutation,
)
from .perturbation import (
    equivalence_residual,
    jacobian_new,
    jacobian_zy,
    predict_delta_x,
    predict_delta_x_compact,
    residual_reflector,
)
from .structured import (
    StructureBasis,
    StructuredReport,
    ToeplitzInterceptBasis,
    elementary_basis,
    k_phi_structured,
    read_basis,
    reconstruct,
    structured_condition_numbers,
    toeplitz_intercept_basis,
    write_basis,
)

__version__ = "0.1.0"
