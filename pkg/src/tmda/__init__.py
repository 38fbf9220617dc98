"""Per-manifold discrepancy alignment for unsupervised domain adaptation.

A numpy/scipy library that discovers low-dimensional manifolds shared by a
source and a target domain (sparse self-representation plus normalized cuts)
and learns a kernelized projection minimizing the per-manifold mean-embedding
discrepancy, together with a synthetic benchmark generator, evaluation
utilities and an experiment command line.
"""

from .data import (
    Dataset,
    SynthConfig,
    TransferTask,
    estimate_intrinsic_dim,
    generate_synthetic,
    read_labels,
    read_matrix,
    subspace_dim_from_mle,
    write_labels,
    write_matrix,
)
from .discrepancy import (
    DiscrepancyCoefficients,
    DomainSplit,
    build_coefficients,
    empirical_m3d,
    empirical_mmd,
    feature_m3d,
)
from .errors import (
    DegenerateDataError,
    DegeneratePartitionError,
    DivergenceError,
    NumericalError,
    ParseError,
    TmdaError,
    ValidationError,
)
from .evaluation import (
    EvalReport,
    StrategySelection,
    accuracy,
    eval_report,
    nn_classify,
    rmse,
    select_linear_strategy,
)
from .kernels import (
    KernelSpec,
    kernel_cross,
    kernel_matrix,
    median_bandwidth,
    resolve_bandwidth,
)
from .manifolds import (
    AdmmConfig,
    AdmmState,
    admm_affinity,
    default_mu,
    ncut_cluster,
    soft_threshold,
)
from .solver import (
    TmdaConfig,
    TmdaModel,
    fit,
    load_model,
    save_model,
    solve_projection,
    transform,
)

__version__ = "0.1.0"

__all__ = [
    "AdmmConfig",
    "AdmmState",
    "Dataset",
    "DegenerateDataError",
    "DegeneratePartitionError",
    "DiscrepancyCoefficients",
    "DivergenceError",
    "DomainSplit",
    "EvalReport",
    "KernelSpec",
    "NumericalError",
    "ParseError",
    "StrategySelection",
    "SynthConfig",
    "TmdaConfig",
    "TmdaError",
    "TmdaModel",
    "TransferTask",
    "ValidationError",
    "accuracy",
    "admm_affinity",
    "build_coefficients",
    "default_mu",
    "empirical_m3d",
    "empirical_mmd",
    "estimate_intrinsic_dim",
    "eval_report",
    "feature_m3d",
    "fit",
    "generate_synthetic",
    "kernel_cross",
    "kernel_matrix",
    "load_model",
    "median_bandwidth",
    "ncut_cluster",
    "nn_classify",
    "read_labels",
    "read_matrix",
    "resolve_bandwidth",
    "rmse",
    "save_model",
    "select_linear_strategy",
    "soft_threshold",
    "solve_projection",
    "subspace_dim_from_mle",
    "transform",
    "write_labels",
    "write_matrix",
]
