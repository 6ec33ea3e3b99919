"""Matrix-free l1-regularized least-squares instances with planted solutions,
and first- and second-order solvers to benchmark on them."""
from .estimator import L1LeastSquares
from .instance import (
    CertificateReport,
    ProblemInstance,
    igen,
    igen2,
    load_instance,
    save_instance,
    subgradient_of,
    verify_optimality,
)
from .operator import (
    BlockOperator,
    DenseOperator,
    ExplicitStage,
    Operator,
    OperatorSpec,
    Permutation,
    RotationStage,
    Spectrum,
    stage_composition,
)
from .solution import (
    ConditioningReport,
    SparseSolution,
    conditioning_report,
    kappa_AtA,
    kappa_rho,
    osgen,
    osgen3,
)
from .solvers import SolverConfig, SolverTrace, objective, run_solver

__version__ = "0.1.0"

__all__ = [
    "L1LeastSquares",
    "CertificateReport",
    "ProblemInstance",
    "igen",
    "igen2",
    "load_instance",
    "save_instance",
    "subgradient_of",
    "verify_optimality",
    "BlockOperator",
    "DenseOperator",
    "ExplicitStage",
    "Operator",
    "OperatorSpec",
    "Permutation",
    "RotationStage",
    "Spectrum",
    "stage_composition",
    "ConditioningReport",
    "SparseSolution",
    "conditioning_report",
    "kappa_AtA",
    "kappa_rho",
    "osgen",
    "osgen3",
    "SolverConfig",
    "SolverTrace",
    "objective",
    "run_solver",
]
