"""Solvers for tau ||x||_1 + 0.5 ||Ax - b||^2 over matrix-free operators."""
from .base import (
    DivergenceError,
    SolverConfig,
    SolverTrace,
    TraceSample,
    objective,
    read_trace_csv,
    soft_threshold,
)
from .coordinate import cdm_beta, cdm_run, partial_separability
from .newton import (
    PCGBreakdown,
    PCGResult,
    grad_smoothed,
    hessvec_smoothed,
    pcg_solve,
    pdncg_run,
    primal_dual_hess_diag,
    pseudo_huber,
    smoothed_objective,
)
from .proximal import fista_run, ista_run

SOLVERS = {
    "ista": ista_run,
    "fista": fista_run,
    "cdm": cdm_run,
    "pdncg": pdncg_run,
}


def run_solver(inst, cfg):
    """Dispatch on ``cfg.solver``."""
    try:
        fn = SOLVERS[cfg.solver]
    except KeyError:
        raise ValueError(f"unknown solver {cfg.solver!r}; choose from {sorted(SOLVERS)}") from None
    return fn(inst, cfg)


__all__ = [
    "SOLVERS",
    "run_solver",
    "DivergenceError",
    "SolverConfig",
    "SolverTrace",
    "TraceSample",
    "objective",
    "read_trace_csv",
    "soft_threshold",
    "cdm_beta",
    "cdm_run",
    "partial_separability",
    "PCGBreakdown",
    "PCGResult",
    "grad_smoothed",
    "hessvec_smoothed",
    "pcg_solve",
    "pdncg_run",
    "primal_dual_hess_diag",
    "pseudo_huber",
    "smoothed_objective",
    "fista_run",
    "ista_run",
]
