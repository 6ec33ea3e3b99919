"""scikit-learn style wrapper around the solvers."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .instance import ProblemInstance
from .operator import DenseOperator, Operator
from .solvers import SOLVERS, SolverConfig, objective, run_solver

__all__ = ["L1LeastSquares", "check_operator", "check_vector"]


def check_operator(A):
    """Return ``A`` as an Operator; dense and sparse matrices are wrapped."""
    if isinstance(A, Operator):
        return A
    if sp.issparse(A):
        A = check_array(A, accept_sparse=("csr", "csc"), dtype=float)
    else:
        A = check_array(A, dtype=float)
    return DenseOperator(A)


def check_vector(v, length, name="b"):
    v = np.asarray(v, dtype=float)
    if v.ndim == 2 and 1 in v.shape:
        v = v.ravel()
    if v.shape != (length,):
        raise ValueError(f"{name} must have shape ({length},), got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite values")
    return v


class L1LeastSquares(RegressorMixin, BaseEstimator):
    """Minimize ``tau ||x||_1 + 0.5 ||Ax - b||^2``.

    ``fit(A, b)`` accepts an ndarray, a scipy sparse matrix or any
    :class:`~l1bench.operator.Operator`, so implicit operators never have to
    be formed.  The fitted coefficients are in ``coef_`` and the full run
    record in ``trace_``.
    """

    def __init__(self, tau=1.0, solver="fista", max_iter=None, max_seconds=None, tol=None,
                 mu=1e-5, eta=0.1, lipschitz="backtracking", processors=40, random_state=0):
        self.tau = tau
        self.solver = solver
        self.max_iter = max_iter
        self.max_seconds = max_seconds
        self.tol = tol
        self.mu = mu
        self.eta = eta
        self.lipschitz = lipschitz
        self.processors = processors
        self.random_state = random_state

    def _config(self):
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}; choose from {sorted(SOLVERS)}")
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        seed = self.random_state if isinstance(self.random_state, (int, np.integer)) else 0
        return SolverConfig(
            solver=self.solver,
            max_iters=self.max_iter,
            max_seconds=self.max_seconds,
            mu=self.mu,
            eta=self.eta,
            grad_tol=self.tol,
            lipschitz=self.lipschitz,
            processors=self.processors,
            seed=int(seed),
        )

    def fit(self, A, b):
        op = check_operator(A)
        b = check_vector(b, op.shape[0])
        cfg = self._config()
        inst = ProblemInstance(float(self.tau), op, b)
        self.trace_ = run_solver(inst, cfg)
        self.coef_ = np.asarray(self.trace_.x, dtype=float)
        self.n_iter_ = int(self.trace_.totals.get("iterations", self.trace_.iterations))
        self.status_ = self.trace_.status
        self.objective_ = objective(inst, self.coef_)
        self.n_features_in_ = op.shape[1]
        return self

    def predict(self, A):
        check_is_fitted(self, "coef_")
        op = check_operator(A)
        if op.shape[1] != self.coef_.shape[0]:
            raise ValueError(f"A has {op.shape[1]} columns, expected {self.coef_.shape[0]}")
        return op.matvec(self.coef_)
