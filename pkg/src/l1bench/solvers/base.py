from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field, fields, replace
from typing import NamedTuple

import numpy as np

__all__ = [
    "SolverConfig",
    "SolverTrace",
    "TraceSample",
    "DivergenceError",
    "objective",
    "soft_threshold",
    "read_trace_csv",
    "TRACE_COLUMNS",
]

TRACE_COLUMNS = ["solver", "iter", "elapsed_s", "objective", "nnz_x", "matvecs", "extra"]

STATUS_TARGET = "target-reached"
STATUS_ITERS = "iter-budget"
STATUS_TIME = "time-budget"
STATUS_CONVERGED = "converged"


class DivergenceError(ArithmeticError):
    """A solver produced a non-finite objective value."""


@dataclass(frozen=True)
class SolverConfig:
    """Parameters shared by all solvers; each solver reads the ones it needs.

    ``max_iters`` counts proximal-gradient iterations for ISTA/FISTA, epochs
    of n coordinate updates for CDM and Newton steps for pdNCG.  ``None``
    picks the per-solver default in ``DEFAULT_MAX_ITERS``.  ``pcg_max_iters``
    defaults to n, the exact-arithmetic bound for CG.
    """

    solver: str = "fista"
    max_iters: int | None = None
    max_seconds: float | None = None
    target_objective: float | None = None
    tau: float | None = None
    mu: float = 1e-5
    eta: float = 0.1
    pcg_max_iters: int | None = None
    ls_max_backtracks: int = 50
    grad_tol: float | None = None
    newton: str = "primal-dual"
    lipschitz: str = "backtracking"
    lipschitz_init: float | None = None
    ls_decrease: float = 0.5
    processors: int = 40
    omega: int | None = None
    sampling: str = "permutation"
    seed: int = 0

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")
        if self.processors < 1:
            raise ValueError("processors must be >= 1")
        if self.omega is not None and self.omega < 1:
            raise ValueError("omega must be >= 1")
        if self.newton not in ("primal-dual", "primal"):
            raise ValueError("newton must be 'primal-dual' or 'primal'")
        if self.lipschitz not in ("exact", "backtracking"):
            raise ValueError("lipschitz must be 'exact' or 'backtracking'")
        if self.sampling not in ("permutation", "replacement"):
            raise ValueError("sampling must be 'permutation' or 'replacement'")
        if self.pcg_max_iters is not None and self.pcg_max_iters < 1:
            raise ValueError("pcg_max_iters must be >= 1")
        if self.max_iters is not None and self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if not 0 < self.ls_decrease <= 1:
            raise ValueError("ls_decrease must lie in (0, 1]")

    def with_(self, **kw):
        return replace(self, **kw)

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown solver option(s): {sorted(unknown)}")
        return cls(**d)


DEFAULT_MAX_ITERS = {"ista": 100_000, "fista": 10_000, "cdm": 10_000, "pdncg": 200}


class TraceSample(NamedTuple):
    iter: int
    elapsed_s: float
    objective: float
    nnz_x: int
    matvecs: float
    extra: int


@dataclass
class SolverTrace:
    solver: str
    samples: list = field(default_factory=list)
    status: str = ""
    x: np.ndarray | None = None
    totals: dict = field(default_factory=dict)
    target: float | None = None

    @property
    def final_objective(self):
        return self.samples[-1].objective if self.samples else float("nan")

    @property
    def iterations(self):
        return self.samples[-1].iter if self.samples else 0

    @property
    def matvecs(self):
        return self.totals.get("matvecs", 0)

    def first_reaching(self, level):
        for s in self.samples:
            if s.objective <= level:
                return s
        return None

    @property
    def time_to_target(self):
        if self.target is None:
            return None
        s = self.first_reaching(self.target)
        return None if s is None else s.elapsed_s

    @property
    def matvecs_to_target(self):
        if self.target is None:
            return None
        s = self.first_reaching(self.target)
        return None if s is None else s.matvecs

    def rows(self):
        for s in self.samples:
            yield [self.solver, s.iter, s.elapsed_s, s.objective, s.nnz_x, s.matvecs, s.extra]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRACE_COLUMNS)
            for row in self.rows():
                w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def read_trace_csv(path):
    samples = []
    solver = None
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            solver = row["solver"]
            samples.append(
                TraceSample(
                    int(row["iter"]),
                    float(row["elapsed_s"]),
                    float(row["objective"]),
                    int(row["nnz_x"]),
                    float(row["matvecs"]),
                    int(row["extra"]),
                )
            )
    return SolverTrace(solver or "", samples)


def objective(inst, x, Ax=None):
    """tau ||x||_1 + 0.5 ||Ax - b||^2 (one product with A unless ``Ax`` is given)."""
    x = np.asarray(x, dtype=float)
    if Ax is None:
        Ax = inst.op.matvec(x)
    r = Ax - inst.b
    return float(inst.tau * np.abs(x).sum() + 0.5 * (r @ r))


def soft_threshold(v, t):
    """sign(v) * max(|v| - t, 0), the minimizer of t|y| + (y - v)^2 / 2."""
    v = np.asarray(v, dtype=float)
    out = np.sign(v) * np.maximum(np.abs(v) - t, 0.0)
    return out if out.ndim else float(out)


class Recorder:
    """Clock, budgets and trace sampling for one solver run."""

    def __init__(self, name, cfg: SolverConfig, max_iters):
        self.trace = SolverTrace(name, target=cfg.target_objective)
        self.cfg = cfg
        self.max_iters = max_iters
        self.matvecs = 0.0
        self.t0 = time.perf_counter()

    def elapsed(self):
        return time.perf_counter() - self.t0

    def record(self, it, obj, x, extra=0):
        if not np.isfinite(obj):
            raise DivergenceError(f"{self.trace.solver}: objective became {obj} at iteration {it}")
        self.trace.samples.append(
            TraceSample(int(it), self.elapsed(), float(obj), int(np.count_nonzero(x)),
                        float(self.matvecs), int(extra))
        )

    def stop_reason(self, it, obj):
        """Budget/target status after iteration ``it`` with objective ``obj``, else None."""
        cfg = self.cfg
        if cfg.target_objective is not None and obj <= cfg.target_objective:
            return STATUS_TARGET
        if it >= self.max_iters:
            return STATUS_ITERS
        if cfg.max_seconds is not None and self.elapsed() >= cfg.max_seconds:
            return STATUS_TIME
        return None

    def finish(self, status, x, **totals):
        self.trace.status = status
        self.trace.x = x
        self.trace.totals = {"matvecs": float(self.matvecs), **totals}
        return self.trace


def resolve(inst, cfg, solver):
    cfg = cfg if cfg is not None else SolverConfig(solver=solver)
    tau = inst.tau if cfg.tau is None else cfg.tau
    max_iters = cfg.max_iters if cfg.max_iters is not None else DEFAULT_MAX_ITERS[solver]
    return cfg, float(tau), int(max_iters)
