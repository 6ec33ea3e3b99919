"""Run an experiment grid under the target-objective protocol.

For each instance the reference solver runs first; the lowest objective it
reaches becomes the target for every other solver, which then runs until it
gets there or exhausts its budget.
"""
from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..instance import igen, load_instance, read_header, save_instance
from ..operator import OperatorSpec, Spectrum, stage_composition
from ..solution import fixed_value_solution, osgen, osgen3
from ..solvers import DivergenceError, objective, read_trace_csv, run_solver
from .config import ExperimentConfig, GridPoint

__all__ = [
    "RunSummary",
    "SUMMARY_COLUMNS",
    "build_instance",
    "generate_instances",
    "run_experiment",
    "emit_plot_data",
]

log = logging.getLogger(__name__)

SUMMARY_COLUMNS = [
    "instance", "solver", "status", "time_to_target", "matvecs_to_target", "matvecs",
    "iterations", "final_objective", "target", "f_star", "kappa_AtA", "kappa_rho",
]
STATUS_ERROR = "error"
INSTANCE_SUFFIX = ".l1i"


def _seeds(cfg_seed, point):
    ss = np.random.SeedSequence([int(cfg_seed), int(point.n), int(point.index)])
    spectrum, solution, subgrad = (int(v) for v in ss.generate_state(3))
    return {"spectrum": spectrum, "solution": solution, "subgradient": subgrad}


def build_instance(cfg: ExperimentConfig, point: GridPoint):
    """Generate the instance for one grid point (deterministic in the seeds)."""
    seeds = _seeds(point.seed, point)
    n = point.n
    if cfg.spectrum["kind"] == "alternating":
        lo, hi = cfg.spectrum["values"]
        spectrum = Spectrum.alternating(n, float(lo), float(hi))
    else:
        spectrum = Spectrum.uniform(
            n, 0.0, 10.0**point.spectrum_param, float(cfg.spectrum.get("shift", 0.1)),
            seed=seeds["spectrum"],
        )
    stages = stage_composition(n, point.stages, point.theta)
    op = OperatorSpec(point.m, n, spectrum, stages)

    s = max(1, n // cfg.s_divisor)
    sol = cfg.solution
    gen = sol["generator"]
    if gen == "osgen":
        x_star = osgen(n, s, float(sol["gamma"]), rng=seeds["solution"])
    elif gen == "osgen3":
        s1 = int(round(float(sol.get("s1_frac", 0.5)) * s))
        x_star = osgen3(spectrum, stages, s1, s - s1, float(sol["gamma"]))
    else:
        x_star = fixed_value_solution(n, s, sol["values"], rng=seeds["solution"])

    inst = igen(point.tau, op, x_star, rng=seeds["subgradient"])
    inst.meta.update(
        experiment=cfg.name,
        instance=point.key,
        seeds=seeds,
        q=point.spectrum_param,
        theta=point.theta,
        stages=point.stages,
    )
    return inst


def _instance_path(out_dir, point):
    return Path(out_dir) / "instances" / f"{point.key}{INSTANCE_SUFFIX}"


def generate_instances(cfg: ExperimentConfig, out_dir):
    """Write every instance of the grid; existing files with matching seeds are kept."""
    paths = []
    for point in cfg.grid():
        path = _instance_path(out_dir, point)
        path.parent.mkdir(parents=True, exist_ok=True)
        if not _cached(path, point):
            save_instance(path, build_instance(cfg, point), cfg.rho)
        paths.append(path)
    return paths


def _cached(path, point):
    if not path.exists():
        return False
    try:
        header = read_header(path)
    except (ValueError, OSError):
        return False
    return header.get("seeds") == _seeds(point.seed, point) and header["n"] == point.n


@dataclass
class RunSummary:
    """One row per (instance, solver label)."""

    experiment: str
    rows: list = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def row(self, instance, solver):
        for r in self.rows:
            if r["instance"] == instance and r["solver"] == solver:
                return r
        raise KeyError((instance, solver))

    @property
    def ok(self):
        return all(r["status"] != STATUS_ERROR for r in self.rows)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, SUMMARY_COLUMNS)
            w.writeheader()
            for r in self.rows:
                w.writerow({k: _fmt(r.get(k)) for k in SUMMARY_COLUMNS})


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def _solve(inst, scfg):
    try:
        return run_solver(inst, scfg), None
    except DivergenceError as exc:
        return None, str(exc)


def _solve_from_file(path, scfg):
    return _solve(load_instance(path), scfg)


def _row(point, label, trace, error, target, f_star, cond):
    row = {
        "instance": point.key,
        "solver": label,
        "target": target,
        "f_star": f_star,
        "kappa_AtA": cond.get("kappa_AtA"),
        "kappa_rho": cond.get("kappa_rho"),
    }
    if trace is None:
        row.update(status=STATUS_ERROR, matvecs=None, iterations=None, final_objective=None,
                   time_to_target=None, matvecs_to_target=None)
        log.error("%s / %s: %s", point.key, label, error)
        return row
    hit = trace.first_reaching(target) if target is not None else None
    row.update(
        status=trace.status,
        matvecs=trace.matvecs,
        iterations=trace.totals.get("iterations", trace.iterations),
        final_objective=trace.final_objective,
        time_to_target=None if hit is None else hit.elapsed_s,
        matvecs_to_target=None if hit is None else hit.matvecs,
    )
    return row


def run_experiment(cfg: ExperimentConfig, out_dir, jobs=1):
    """Generate, solve and record every (instance, solver) pair of ``cfg``.

    Writes ``instances/``, ``traces/<instance>__<solver>.csv``,
    ``plot/`` series and ``summary.csv`` under ``out_dir``.  With ``jobs > 1``
    the non-reference solvers of an instance run in parallel processes; their
    timings are then only advisory.
    """
    out = Path(out_dir)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    paths = generate_instances(cfg, out)
    summary = RunSummary(cfg.name)
    labels = cfg.solver_labels()
    others = [lab for lab in labels if lab != cfg.reference]
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for point, path in zip(cfg.grid(), paths):
            inst = load_instance(path)
            cond = inst.meta.get("conditioning", {})
            f_star = objective(inst, inst.x_star.to_dense()) if inst.x_star is not None else None

            ref, err = _solve(inst, cfg.solver_config(cfg.reference))
            target = min(s.objective for s in ref.samples) if ref is not None else None
            if ref is not None:
                ref.target = target
            traces = {cfg.reference: (ref, err)}

            if pool is None:
                for lab in others:
                    traces[lab] = _solve(inst, cfg.solver_config(lab, target))
            else:
                futs = {lab: pool.submit(_solve_from_file, path, cfg.solver_config(lab, target))
                        for lab in others}
                for lab, fut in futs.items():
                    traces[lab] = fut.result()

            for lab in labels:
                trace, err = traces[lab]
                if trace is not None:
                    trace.write_csv(out / "traces" / f"{point.key}__{lab}.csv")
                summary.rows.append(_row(point, lab, trace, err, target, f_star, cond))
            log.info("%s done (target %.6g)", point.key, target if target is not None else math.nan)
    finally:
        if pool is not None:
            pool.shutdown()

    summary.write_csv(out / "summary.csv")
    f_stars = {r["instance"]: r["f_star"] for r in summary.rows}
    emit_plot_data(out / "traces", out / "plot", f_stars)
    return summary


def emit_plot_data(traces, out_dir, f_star=None):
    """Write (elapsed_s, objective, best_known, gap) series, one file per trace.

    ``traces`` is a directory of trace CSVs named ``<instance>__<solver>.csv``
    or a mapping ``{(instance, solver): SolverTrace}``.  ``best_known`` is the
    lowest objective seen on the instance across all its traces and, when
    given, ``f_star[instance]``.  Empty traces are skipped with a warning.
    """
    if isinstance(traces, (str, Path)):
        loaded = {}
        for p in sorted(Path(traces).glob("*__*.csv")):
            inst, solver = p.stem.rsplit("__", 1)
            loaded[(inst, solver)] = read_trace_csv(p)
        traces = loaded
    f_star = f_star or {}

    best = {}
    for (inst, _), tr in traces.items():
        objs = [s.objective for s in tr.samples]
        cand = [v for v in objs + [f_star.get(inst)] if v is not None and np.isfinite(v)]
        if cand:
            best[inst] = min(best.get(inst, math.inf), min(cand))

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for (inst, solver), tr in traces.items():
        if not tr.samples:
            log.warning("empty trace for %s / %s skipped", inst, solver)
            continue
        path = out / f"{inst}__{solver}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["elapsed_s", "objective", "best_known", "gap"])
            b = best[inst]
            for s in tr.samples:
                w.writerow([repr(s.elapsed_s), repr(s.objective), repr(b), repr(s.objective - b)])
        written.append(path)
    return written
