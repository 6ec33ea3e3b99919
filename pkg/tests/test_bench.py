import csv
import json
import logging

import numpy as np
import pytest

from l1bench.bench import (
    ConfigError,
    ExperimentConfig,
    build_instance,
    emit_plot_data,
    generate_instances,
    get_preset,
    load_config,
    presets,
    run_experiment,
)
from l1bench.bench.config import parse_angle
from l1bench.instance import load_instance, verify_optimality
from l1bench.solvers import SolverTrace, TraceSample, read_trace_csv

TINY = {
    "name": "tiny",
    "n": [128],
    "spectrum": {"kind": "uniform", "q": [0, 2], "shift": 0.1},
    "theta": ["2pi/3"],
    "solution": {"generator": "osgen", "gamma": 10},
    "s_divisor": 16,
    "solvers": [{"solver": "ista"}, {"solver": "fista"}, {"solver": "cdm"}, {"solver": "pdncg"}],
    "budgets": {"max_seconds": 10, "max_iters": 3000},
}


def tiny(**kw):
    return ExperimentConfig.from_dict({**TINY, **kw})


# -- configs and presets ------------------------------------------------------------------


@pytest.mark.parametrize("text,value", [("2pi/3", 2 * np.pi / 3), ("pi", np.pi),
                                        ("2pi/1000", 2 * np.pi / 1000), (0.5, 0.5)])
def test_parse_angle(text, value):
    assert parse_angle(text) == pytest.approx(value)


def test_parse_angle_rejects_garbage():
    with pytest.raises(ConfigError):
        parse_angle("two pi")


def test_empty_solver_list_rejected():
    with pytest.raises(ConfigError, match="solver"):
        tiny(solvers=[])


@pytest.mark.parametrize("bad", [
    {"n": []},
    {"solution": {"generator": "omp", "gamma": 1}},
    {"spectrum": {"kind": "gaussian"}},
    {"solvers": [{"solver": "lbfgs"}]},
    {"solvers": [{"solver": "fista"}]},  # reference pdncg missing
    {"budgets": {"wall": 3}},
    {"n": [2**20]},
    {"tau": [0.0]},
    {"colour": "red"},
])
def test_invalid_configs_rejected(bad):
    with pytest.raises(ConfigError):
        tiny(**bad)


def test_full_scale_needs_explicit_flag():
    cfg = tiny(n=[2**20], allow_full_scale=True)
    assert cfg.grid()[0].n == 2**20


def test_config_file_round_trip(tmp_path):
    cfg = tiny()
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg.to_dict()))
    assert load_config(p) == cfg
    y = tmp_path / "c.yaml"
    y.write_text("name: y\nn: [64]\nsolvers: [{solver: pdncg}]\n")
    assert load_config(y).name == "y"


def test_catalog_contents():
    cat = presets()
    assert len(cat) >= 6
    with pytest.raises(TypeError):
        cat["new"] = None
    for cfg in cat.values():
        cfg.validate()
        assert max(cfg.n) <= 2**16


def test_conditioning_sweep_counts():
    cfg = get_preset("conditioning-sweep")
    assert len(cfg.grid()) == 6
    assert len(cfg.grid()) * len(cfg.solver_labels()) == 24


def test_tau_sweep_values():
    assert set(get_preset("tau-sweep").tau) == {1e-4, 1e-2, 1e2, 1e4}


def test_density_sweep_stage_counts():
    assert tuple(get_preset("density-sweep").stages) == (1, 2, 3, 4)


def test_nontrivial_solution_angles():
    cfg = get_preset("nontrivial-solution")
    thetas = sorted({p.theta for p in cfg.grid()})
    assert thetas == pytest.approx([2 * np.pi / 1000, 2 * np.pi / 10])


def test_unknown_preset():
    with pytest.raises(KeyError):
        get_preset("nope")


# -- instances ---------------------------------------------------------------------------------


def test_instances_are_deterministic_and_certified(tmp_path):
    cfg = tiny()
    a = generate_instances(cfg, tmp_path / "a")
    b = generate_instances(cfg, tmp_path / "b")
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()
        assert verify_optimality(load_instance(pa)).passed


def test_instance_cache_reused(tmp_path):
    cfg = tiny()
    (p,) = generate_instances(cfg.with_(spectrum={"kind": "uniform", "q": [0], "shift": 0.1}),
                              tmp_path)
    stamp = p.stat().st_mtime_ns
    generate_instances(cfg.with_(spectrum={"kind": "uniform", "q": [0], "shift": 0.1}), tmp_path)
    assert p.stat().st_mtime_ns == stamp


def test_osgen3_and_fixed_generators():
    cfg = tiny(solution={"generator": "osgen3", "gamma": 100, "s1_frac": 0.5})
    inst = build_instance(cfg, cfg.grid()[0])
    assert inst.x_star.s == 128 // 16
    cfg = tiny(spectrum={"kind": "alternating", "values": [0.1, 100]},
               solution={"generator": "fixed", "values": [-1e4, 0.1]})
    inst = build_instance(cfg, cfg.grid()[0])
    assert set(inst.x_star.values) == {-1e4, 0.1}
    assert verify_optimality(inst, 1e-6).passed


# -- runs ----------------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def tiny_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    return run_experiment(tiny(), out), out


def test_summary_has_every_pair_once(tiny_run):
    summary, out = tiny_run
    cfg = tiny()
    assert len(summary) == len(cfg.grid()) * len(cfg.solver_labels())
    pairs = {(r["instance"], r["solver"]) for r in summary.rows}
    assert len(pairs) == len(summary)
    with open(out / "summary.csv") as fh:
        assert len(list(csv.DictReader(fh))) == len(summary)
    assert summary.ok


def test_reference_objective_is_valid_target(tiny_run):
    summary, _ = tiny_run
    for r in summary.rows:
        if r["status"] == "target-reached":
            assert r["final_objective"] <= r["target"] * (1 + 1e-12)
        assert r["target"] >= r["f_star"] * (1 - 1e-12)


def test_trace_and_plot_files(tiny_run):
    summary, out = tiny_run
    traces = sorted((out / "traces").glob("*.csv"))
    plots = sorted((out / "plot").glob("*.csv"))
    assert len(traces) == len(plots) == len(summary)
    for p in plots:
        with open(p) as fh:
            rows = list(csv.DictReader(fh))
        assert rows
        for row in rows:
            assert float(row["objective"]) >= float(row["best_known"]) - 1e-12 * abs(
                float(row["best_known"]))


def test_runs_are_reproducible(tiny_run, tmp_path):
    summary, out = tiny_run
    again = run_experiment(tiny(), tmp_path)
    for name in sorted(p.name for p in (out / "traces").glob("*.csv")):
        a = read_trace_csv(out / "traces" / name).samples
        b = read_trace_csv(tmp_path / "traces" / name).samples
        assert [(s.iter, s.objective, s.nnz_x, s.matvecs) for s in a] == \
               [(s.iter, s.objective, s.nnz_x, s.matvecs) for s in b]
    assert [r["status"] for r in again.rows] == [r["status"] for r in summary.rows]


def test_parallel_mode_matches_sequential_iterates(tiny_run, tmp_path):
    summary, _ = tiny_run
    par = run_experiment(tiny(), tmp_path, jobs=2)
    for a, b in zip(summary.rows, par.rows):
        assert (a["instance"], a["solver"], a["matvecs"]) == (b["instance"], b["solver"],
                                                              b["matvecs"])


def test_single_trace_gives_one_series(tmp_path):
    tr = SolverTrace("fista", [TraceSample(0, 0.0, 3.0, 0, 0.0, 0),
                               TraceSample(1, 0.1, 2.0, 1, 2.0, 0)])
    written = emit_plot_data({("inst", "fista"): tr}, tmp_path, {"inst": 1.5})
    assert len(written) == 1
    rows = list(csv.DictReader(open(written[0])))
    assert [float(r["gap"]) for r in rows] == [1.5, 0.5]


def test_empty_trace_skipped_with_warning(tmp_path, caplog):
    with caplog.at_level(logging.WARNING):
        written = emit_plot_data({("inst", "cdm"): SolverTrace("cdm")}, tmp_path)
    assert written == [] and "empty trace" in caplog.text
