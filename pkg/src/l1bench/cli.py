"""l1bench command line.

    l1bench generate --config F --out D
    l1bench solve --instance F --solver S [--target T | --max-iters K | --max-seconds T]
    l1bench bench (--preset NAME | --config F) --out D [--jobs J]
    l1bench verify --instance F [--tol E]
    l1bench presets
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .bench import ConfigError, generate_instances, get_preset, load_config, presets, run_experiment
from .instance import load_instance, verify_optimality
from .solvers import SOLVERS, DivergenceError, SolverConfig, objective, run_solver


def _config(args):
    cfg = get_preset(args.preset) if getattr(args, "preset", None) else load_config(args.config)
    if getattr(args, "allow_full_scale", False):
        cfg = cfg.with_(allow_full_scale=True)
    return cfg


def cmd_generate(args):
    cfg = _config(args)
    for p in generate_instances(cfg, args.out):
        print(p)
    return 0


def cmd_solve(args):
    inst = load_instance(args.instance)
    scfg = SolverConfig(
        solver=args.solver,
        target_objective=args.target,
        max_iters=args.max_iters,
        max_seconds=args.max_seconds,
        seed=args.seed,
    )
    try:
        trace = run_solver(inst, scfg)
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.trace:
        trace.write_csv(args.trace)
    print(f"solver      {trace.solver}")
    print(f"status      {trace.status}")
    print(f"iterations  {trace.totals.get('iterations', trace.iterations)}")
    print(f"matvecs     {trace.matvecs:g}")
    print(f"objective   {trace.final_objective!r}")
    if inst.x_star is not None:
        print(f"f(x*)       {objective(inst, inst.x_star.to_dense())!r}")
    return 0


def cmd_bench(args):
    cfg = _config(args)
    summary = run_experiment(cfg, args.out, jobs=args.jobs)
    print(f"{cfg.name}: {len(summary)} runs, summary in {Path(args.out) / 'summary.csv'}")
    return 0 if summary.ok else 1


def cmd_verify(args):
    inst = load_instance(args.instance)
    if inst.x_star is None:
        print("instance has no planted solution", file=sys.stderr)
        return 2
    rep = verify_optimality(inst, args.tol)
    print(f"active residual      {rep.active_residual:.3e}")
    print(f"inactive violation   {rep.inactive_violation:.3e}")
    print(f"tolerance (x tau)    {rep.tol:.1e}")
    print("PASS" if rep.passed else "FAIL")
    return 0 if rep.passed else 1


def cmd_presets(args):
    for name, cfg in presets().items():
        print(f"{name:30s} {len(cfg.grid())} instances x {len(cfg.solvers)} solvers")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="l1bench", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write the instances of a config")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path)
    src.add_argument("--preset")
    g.add_argument("--out", type=Path, required=True)
    g.add_argument("--allow-full-scale", action="store_true")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="run one solver on an instance file")
    s.add_argument("--instance", type=Path, required=True)
    s.add_argument("--solver", choices=sorted(SOLVERS), required=True)
    s.add_argument("--target", type=float)
    s.add_argument("--max-iters", type=int)
    s.add_argument("--max-seconds", type=float)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trace", type=Path, help="write the trace CSV here")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="run an experiment")
    src = b.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path)
    src.add_argument("--preset")
    b.add_argument("--out", type=Path, required=True)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--allow-full-scale", action="store_true")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", help="check the optimality certificate of x*")
    v.add_argument("--instance", type=Path, required=True)
    v.add_argument("--tol", type=float, default=1e-8)
    v.set_defaults(func=cmd_verify)

    ls = sub.add_parser("presets", help="list built-in experiments")
    ls.set_defaults(func=cmd_presets)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
