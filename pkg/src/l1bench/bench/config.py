"""Declarative experiment configuration.

A config is a grid: every combination of dimension, spectrum parameter,
rotation angle, stage count, tau and seed is one instance, and every
instance is solved by every entry of ``solvers``.  Schema (YAML or JSON)::

    name: my-sweep
    n: [4096]
    m_ratio: 2
    spectrum: {kind: uniform, q: [0, 1, 2], shift: 0.1}   # or {kind: alternating, values: [0.1, 100]}
    theta: ["2pi/3"]                                     # radians, or "Kpi/D" strings
    stages: [1]
    solution: {generator: osgen, gamma: 10}              # osgen3: gamma, s1_frac; fixed: values
    s_divisor: 128                                       # s = n // s_divisor
    tau: [1.0]
    solvers: [{solver: fista}, {solver: pdncg, max_iters: 100}]
    reference: pdncg
    seeds: [0]
    budgets: {max_seconds: 60}
"""
from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from ..solvers import SOLVERS, SolverConfig

__all__ = ["ExperimentConfig", "ConfigError", "GridPoint", "load_config", "parse_angle",
           "DESK_MAX_N"]

DESK_MAX_N = 2**16
GENERATORS = ("osgen", "osgen3", "fixed")
SPECTRA = ("uniform", "alternating")

_ANGLE = re.compile(r"^\s*([0-9.eE+-]*)\s*\*?\s*pi\s*(?:/\s*([0-9.eE+-]+))?\s*$")


class ConfigError(ValueError):
    pass


def parse_angle(v):
    """A float, or a string such as ``"2pi/3"`` or ``"pi/5"``."""
    if isinstance(v, (int, float)):
        return float(v)
    m = _ANGLE.match(str(v))
    if not m:
        raise ConfigError(f"cannot parse angle {v!r}")
    num = float(m.group(1)) if m.group(1) else 1.0
    den = float(m.group(2)) if m.group(2) else 1.0
    return num * math.pi / den


@dataclass(frozen=True)
class GridPoint:
    """One instance of an experiment grid."""

    index: int
    n: int
    m: int
    spectrum_param: float | None
    theta: float
    stages: int
    tau: float
    seed: int

    @property
    def key(self):
        q = "alt" if self.spectrum_param is None else f"q{self.spectrum_param:g}"
        return (f"n{self.n}_{q}_th{self.theta:.6g}_st{self.stages}_tau{self.tau:g}"
                f"_seed{self.seed}")


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    n: tuple
    solvers: tuple
    spectrum: dict = field(default_factory=lambda: {"kind": "uniform", "q": [1], "shift": 0.1})
    m_ratio: float = 2.0
    theta: tuple = (2 * math.pi / 3,)
    stages: tuple = (1,)
    solution: dict = field(default_factory=lambda: {"generator": "osgen", "gamma": 10.0})
    s_divisor: int = 128
    tau: tuple = (1.0,)
    reference: str = "pdncg"
    seeds: tuple = (0,)
    budgets: dict = field(default_factory=dict)
    rho: float = 0.1
    allow_full_scale: bool = False

    def __post_init__(self):
        for name in ("n", "theta", "stages", "tau", "seeds", "solvers"):
            val = getattr(self, name)
            if isinstance(val, (str, bytes, dict)) or not hasattr(val, "__iter__"):
                val = (val,)
            object.__setattr__(self, name, tuple(val))
        object.__setattr__(self, "theta", tuple(parse_angle(t) for t in self.theta))
        object.__setattr__(self, "solvers", tuple(dict(s) for s in self.solvers))
        self.validate()

    # -- validation ---------------------------------------------------------
    def validate(self):
        if not self.name:
            raise ConfigError("config needs a name")
        for name in ("n", "theta", "stages", "tau", "seeds"):
            if not getattr(self, name):
                raise ConfigError(f"{name} schedule is empty")
        if not self.solvers:
            raise ConfigError("solver list is empty")
        for n in self.n:
            if int(n) != n or n < 2:
                raise ConfigError(f"bad dimension {n}")
            if n > DESK_MAX_N and not self.allow_full_scale:
                raise ConfigError(
                    f"n={n} exceeds the desk limit {DESK_MAX_N}; set allow_full_scale: true or pass --allow-full-scale"
                )
        if self.m_ratio < 1:
            raise ConfigError("m_ratio must be >= 1 (igen needs m >= n)")
        if any(t <= 0 for t in self.tau):
            raise ConfigError("tau values must be positive")
        if any(int(k) != k or k < 0 for k in self.stages):
            raise ConfigError("stage counts must be nonnegative integers")
        if self.s_divisor < 1:
            raise ConfigError("s_divisor must be >= 1")

        kind = self.spectrum.get("kind")
        if kind not in SPECTRA:
            raise ConfigError(f"unknown spectrum kind {kind!r}; choose from {SPECTRA}")
        if kind == "uniform" and not self.spectrum.get("q"):
            raise ConfigError("uniform spectrum needs a non-empty q list")
        if kind == "alternating" and len(self.spectrum.get("values", ())) != 2:
            raise ConfigError("alternating spectrum needs two values")

        gen = self.solution.get("generator")
        if gen not in GENERATORS:
            raise ConfigError(f"unknown solution generator {gen!r}; choose from {GENERATORS}")
        if gen in ("osgen", "osgen3") and not self.solution.get("gamma", 0) > 0:
            raise ConfigError(f"{gen} needs gamma > 0")
        if gen == "fixed" and not self.solution.get("values"):
            raise ConfigError("fixed generator needs values")

        labels = set()
        for s in self.solvers:
            sid = s.get("solver")
            if sid not in SOLVERS:
                raise ConfigError(f"unknown solver {sid!r}; choose from {sorted(SOLVERS)}")
            opts = {k: v for k, v in s.items() if k != "label"}
            try:
                SolverConfig.from_dict(opts)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"solver {sid!r}: {exc}") from None
            label = s.get("label", sid)
            if label in labels:
                raise ConfigError(f"duplicate solver label {label!r}; add a 'label' key")
            labels.add(label)
        if self.reference not in labels:
            raise ConfigError(f"reference solver {self.reference!r} is not in the solver list")
        unknown = set(self.budgets) - {"max_seconds", "max_iters"}
        if unknown:
            raise ConfigError(f"unknown budget key(s): {sorted(unknown)}")

    # -- grid ---------------------------------------------------------------
    def spectrum_params(self):
        if self.spectrum["kind"] == "alternating":
            return [None]
        return [float(q) for q in self.spectrum["q"]]

    def grid(self):
        combos = itertools.product(
            self.n, self.spectrum_params(), self.theta, self.stages, self.tau, self.seeds
        )
        return [
            GridPoint(i, int(n), int(round(self.m_ratio * n)), q, float(th), int(k), float(t),
                      int(sd))
            for i, (n, q, th, k, t, sd) in enumerate(combos)
        ]

    def solver_labels(self):
        return [s.get("label", s["solver"]) for s in self.solvers]

    def solver_config(self, label, target=None):
        for s in self.solvers:
            if s.get("label", s["solver"]) == label:
                opts = {k: v for k, v in s.items() if k != "label"}
                for k, v in self.budgets.items():
                    opts.setdefault(k, v)
                if target is not None:
                    opts["target_objective"] = float(target)
                return SolverConfig.from_dict(opts)
        raise KeyError(label)

    # -- I/O ----------------------------------------------------------------
    @classmethod
    def from_dict(cls, d):
        names = set(cls.__dataclass_fields__)
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
        missing = {"name", "n", "solvers"} - set(d)
        if missing:
            raise ConfigError(f"missing config key(s): {sorted(missing)}")
        return cls(**d)

    def to_dict(self):
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    def with_(self, **kw):
        d = self.to_dict()
        d.update(kw)
        return ExperimentConfig.from_dict(d)


def load_config(path):
    text = Path(path).read_text()
    if str(path).endswith(".json"):
        data = json.loads(text)
    else:
        data = yaml.safe_load(text)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping at the top level")
    return ExperimentConfig.from_dict(data)
