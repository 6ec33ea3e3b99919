"""Built-in experiment catalog at desk scale (n between 2^10 and 2^16)."""
from __future__ import annotations

from types import MappingProxyType

from .config import ExperimentConfig

__all__ = ["presets", "get_preset"]

ALL_SOLVERS = ({"solver": "ista"}, {"solver": "fista"}, {"solver": "cdm"}, {"solver": "pdncg"})
BUDGETS = {"max_seconds": 60.0}


def _osgen3(gamma=100.0):
    return {"generator": "osgen3", "gamma": gamma, "s1_frac": 0.5}


def _build():
    cat = [
        ExperimentConfig(
            name="conditioning-sweep",
            n=(2**12,),
            spectrum={"kind": "uniform", "q": [0, 1, 2, 3, 4, 5], "shift": 0.1},
            theta=("2pi/3",),
            solution={"generator": "osgen", "gamma": 10.0},
            solvers=ALL_SOLVERS,
            budgets=BUDGETS,
        ),
        ExperimentConfig(
            name="conditioning-sweep-gamma1000",
            n=(2**12,),
            spectrum={"kind": "uniform", "q": [0, 1, 2, 3, 4, 5], "shift": 0.1},
            theta=("2pi/3",),
            solution={"generator": "osgen", "gamma": 1000.0},
            solvers=ALL_SOLVERS,
            budgets=BUDGETS,
        ),
        ExperimentConfig(
            name="nontrivial-solution",
            n=(2**12,),
            spectrum={"kind": "uniform", "q": [0, 1, 2, 3], "shift": 0.1},
            theta=("2pi/10", "2pi/1000"),
            solution=_osgen3(),
            solvers=ALL_SOLVERS,
            budgets=BUDGETS,
        ),
        ExperimentConfig(
            name="dimension-sweep",
            n=(2**10, 2**12, 2**14, 2**16),
            spectrum={"kind": "uniform", "q": [1], "shift": 0.1},
            theta=("2pi/10",),
            solution=_osgen3(),
            solvers=ALL_SOLVERS,
            budgets=BUDGETS,
        ),
        ExperimentConfig(
            name="density-sweep",
            n=(2**12,),
            spectrum={"kind": "uniform", "q": [1], "shift": 0.1},
            theta=("2pi/10",),
            stages=(1, 2, 3, 4),
            solution=_osgen3(),
            solvers=ALL_SOLVERS,
            budgets=BUDGETS,
        ),
        ExperimentConfig(
            name="tau-sweep",
            n=(2**12,),
            spectrum={"kind": "uniform", "q": [1], "shift": 0.1},
            theta=("2pi/10",),
            tau=(1e-4, 1e-2, 1e2, 1e4),
            solution=_osgen3(),
            solvers=ALL_SOLVERS,
            budgets=BUDGETS,
        ),
        ExperimentConfig(
            name="alternating-scaling",
            n=(2**12, 2**14, 2**16),
            spectrum={"kind": "alternating", "values": [0.1, 100.0]},
            theta=("2pi/3",),
            solution={"generator": "fixed", "values": [-1e4, 0.1]},
            s_divisor=1024,
            solvers=({"solver": "pdncg", "max_iters": 100},),
            budgets=BUDGETS,
        ),
    ]
    return MappingProxyType({c.name: c for c in cat})


_CATALOG = _build()


def presets():
    """Read-only mapping from preset name to ExperimentConfig."""
    return _CATALOG


def get_preset(name):
    try:
        return _CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(_CATALOG)}") from None
