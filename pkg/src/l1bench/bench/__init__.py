"""Experiment harness: configs, presets, runs and plot-ready output."""
from .config import DESK_MAX_N, ConfigError, ExperimentConfig, GridPoint, load_config, parse_angle
from .presets import get_preset, presets
from .runner import (
    SUMMARY_COLUMNS,
    RunSummary,
    build_instance,
    emit_plot_data,
    generate_instances,
    run_experiment,
)

__all__ = [
    "DESK_MAX_N",
    "ConfigError",
    "ExperimentConfig",
    "GridPoint",
    "load_config",
    "parse_angle",
    "get_preset",
    "presets",
    "SUMMARY_COLUMNS",
    "RunSummary",
    "build_instance",
    "emit_plot_data",
    "generate_instances",
    "run_experiment",
]
