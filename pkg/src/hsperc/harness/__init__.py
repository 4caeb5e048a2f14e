"""Experiment drivers, configuration and the command line interface."""

from .cli import cli_dispatch, main
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .experiments import (run_disagreement_bound_test, run_experiment, run_marginal_test,
                          run_sensitivity_decay, run_uniqueness_sweep)
from .report import ExperimentReport, Verdict

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ExperimentReport",
    "Verdict",
    "cli_dispatch",
    "load_config",
    "main",
    "parse_config",
    "run_disagreement_bound_test",
    "run_experiment",
    "run_marginal_test",
    "run_sensitivity_decay",
    "run_uniqueness_sweep",
]
