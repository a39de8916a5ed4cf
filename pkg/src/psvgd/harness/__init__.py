"""Experiment driver: configuration, execution, metrics and artifacts."""

from psvgd.harness.config import ALGORITHMS, ExperimentConfig, config_from_dict, load_config
from psvgd.harness.metrics import compare_runs, coverage, credible_interval, mean_rmse, variance_rmse
from psvgd.harness.runner import ExperimentResult, load_summary, run_experiment

__all__ = [
    "ALGORITHMS",
    "ExperimentConfig",
    "ExperimentResult",
    "compare_runs",
    "config_from_dict",
    "coverage",
    "credible_interval",
    "load_config",
    "load_summary",
    "mean_rmse",
    "run_experiment",
    "variance_rmse",
]
