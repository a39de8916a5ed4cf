"""Run one configured experiment and write its artifacts."""

import json
import logging
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from psvgd.core import ParticleEnsemble, sample_prior
from psvgd.harness import io
from psvgd.harness.config import dump_config
from psvgd.harness.metrics import coverage, mean_rmse, variance_rmse
from psvgd.models import ConditionalDiffusionModel, LinearGaussianModel, LogisticRegressionModel, build_problem
from psvgd.models.reference import reference_posterior_rwmh
from psvgd.parallel import WorkerPool
from psvgd.projected import run_adaptive_psvgd, run_psvgd
from psvgd.record import RunRecord
from psvgd.svgd import run_svgd

logger = logging.getLogger(__name__)

OUTPUT_ENV = "PSVGD_OUTPUT_DIR"


@dataclass
class ExperimentResult:
    config: object
    ensemble: ParticleEnsemble
    record: RunRecord
    metrics: dict
    out_dir: Optional[str] = None


def model_key(config):
    """Identifies the inference problem; runs are comparable iff keys match."""
    return json.dumps({"model": config.model, "params": config.model_params, "prior": config.prior}, sort_keys=True)


def model_metrics(model, ensemble):
    """Accuracy metrics that the model's ground truth makes available."""
    X = ensemble.particles
    out = {}
    if isinstance(model, LinearGaussianModel):
        if X.shape[0] >= 2:
            out["variance_rmse"] = variance_rmse(X, model.posterior_variance)
        out["mean_rmse"] = mean_rmse(X, model.map_point)
    elif isinstance(model, ConditionalDiffusionModel):
        paths = model.brownian_path(X)
        truth = model.brownian_path(model.truth)
        out["path_mean_rmse"] = mean_rmse(paths, truth)
        out["path_coverage_90"] = coverage(paths, truth, 0.9)
        out["data_misfit"] = float(np.mean(np.sqrt(np.mean((model.forward(X) - model.data) ** 2, axis=1))))
    elif isinstance(model, LogisticRegressionModel):
        prob = model.predict_proba(X).mean(axis=0)
        out["train_accuracy"] = float(np.mean((prob > 0.5) == (model.labels == 1)))
    return out


def run_metrics(record):
    out = {"iterations": record.iteration_count, "adaptations": record.adaptation_count}
    if record.iteration_count:
        out["final_step_norm"] = float(record.step_norms[-1])
        out["exhausted_line_searches"] = int(np.sum(record.iterations["backtrack_exhausted"]))
    if record.ranks:
        out["final_rank"] = record.ranks[-1]
    return out


def _transport(config, model, prior, pool):
    settings = config.transport_config()
    ensemble = sample_prior(prior, config.particles, config.seed)
    if config.algorithm == "svgd":
        return run_svgd(model, prior, settings, ensemble, pool)
    if config.algorithm == "psvgd":
        return run_psvgd(model, prior, settings, ensemble, pool=pool)
    return run_adaptive_psvgd(model, prior, settings, ensemble, pool)


def _reference(config, model, prior):
    record = RunRecord(algorithm="rwmh-reference")
    with record.timed("total"):
        ref = reference_posterior_rwmh(model, prior, config.chain_length, config.seed, burn_in=config.burn_in)
    record.stop_reason = "chain_length"
    extra = {"acceptance_rate": ref.acceptance_rate, "min_ess": float(np.min(ref.ess)), "rate_warning": int(ref.warning)}
    return ParticleEnsemble(ref.samples), record, extra


def resolve_output_dir(config, out_dir=None):
    """Explicit argument, then the environment variable, then the config."""
    return out_dir or os.environ.get(OUTPUT_ENV) or config.output_dir


def run_experiment(config, out_dir=None):
    """Execute the configured algorithm; write artifacts when a directory is known."""
    model, prior = build_problem(config.model, config.model_params, config.prior)
    extra = {}
    if config.algorithm == "rwmh-reference":
        ensemble, record, extra = _reference(config, model, prior)
    else:
        with WorkerPool(config.workers) as pool:
            ensemble, record = _transport(config, model, prior, pool)
    metrics = {**run_metrics(record), **model_metrics(model, ensemble), **extra}
    out_dir = resolve_output_dir(config, out_dir)
    if out_dir:
        write_artifacts(out_dir, config, ensemble, record, metrics)
    return ExperimentResult(config, ensemble, record, metrics, out_dir)


def write_artifacts(out_dir, config, ensemble, record, metrics):
    os.makedirs(out_dir, exist_ok=True)
    dump_config(config, os.path.join(out_dir, io.CONFIG_FILE))
    io.save_ensemble(os.path.join(out_dir, io.ENSEMBLE_FILE), ensemble)
    io.save_record(out_dir, record, {"label": config.label, "model_key": model_key(config)})
    io.save_metrics(os.path.join(out_dir, io.METRICS_FILE), metrics)
    logger.info("wrote %s", out_dir)


def load_summary(run_dir):
    """Facts, timings and metrics of a finished run directory."""
    facts = io.load_run_facts(run_dir)
    metrics = io.load_metrics(os.path.join(run_dir, io.METRICS_FILE))
    record = io.load_record(run_dir)
    return {
        "run": facts.get("label") or os.path.basename(os.path.normpath(run_dir)),
        "algorithm": facts.get("algorithm", ""),
        "model_key": facts.get("model_key", ""),
        "iterations": record.iteration_count,
        "final_rank": record.ranks[-1] if record.ranks else "",
        "total_seconds": record.timings["total"],
        "metrics": {k: v for k, v in metrics.items() if k not in ("iterations", "final_rank")},
    }
