"""Accuracy metrics for particle ensembles and run comparison tables."""

import numpy as np

from psvgd.core import ParticleEnsemble
from psvgd.errors import ConfigurationError


def _particles(ensemble):
    if isinstance(ensemble, ParticleEnsemble):
        return ensemble.particles
    return np.atleast_2d(np.asarray(ensemble, dtype=float))


def variance_rmse(ensemble, reference_variance):
    """Relative L2 error of the pointwise sample variance.

    ``||var - ref|| / ||ref||``, i.e. the root mean square of the error
    divided by the root mean square of the reference.
    """
    X = _particles(ensemble)
    ref = np.asarray(reference_variance, dtype=float)
    if X.shape[0] < 2:
        raise ConfigurationError("sample variance needs at least two particles")
    if ref.shape != (X.shape[1],):
        raise ConfigurationError("reference variance must have one entry per coordinate")
    if not np.all(np.isfinite(ref)) or not np.all(ref > 0):
        raise ConfigurationError("reference variance must be finite and positive")
    var = X.var(axis=0, ddof=1)
    return float(np.linalg.norm(var - ref) / np.linalg.norm(ref))


def mean_rmse(ensemble, target):
    """Root mean square over coordinates of ``mean(ensemble) - target``."""
    X = _particles(ensemble)
    target = np.asarray(target, dtype=float)
    return float(np.sqrt(np.mean((X.mean(axis=0) - target) ** 2)))


def credible_interval(ensemble, level=0.9):
    """Per-coordinate equal-tailed interval from empirical percentiles.

    Percentiles interpolate linearly between order statistics; ``level=1``
    gives the coordinate-wise minimum and maximum.
    """
    if not 0 < level <= 1:
        raise ConfigurationError("level must lie in (0, 1]")
    X = _particles(ensemble)
    tail = 50.0 * (1.0 - level)
    lo, hi = np.percentile(X, [tail, 100.0 - tail], axis=0)
    return lo, hi


def coverage(ensemble, truth, level=0.9):
    """Fraction of coordinates of ``truth`` inside the credible band."""
    lo, hi = credible_interval(ensemble, level)
    truth = np.asarray(truth, dtype=float)
    return float(np.mean((truth >= lo) & (truth <= hi)))


COMPARE_COLUMNS = ("run", "algorithm", "iterations", "final_rank", "total_seconds")


def compare_runs(summaries):
    """Align run summaries into a table (list of rows plus header).

    Each summary is a mapping with ``run``, ``algorithm``, ``model_key``,
    ``iterations``, ``final_rank``, ``total_seconds`` and a ``metrics``
    mapping.  All runs must share the model key and the metric names.
    """
    summaries = list(summaries)
    if not summaries:
        raise ConfigurationError("nothing to compare")
    model_keys = {s["model_key"] for s in summaries}
    if len(model_keys) != 1:
        raise ConfigurationError(f"runs use different models: {sorted(model_keys)}")
    metric_names = sorted(summaries[0]["metrics"])
    for s in summaries[1:]:
        if sorted(s["metrics"]) != metric_names:
            raise ConfigurationError("runs report different metrics")
    header = list(COMPARE_COLUMNS) + metric_names
    rows = []
    for s in summaries:
        row = [s[c] for c in COMPARE_COLUMNS] + [s["metrics"][m] for m in metric_names]
        rows.append(row)
    return header, rows
