"""Full-space Stein variational gradient descent."""

import logging
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from psvgd.core import ParticleEnsemble, sample_prior
from psvgd.errors import ConfigurationError, NumericalError
from psvgd.kernel import KernelConfig, bandwidth_from_table, pairwise_sq_distances
from psvgd.parallel import serial_pool
from psvgd.record import RunRecord

logger = logging.getLogger(__name__)


@dataclass
class SvgdConfig:
    particles: int = 64
    max_iterations: int = 100
    step: Union[str, float] = "line-search"
    step_init: float = 1.0
    max_backtracks: int = 20
    tolerance: Optional[float] = None
    kernel: KernelConfig = field(default_factory=KernelConfig)
    seed: int = 0

    def __post_init__(self):
        validate_step_settings(self.step, self.step_init, self.max_backtracks)
        if self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be at least 1")
        if self.particles < 1:
            raise ConfigurationError("need at least one particle")
        if self.tolerance is not None and self.tolerance < 0:
            raise ConfigurationError("tolerance must be non-negative")

    def tolerance_for(self, dim):
        return 1e-3 * np.sqrt(dim) if self.tolerance is None else self.tolerance


def validate_step_settings(step, step_init, max_backtracks):
    if isinstance(step, str):
        if step != "line-search":
            raise ConfigurationError(f"unknown step rule {step!r}")
        if not step_init > 0:
            raise ConfigurationError("initial step must be positive")
    elif not float(step) > 0:
        raise ConfigurationError("fixed step size must be positive")
    if max_backtracks < 0:
        raise ConfigurationError("max_backtracks must be non-negative")


def stein_direction(points, grads, kernel_config, pool=None):
    """Kernelized steepest direction and the bandwidth used.

    Row ``m`` is ``(1/N) sum_n [grads_n k(x_n, x_m) + grad_{x_n} k(x_n, x_m)]``.
    The distance table, the bandwidth, and the direction rows are separate
    phases; every row sum runs over all ``N`` particles in index order.
    """
    pool = pool or serial_pool()
    points = np.asarray(points, dtype=float)
    grads = np.asarray(grads, dtype=float)
    if grads.shape != points.shape:
        raise ConfigurationError("gradients must be row-aligned with particles")
    n = points.shape[0]
    weights = kernel_config.weights
    sq = pool.fill(lambda rows: pairwise_sq_distances(points[rows], points, weights), n)
    if not kernel_config.is_median:
        h = float(kernel_config.bandwidth)
    elif n == 1:
        # the self-kernel is 1 and its gradient 0 for any bandwidth
        h = 1.0
    else:
        h = bandwidth_from_table(sq)
    metric = None if weights is None else 1.0 + weights

    def rows_fn(rows):
        kb = np.exp(-sq[rows] / h)
        drive = kb @ grads
        repulse = points[rows] * kb.sum(axis=1)[:, None] - kb @ points
        if metric is not None:
            repulse = repulse * metric
        return (drive + (2.0 / h) * repulse) / n

    return pool.fill(rows_fn, n), h


def svgd_direction(ensemble, log_posterior_grads, kernel_config, pool=None):
    points = ensemble.particles if isinstance(ensemble, ParticleEnsemble) else ensemble
    return stein_direction(points, log_posterior_grads, kernel_config, pool)[0]


@dataclass
class LineSearchResult:
    step: float
    exhausted: bool
    points: np.ndarray
    value: float


def line_search_step(points, direction, objective, step_init=1.0, max_backtracks=20):
    """Backtracking on ``objective`` (higher is better), halving the step.

    A trial is accepted when the objective does not decrease.  After
    ``max_backtracks`` halvings without success the smallest step
    ``step_init * 2**-max_backtracks`` is returned with ``exhausted=True``.
    """
    base = objective(points)
    step = float(step_init)
    for attempt in range(max_backtracks + 1):
        trial = points + step * direction
        value = objective(trial)
        if np.isfinite(value) and value >= base:
            return LineSearchResult(step, False, trial, value)
        if attempt < max_backtracks:
            step *= 0.5
    logger.warning("line search exhausted %d backtracks; taking step %.3g", max_backtracks, step)
    return LineSearchResult(step, True, trial, value)


def log_posterior_values(model, prior, X, pool=None):
    """Unnormalized log posterior per particle row."""
    pool = pool or serial_pool()
    return pool.fill(lambda rows: model.log_likelihood(X[rows]) + prior.log_density(X[rows]), X.shape[0])


def log_posterior_grads(model, prior, X, pool=None):
    pool = pool or serial_pool()
    return pool.fill(lambda rows: model.grad_log_likelihood(X[rows]) + prior.grad_log_density(X[rows]), X.shape[0])


def mean_log_posterior(model, prior, X, pool=None):
    with np.errstate(invalid="ignore", over="ignore"):
        return float(np.mean(log_posterior_values(model, prior, X, pool)))


def take_step(points, direction, config, objective):
    """Apply the configured step rule; returns a :class:`LineSearchResult`."""
    if isinstance(config.step, str):
        return line_search_step(points, direction, objective, config.step_init, config.max_backtracks)
    step = float(config.step)
    return LineSearchResult(step, False, points + step * direction, float("nan"))


def run_svgd(model, prior, config, ensemble=None, pool=None, record=None):
    """Transport prior particles towards the posterior with SVGD.

    Stops after ``config.max_iterations`` or once the mean particle step
    norm falls to the tolerance.  Returns the final ensemble and the record.
    """
    pool = pool or serial_pool()
    if ensemble is None:
        ensemble = sample_prior(prior, config.particles, config.seed)
    X = ensemble.particles.copy()
    record = record or RunRecord(algorithm="svgd")
    tol = config.tolerance_for(X.shape[1])
    objective = lambda pts: mean_log_posterior(model, prior, pts, pool)  # noqa: E731

    with record.timed("total"):
        for it in range(config.max_iterations):
            with record.timed("gradient"):
                grads = log_posterior_grads(model, prior, X, pool)
            with record.timed("kernel"):
                direction, h = stein_direction(X, grads, config.kernel, pool)
            with record.timed("update"):
                result = take_step(X, direction, config, objective)
                X_new = result.points
                if prior.bounded:
                    X_new = prior.project_to_support(X_new)
                if not np.all(np.isfinite(X_new)):
                    raise NumericalError("non-finite particle", iteration=it)
                step_norm = float(np.mean(np.linalg.norm(X_new - X, axis=1)))
            record.log_iteration(-1, step_norm, h, result.step, result.exhausted)
            X = X_new
            if step_norm <= tol:
                record.stop_reason = "tolerance"
                break
        else:
            record.stop_reason = "max_iterations"
    return ParticleEnsemble(X), record
