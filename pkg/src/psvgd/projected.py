"""Projected SVGD: transport of subspace coefficients with frozen complements.

The inner loop moves coefficients ``w_n`` in a fixed basis while each
particle's complement ``x_n^perp`` stays as it was at projection time.
The adaptive driver rebuilds the basis from gradients at the current
particles, re-projects (refreezing the complements), runs the inner loop,
and reconstructs.
"""

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from psvgd.core import ParticleEnsemble, as_batch, sample_prior
from psvgd.errors import ConfigurationError, NumericalError
from psvgd.kernel import KernelConfig
from psvgd.parallel import serial_pool
from psvgd.record import RunRecord
from psvgd.subspace import (
    ProjectionBasis,
    assemble_gradient_stack,
    generalized_eigensolve,
    project,
    projection_error_bound,
    select_rank,
)
from psvgd.svgd import (
    LineSearchResult,
    line_search_step,
    mean_log_posterior,
    stein_direction,
    validate_step_settings,
)


@dataclass
class PsvgdConfig:
    """Settings for the inner and adaptive pSVGD loops.

    ``inner_iterations`` is the number of coefficient updates between
    subspace rebuilds; ``outer_iterations`` bounds the rebuilds.  Tolerances
    default to ``1e-3 * sqrt(dim)`` of the respective space.

    ``frame`` selects the coordinates the coefficient SVGD runs in:
    ``"prior"`` uses the prior-whitened eigen-coordinates ``omega`` with
    ``w = R omega`` (see :class:`~psvgd.subspace.ProjectionBasis`), where
    the eigen-weighted metric ``Lambda + I`` is the linearized posterior
    precision; ``"orthonormal"`` updates ``w`` directly.  The two coincide
    for a standard normal prior.
    """

    particles: int = 64
    outer_iterations: int = 10
    inner_iterations: int = 10
    step: Union[str, float] = "line-search"
    step_init: float = 1.0
    max_backtracks: int = 20
    w_tol: Optional[float] = None
    x_tol: Optional[float] = None
    rank_threshold: float = 1e-2
    max_rank: Optional[int] = None
    kernel: KernelConfig = field(default_factory=KernelConfig)
    eigen_metric: bool = True
    frame: str = "prior"
    seed: int = 0

    def __post_init__(self):
        validate_step_settings(self.step, self.step_init, self.max_backtracks)
        if self.frame not in ("prior", "orthonormal"):
            raise ConfigurationError(f"frame must be 'prior' or 'orthonormal', got {self.frame!r}")
        if self.outer_iterations < 1:
            raise ConfigurationError("outer_iterations must be at least 1")
        if self.inner_iterations < 0:
            raise ConfigurationError("inner_iterations must be non-negative")
        if self.particles < 1:
            raise ConfigurationError("need at least one particle")
        if not self.rank_threshold > 0:
            raise ConfigurationError("rank threshold must be positive")
        for tol in (self.w_tol, self.x_tol):
            if tol is not None and tol < 0:
                raise ConfigurationError("tolerances must be non-negative")

    def w_tolerance(self, rank):
        return 1e-3 * np.sqrt(rank) if self.w_tol is None else self.w_tol

    def x_tolerance(self, dim):
        return 1e-3 * np.sqrt(dim) if self.x_tol is None else self.x_tol


@dataclass
class CoefficientEnsemble:
    coeffs: np.ndarray
    complements: np.ndarray
    basis: ProjectionBasis

    def __post_init__(self):
        self.coeffs = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
        self.complements = np.atleast_2d(np.asarray(self.complements, dtype=float))
        if self.coeffs.shape != (self.complements.shape[0], self.basis.rank):
            raise ConfigurationError("coefficients must be N x r for a rank-r basis")
        if self.complements.shape[1] != self.basis.dim:
            raise ConfigurationError("complements must be N x d")

    @classmethod
    def from_particles(cls, basis, particles):
        X = particles.particles if isinstance(particles, ParticleEnsemble) else np.atleast_2d(particles)
        w, x_perp = project(basis, X)
        return cls(w, x_perp, basis)

    @property
    def count(self):
        return self.coeffs.shape[0]

    def particles_at(self, coeffs):
        return coeffs @ self.basis.psi.T + self.complements

    def reconstruct(self):
        return self.particles_at(self.coeffs)


def reconstruct_ensemble(coeff_ensemble):
    return ParticleEnsemble(coeff_ensemble.reconstruct())


def coefficient_grad_log_posterior(model, prior, basis, w, x_perp):
    """``Psi^T [grad log f + grad log p0]`` at ``Psi w + x_perp`` (row batches allowed).

    The frozen complement stands in for the integral over the complement,
    and the full prior score stands in for the marginal prior score; both
    are exact for Gaussian priors with a likelihood flat off the subspace.
    """
    W, squeeze = as_batch(w)
    X = W @ basis.psi.T + np.asarray(x_perp, dtype=float)
    grads = (model.grad_log_likelihood(X) + prior.grad_log_density(X)) @ basis.psi
    return grads[0] if squeeze else grads


def psvgd_direction(coeff_ensemble, coeff_grads, kernel_config, pool=None):
    coeffs = coeff_ensemble.coeffs if isinstance(coeff_ensemble, CoefficientEnsemble) else coeff_ensemble
    return stein_direction(coeffs, coeff_grads, kernel_config, pool)[0]


def _kernel_for(config, basis):
    if not config.eigen_metric:
        return config.kernel.with_weights(None)
    return config.kernel.with_weights(basis.eigenvalues)


def _feasible(prior, ce, directions):
    def objective(coords):
        X = coords @ directions.T + ce.complements
        return 0.0 if np.all(prior.in_support(X)) else -np.inf

    return objective


def run_psvgd_inner(coeff_ensemble, model, prior, config, pool=None, record=None, outer=0, max_iterations=None):
    """Coefficient-space SVGD in a fixed basis; complements are never written.

    Returns a new :class:`CoefficientEnsemble` and the record.  Stops after
    ``max_iterations`` (default ``config.inner_iterations``) or when the
    mean coefficient step norm reaches the w-tolerance.
    """
    pool = pool or serial_pool()
    record = record or RunRecord(algorithm="psvgd")
    ce = coeff_ensemble
    basis = ce.basis
    limit = config.inner_iterations if max_iterations is None else max_iterations
    kernel = _kernel_for(config, basis)
    tol = config.w_tolerance(basis.rank)
    if config.frame == "prior":
        frame = basis.frame
        directions = basis.psi @ frame
        to_w = lambda omega: omega @ frame.T  # noqa: E731
        omega = np.linalg.solve(frame, ce.coeffs.T).T
    else:
        directions = basis.psi
        to_w = lambda omega: omega  # noqa: E731
        omega = ce.coeffs.copy()
    W = to_w(omega)

    def coordinate_grads(omega):
        def rows_fn(rows):
            X = omega[rows] @ directions.T + ce.complements[rows]
            return (model.grad_log_likelihood(X) + prior.grad_log_density(X)) @ directions

        return pool.fill(rows_fn, ce.count)

    objective = lambda omega: mean_log_posterior(model, prior, omega @ directions.T + ce.complements, pool)  # noqa: E731

    for it in range(limit):
        with record.timed("gradient"):
            grads = coordinate_grads(omega)
        with record.timed("kernel"):
            direction, h = stein_direction(omega, grads, kernel, pool)
        with record.timed("update"):
            if isinstance(config.step, str):
                result = line_search_step(omega, direction, objective, config.step_init, config.max_backtracks)
            elif prior.bounded:
                feasible = _feasible(prior, ce, directions)
                result = line_search_step(omega, direction, feasible, float(config.step), config.max_backtracks)
            else:
                step = float(config.step)
                result = LineSearchResult(step, False, omega + step * direction, float("nan"))
            omega = result.points
            if not np.all(np.isfinite(omega)):
                raise NumericalError("non-finite coefficient", iteration=it, outer=outer)
            W_new = to_w(omega)
            step_norm = float(np.mean(np.linalg.norm(W_new - W, axis=1)))
        record.log_iteration(outer, step_norm, h, result.step, result.exhausted, basis.rank)
        W = W_new
        if step_norm <= tol:
            break
    return CoefficientEnsemble(W, ce.complements, basis), record


def build_basis(model, prior, X, config, pool=None):
    """Gradient stack, eigensolve, and rank selection at particles ``X``."""
    stack = assemble_gradient_stack(model, X, pool)
    full = generalized_eigensolve(stack, prior, config.max_rank)
    rank = select_rank(full.spectrum, config.rank_threshold)
    rank = min(rank, full.rank)
    return full.truncate(rank, config.rank_threshold)


def run_psvgd(model, prior, config, ensemble=None, basis=None, pool=None, record=None):
    """pSVGD in one fixed basis built at the initial particles (no adaptation)."""
    pool = pool or serial_pool()
    if ensemble is None:
        ensemble = sample_prior(prior, config.particles, config.seed)
    record = record or RunRecord(algorithm="psvgd")
    with record.timed("total"):
        if basis is None:
            with record.timed("gradient"):
                basis = build_basis(model, prior, ensemble.particles, config, pool)
        record.log_adaptation(basis.spectrum, basis.rank, projection_error_bound(basis.tail()))
        ce = CoefficientEnsemble.from_particles(basis, ensemble)
        ce, record = run_psvgd_inner(
            ce, model, prior, config, pool, record, outer=0,
            max_iterations=config.inner_iterations * config.outer_iterations,
        )
        X = ce.reconstruct()
        if prior.bounded:
            X = prior.project_to_support(X)
    record.stop_reason = "max_iterations"
    return ParticleEnsemble(X), record


def run_adaptive_psvgd(model, prior, config, ensemble=None, pool=None, record=None):
    """Adaptive pSVGD: rebuild the subspace, re-project, transport, reconstruct.

    Stops after ``config.outer_iterations`` rebuilds or once the mean
    particle move over one outer step reaches the x-tolerance.
    """
    pool = pool or serial_pool()
    if ensemble is None:
        ensemble = sample_prior(prior, config.particles, config.seed)
    X = ensemble.particles.copy()
    record = record or RunRecord(algorithm="psvgd-adaptive")
    x_tol = config.x_tolerance(X.shape[1])

    with record.timed("total"):
        for outer in range(config.outer_iterations):
            with record.timed("gradient"):
                basis = build_basis(model, prior, X, config, pool)
            record.log_adaptation(basis.spectrum, basis.rank, projection_error_bound(basis.tail()))
            ce = CoefficientEnsemble.from_particles(basis, X)
            try:
                ce, record = run_psvgd_inner(ce, model, prior, config, pool, record, outer=outer)
            except NumericalError as exc:
                raise exc.at_outer(outer) from exc
            X_new = ce.reconstruct()
            if prior.bounded:
                X_new = prior.project_to_support(X_new)
            x_step = float(np.mean(np.linalg.norm(X_new - X, axis=1)))
            X = X_new
            if x_step <= x_tol:
                record.stop_reason = "tolerance"
                break
        else:
            record.stop_reason = "max_iterations"
    return ParticleEnsemble(X), record
