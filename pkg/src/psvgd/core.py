"""Priors, particle ensembles, the model protocol and seeded prior sampling.

Priors and models work on batches: a parameter array of shape ``(n, d)``
holds one particle per row.  Single vectors of shape ``(d,)`` are accepted
everywhere and produce unbatched results.
"""

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np
import scipy.linalg

from psvgd.errors import ConfigurationError, DomainError


def as_batch(x):
    """Return ``(X, squeeze)`` with ``X`` two-dimensional."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return x[None, :], True
    if x.ndim != 2:
        raise ValueError(f"expected a vector or a matrix of row vectors, got shape {x.shape}")
    return x, False


def _unbatch(values, squeeze):
    return values[0] if squeeze else values


def particle_streams(seed, count):
    """One independent generator per particle, derived from a master seed.

    Particle ``n`` always receives the same stream for a given seed, so draws
    do not depend on how particles are later split across workers.
    """
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.Generator(np.random.PCG64(child)) for child in children]


@dataclass
class ParticleEnsemble:
    """``N`` samples of a ``d``-dimensional parameter, stored row-wise."""

    particles: np.ndarray

    def __post_init__(self):
        particles = np.array(self.particles, dtype=float)
        if particles.ndim != 2 or particles.shape[0] < 1 or particles.shape[1] < 1:
            raise ConfigurationError(f"particles must be an N x d matrix with N, d >= 1, got {particles.shape}")
        if not np.all(np.isfinite(particles)):
            raise DomainError("particle ensemble contains non-finite entries")
        self.particles = particles

    @property
    def count(self):
        return self.particles.shape[0]

    @property
    def dim(self):
        return self.particles.shape[1]

    def copy(self):
        return ParticleEnsemble(self.particles.copy())


@runtime_checkable
class InferenceModel(Protocol):
    """Likelihood ``f`` of the data as a function of the parameter."""

    dim: int
    data: np.ndarray

    def log_likelihood(self, x) -> np.ndarray: ...

    def grad_log_likelihood(self, x) -> np.ndarray: ...


class GaussianPrior:
    """Gaussian prior given by a dense covariance or a banded precision.

    The dense form factorizes ``covariance = L L^T``.  The banded form stores
    the precision in LAPACK lower band layout (row ``k`` holds the ``k``-th
    subdiagonal) and factorizes ``precision = U^T U`` once, so that
    ``covariance = U^{-1} U^{-T}`` and ``L = U^{-1}`` is never formed.

    ``log_density`` is unnormalized.
    """

    is_gaussian = True
    bounded = False

    def __init__(self, mean, covariance):
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        cov = np.atleast_2d(np.asarray(covariance, dtype=float))
        if cov.shape != (mean.size, mean.size):
            raise ConfigurationError(f"covariance shape {cov.shape} does not match mean of length {mean.size}")
        scale = max(np.max(np.abs(cov)), np.finfo(float).tiny)
        if np.max(np.abs(cov - cov.T)) > 1e-12 * scale:
            raise ConfigurationError("covariance is not symmetric")
        try:
            factor = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise ConfigurationError(f"covariance is not positive definite: {exc}") from None
        if not np.all(np.diag(factor) > 0):
            raise ConfigurationError("covariance is not positive definite")
        self.mean = mean
        self._cov = 0.5 * (cov + cov.T)
        self._chol = factor
        self._band_upper = None
        self._precision_band = None

    @classmethod
    def from_banded_precision(cls, mean, precision_band):
        """Build from a symmetric banded precision in lower band layout."""
        self = cls.__new__(cls)
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        band = np.atleast_2d(np.asarray(precision_band, dtype=float))
        if band.shape[1] != mean.size:
            raise ConfigurationError("precision band does not match the mean length")
        try:
            lower = scipy.linalg.cholesky_banded(band, lower=True)
        except np.linalg.LinAlgError as exc:
            raise ConfigurationError(f"precision is not positive definite: {exc}") from None
        self.mean = mean
        self._cov = None
        self._chol = None
        self._precision_band = band
        # precision = R R^T with R lower; U = R^T in upper band layout
        p = band.shape[0] - 1
        upper = np.zeros_like(lower)
        for k in range(p + 1):
            upper[p - k, k:] = lower[k, : mean.size - k]
        self._band_upper = upper
        self._band_lower = lower
        return self

    @property
    def dim(self):
        return self.mean.size

    @property
    def bandwidth(self):
        return None if self._precision_band is None else self._precision_band.shape[0] - 1

    @property
    def covariance(self):
        """Dense covariance (formed on demand for the banded form)."""
        if self._cov is None:
            cov = scipy.linalg.cho_solve_banded((self._band_upper, False), np.eye(self.dim))
            self._cov = 0.5 * (cov + cov.T)
        return self._cov

    def precision_apply(self, x):
        """Rows of ``x`` multiplied by the precision."""
        X, squeeze = as_batch(x)
        if self._precision_band is None:
            out = scipy.linalg.cho_solve((self._chol, True), X.T).T
        else:
            band = self._precision_band
            out = band[0] * X
            for k in range(1, band.shape[0]):
                # symmetric: Q[i+k, i] = Q[i, i+k] = band[k, i]
                out[:, k:] += band[k, :-k] * X[:, :-k]
                out[:, :-k] += band[k, :-k] * X[:, k:]
        return _unbatch(out, squeeze)

    def log_density(self, x):
        X, squeeze = as_batch(x)
        centered = X - self.mean
        return _unbatch(-0.5 * np.sum(centered * self.precision_apply(centered), axis=1), squeeze)

    def grad_log_density(self, x):
        X, squeeze = as_batch(x)
        return _unbatch(-self.precision_apply(X - self.mean), squeeze)

    def whiten_rows(self, g):
        """Map rows ``g`` to ``L^T g`` where ``covariance = L L^T``."""
        G, squeeze = as_batch(g)
        if self._chol is not None:
            out = G @ self._chol
        else:
            # L^T g = U^{-T} g, a lower-triangular banded solve
            out = scipy.linalg.solve_banded((self.bandwidth, 0), self._band_lower, G.T).T
        return _unbatch(out, squeeze)

    def unwhiten(self, v):
        """Map columns ``v`` to ``L v``."""
        V = np.asarray(v, dtype=float)
        if self._chol is not None:
            return self._chol @ V
        return scipy.linalg.solve_banded((0, self.bandwidth), self._band_upper, V)

    def from_standard(self, z):
        """Transform rows of standard normal draws into prior draws."""
        Z, squeeze = as_batch(z)
        return _unbatch(self.mean + self.unwhiten(Z.T).T, squeeze)

    def project_to_support(self, x):
        return x

    def in_support(self, x):
        X, squeeze = as_batch(x)
        return _unbatch(np.ones(X.shape[0], dtype=bool), squeeze)

    def _standard_draw(self, rng):
        return rng.standard_normal(self.dim)


class UniformPrior:
    """Independent uniform prior on the box ``[lower, upper]``.

    The density is flat on the closed box; its log-gradient there is zero.
    """

    is_gaussian = False
    bounded = True

    def __init__(self, lower, upper):
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        if lower.shape != upper.shape:
            raise ConfigurationError("lower and upper bounds differ in shape")
        if not np.all(lower < upper):
            raise ConfigurationError("uniform prior needs lower < upper componentwise")
        self.lower = lower
        self.upper = upper

    @property
    def dim(self):
        return self.lower.size

    @property
    def mean(self):
        return 0.5 * (self.lower + self.upper)

    @property
    def covariance(self):
        return np.diag((self.upper - self.lower) ** 2 / 12.0)

    def in_support(self, x):
        X, squeeze = as_batch(x)
        return _unbatch(np.all((X >= self.lower) & (X <= self.upper), axis=1), squeeze)

    def log_density(self, x):
        X, squeeze = as_batch(x)
        inside = self.in_support(X)
        return _unbatch(np.where(inside, 0.0, -np.inf), squeeze)

    def grad_log_density(self, x):
        X, squeeze = as_batch(x)
        if not np.all(self.in_support(X)):
            raise DomainError("uniform prior gradient evaluated outside its support")
        return _unbatch(np.zeros_like(X), squeeze)

    def whiten_rows(self, g):
        return np.asarray(g, dtype=float) * ((self.upper - self.lower) / np.sqrt(12.0))

    def unwhiten(self, v):
        V = np.asarray(v, dtype=float)
        scale = (self.upper - self.lower) / np.sqrt(12.0)
        return scale[:, None] * V if V.ndim == 2 else scale * V

    def project_to_support(self, x):
        return np.clip(x, self.lower, self.upper)

    def from_standard(self, u):
        U, squeeze = as_batch(u)
        return _unbatch(self.lower + (self.upper - self.lower) * U, squeeze)

    def _standard_draw(self, rng):
        return rng.random(self.dim)


def sample_prior(prior, count, seed):
    """Draw ``count`` i.i.d. prior samples; identical for identical seeds."""
    if count < 1:
        raise ConfigurationError("need at least one particle")
    streams = particle_streams(seed, count)
    standard = np.stack([prior._standard_draw(rng) for rng in streams])
    return ParticleEnsemble(prior.from_standard(standard))


def grad_log_prior(prior, x):
    return prior.grad_log_density(x)
