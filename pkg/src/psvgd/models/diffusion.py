"""Conditional diffusion driven by a Brownian forcing.

``du = b(u) dt + dx_t`` with ``b(u) = 10 u (1 - u^2) / (1 + u^2)`` and
``u_0 = 0``, discretized by Euler-Maruyama.  Two parameterizations of the
forcing are supported.  With ``"increments"`` the parameter is the vector
of whitened Brownian increments ``z``, so ``dx_k = sqrt(dt) z_k`` and the
prior is standard normal.  With ``"path"`` the parameter is the path
``x(t_1..t_K)`` itself, whose prior covariance is ``min(t, t')``.  Noisy
observations of ``u`` are taken at equispaced times in (0, 1].
"""

import numpy as np

from psvgd.core import GaussianPrior, as_batch
from psvgd.errors import ConfigurationError


def drift(u):
    return 10.0 * u * (1.0 - u**2) / (1.0 + u**2)


def drift_derivative(u):
    u2 = u**2
    return 10.0 * (1.0 - 4.0 * u2 - u2**2) / (1.0 + u2) ** 2


PARAMETERIZATIONS = ("increments", "path")


class ConditionalDiffusionModel:
    def __init__(self, data, steps=100, n_obs=20, noise_std=0.1, parameterization="increments"):
        if steps % n_obs:
            raise ConfigurationError("the number of steps must be a multiple of the number of observations")
        if parameterization not in PARAMETERIZATIONS:
            raise ConfigurationError(f"unknown parameterization {parameterization!r}")
        self.parameterization = parameterization
        self.steps = int(steps)
        self.dim = self.steps
        self.dt = 1.0 / steps
        self.noise_std = float(noise_std)
        self.obs_index = np.arange(1, n_obs + 1) * (steps // n_obs)
        self.data = np.asarray(data, dtype=float)
        if self.data.shape != (n_obs,):
            raise ConfigurationError(f"expected {n_obs} observations")
        self.truth = None

    @property
    def obs_times(self):
        return self.obs_index * self.dt

    def increments(self, x):
        """Whitened increments ``z`` of a parameter (rows allowed)."""
        x = np.asarray(x, dtype=float)
        if self.parameterization == "increments":
            return x
        return np.diff(x, prepend=0.0, axis=-1) / np.sqrt(self.dt)

    def states(self, x):
        """Solution ``u_0..u_K`` for each parameter row, shape ``(n, K + 1)``."""
        Z, squeeze = as_batch(self.increments(x))
        u = self._euler(Z)
        return u[0] if squeeze else u

    def _euler(self, Z):
        root_dt = np.sqrt(self.dt)
        u = np.zeros((Z.shape[0], self.steps + 1))
        for k in range(self.steps):
            u[:, k + 1] = u[:, k] + self.dt * drift(u[:, k]) + root_dt * Z[:, k]
        return u

    def forward(self, z):
        """Observed states ``u(t_i)``."""
        u = self.states(z)
        return u[..., self.obs_index]

    def brownian_path(self, x):
        """Forcing path ``x(t_k)`` at ``t_1..t_K``."""
        if self.parameterization == "path":
            return np.asarray(x, dtype=float).copy()
        return np.sqrt(self.dt) * np.cumsum(np.asarray(x, dtype=float), axis=-1)

    def log_likelihood(self, x):
        resid = self.data - self.forward(x)
        return -0.5 * np.sum(resid**2, axis=-1) / self.noise_std**2

    def grad_log_likelihood(self, x):
        """Reverse sweep through the Euler-Maruyama recursion."""
        Z, squeeze = as_batch(self.increments(x))
        u = self._euler(Z)
        misfit = np.zeros_like(u)
        misfit[:, self.obs_index] = (self.data - u[:, self.obs_index]) / self.noise_std**2
        root_dt = np.sqrt(self.dt)
        grad = np.empty_like(Z)
        adj = misfit[:, self.steps].copy()
        for k in range(self.steps - 1, -1, -1):
            # adj holds d loglik / d u_{k+1}
            grad[:, k] = root_dt * adj
            adj = misfit[:, k] + adj * (1.0 + self.dt * drift_derivative(u[:, k]))
        if self.parameterization == "path":
            # chain rule through z_k = (x_k - x_{k-1}) / sqrt(dt)
            grad = grad / root_dt
            grad[:, :-1] -= grad[:, 1:].copy()
        return grad[0] if squeeze else grad


def diffusion_build(steps=100, n_obs=20, noise_std=0.1, seed=0, parameterization="increments"):
    """Synthetic data from a prior draw of the forcing.

    The draw is made in increments, so both parameterizations see the same
    data and the same true path for a given seed; ``truth`` is expressed in
    the chosen parameterization.
    """
    rng = np.random.default_rng(seed)
    truth = rng.standard_normal(steps)
    probe = ConditionalDiffusionModel(np.zeros(n_obs), steps, n_obs, noise_std)
    data = probe.forward(truth) + noise_std * rng.standard_normal(n_obs)
    model = ConditionalDiffusionModel(data, steps, n_obs, noise_std, parameterization)
    model.truth = probe.brownian_path(truth) if parameterization == "path" else truth
    return model


def diffusion_prior(steps=100, parameterization="increments"):
    """Standard normal on increments, or Brownian motion on the path.

    The path prior is stored through its tridiagonal precision
    ``D^T D / dt`` with ``D`` the first-difference matrix.
    """
    if parameterization == "increments":
        return GaussianPrior(np.zeros(steps), np.eye(steps))
    if parameterization != "path":
        raise ConfigurationError(f"unknown parameterization {parameterization!r}")
    dt = 1.0 / steps
    band = np.zeros((2, steps))
    band[0] = 2.0 / dt
    band[0, -1] = 1.0 / dt
    band[1, :-1] = -1.0 / dt
    return GaussianPrior.from_banded_precision(np.zeros(steps), band)
