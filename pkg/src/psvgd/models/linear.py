"""Linear inverse problem for a 1D diffusion-reaction equation.

The parameter ``x`` is the nodal source of ``-u'' + u = x`` on (0, 1) with
``u(0) = 0`` and ``u(1) = 1``, discretized by piecewise-linear finite
elements on ``d`` uniform nodes.  Observing ``u`` at ``s`` equispaced
interior points gives an affine map; the lift from the boundary value is
subtracted from the data so the likelihood is ``exp(-|y - A x|^2 / (2 sigma^2))``.
The prior precision is the finite-element matrix of ``-0.1 Laplacian + I``.
"""

import numpy as np
import scipy.linalg
import scipy.sparse

from psvgd.core import GaussianPrior, as_batch
from psvgd.errors import ConfigurationError


def fem_matrices(d):
    """Stiffness and mass matrices (sparse, natural boundary) on ``d`` nodes of [0, 1]."""
    if d < 3:
        raise ConfigurationError("need at least three nodes")
    h = 1.0 / (d - 1)
    main_k = np.full(d, 2.0 / h)
    main_k[[0, -1]] = 1.0 / h
    main_m = np.full(d, 4.0 * h / 6.0)
    main_m[[0, -1]] = 2.0 * h / 6.0
    off = np.ones(d - 1)
    K = scipy.sparse.diags([-off / h, main_k, -off / h], [-1, 0, 1], format="csr")
    M = scipy.sparse.diags([off * h / 6.0, main_m, off * h / 6.0], [-1, 0, 1], format="csr")
    return K, M


def laplacian_prior(d, alpha=0.1):
    """Gaussian prior whose precision is ``alpha K + M`` (banded, never inverted)."""
    K, M = fem_matrices(d)
    Q = (alpha * K + M).todia()
    band = np.zeros((2, d))
    band[0] = Q.diagonal(0)
    band[1, :-1] = Q.diagonal(-1)
    return GaussianPrior.from_banded_precision(np.zeros(d), band)


def observation_matrix(d, s):
    """Linear interpolation of nodal values at ``t_j = j / (s + 1)``, j = 1..s."""
    t = np.arange(1, s + 1) / (s + 1)
    pos = t * (d - 1)
    left = np.minimum(np.floor(pos + 1e-12).astype(int), d - 2)
    frac = pos - left
    O = np.zeros((s, d))
    O[np.arange(s), left] = 1.0 - frac
    O[np.arange(s), left + 1] += frac
    O[np.abs(O) < 1e-12] = 0.0
    return O


class LinearGaussianModel:
    """Gaussian likelihood with a linear forward map and a Gaussian prior.

    The posterior is Gaussian with covariance
    ``(A^T A / sigma^2 + Gamma^{-1})^{-1}`` and mean at the MAP point.
    """

    def __init__(self, forward, noise_std, data, prior):
        A = np.atleast_2d(np.asarray(forward, dtype=float))
        data = np.atleast_1d(np.asarray(data, dtype=float))
        if A.shape[0] != data.size:
            raise ConfigurationError("forward map rows must match the data length")
        if A.shape[1] != prior.dim:
            raise ConfigurationError("forward map columns must match the prior dimension")
        if not noise_std > 0:
            raise ConfigurationError("noise standard deviation must be positive")
        self.A = A
        self.noise_std = float(noise_std)
        self.data = data
        self.prior = prior
        self.dim = A.shape[1]
        self._post_cov = None
        self.truth = None

    def log_likelihood(self, x):
        X, squeeze = as_batch(x)
        resid = self.data - X @ self.A.T
        out = -0.5 * np.sum(resid**2, axis=1) / self.noise_std**2
        return out[0] if squeeze else out

    def grad_log_likelihood(self, x):
        X, squeeze = as_batch(x)
        out = (self.data - X @ self.A.T) @ self.A / self.noise_std**2
        return out[0] if squeeze else out

    @property
    def posterior_covariance(self):
        if self._post_cov is None:
            precision = self.A.T @ self.A / self.noise_std**2 + self.prior.precision_apply(np.eye(self.dim))
            precision = 0.5 * (precision + precision.T)
            self._post_cov = scipy.linalg.cho_solve(scipy.linalg.cho_factor(precision), np.eye(self.dim))
        return self._post_cov

    @property
    def posterior_variance(self):
        return np.diag(self.posterior_covariance).copy()

    @property
    def map_point(self):
        rhs = self.A.T @ self.data / self.noise_std**2 + self.prior.precision_apply(self.prior.mean)
        return self.posterior_covariance @ rhs


def linear_build(d=17, s=15, sigma_rel=0.01, prior_spec="laplacian", seed=0):
    """Assemble the diffusion-reaction problem and synthesize data.

    The true parameter is a prior draw; the noise level is
    ``sigma_rel * max |O u|`` with the boundary lift included in ``u``.
    """
    if not 1 <= s < d:
        raise ConfigurationError("need 1 <= s < d observations")
    K, M = fem_matrices(d)
    S = (K + M).tocsr()
    interior = np.arange(1, d - 1)
    S_ii = S[interior][:, interior].todia()
    band = np.zeros((3, d - 2))
    band[0, 1:] = S_ii.diagonal(1)
    band[1] = S_ii.diagonal(0)
    band[2, :-1] = S_ii.diagonal(-1)

    O = observation_matrix(d, s)
    # A^T = M_I^T S_II^{-1} O_I^T, solved for s right-hand sides
    try:
        Z = scipy.linalg.solve_banded((1, 1), band, O[:, interior].T)
    except np.linalg.LinAlgError as exc:
        raise ConfigurationError(f"singular stiffness matrix: {exc}") from None
    A = (M[interior].T @ Z).T

    lift = np.zeros(d)
    lift[-1] = 1.0
    rhs = -S[interior][:, [d - 1]].toarray().ravel()
    lift[interior] = scipy.linalg.solve_banded((1, 1), band, rhs)
    observed_lift = O @ lift

    if prior_spec == "laplacian":
        prior = laplacian_prior(d)
    elif prior_spec == "identity":
        prior = GaussianPrior(np.zeros(d), np.eye(d))
    else:
        raise ConfigurationError(f"unknown prior {prior_spec!r}")

    rng = np.random.default_rng(seed)
    truth = prior.from_standard(rng.standard_normal(d))
    clean = A @ truth + observed_lift
    sigma = sigma_rel * np.max(np.abs(clean))
    data = clean + sigma * rng.standard_normal(s) - observed_lift

    model = LinearGaussianModel(A, sigma, data, prior)
    model.truth = truth
    model.lift = lift
    model.observation = O
    return model
