import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import fd_gradient, random_spd
from psvgd.core import GaussianPrior, ParticleEnsemble, UniformPrior, grad_log_prior, sample_prior
from psvgd.errors import ConfigurationError, DomainError
from psvgd.models.diffusion import diffusion_prior
from psvgd.models.linear import fem_matrices, laplacian_prior


def test_sample_prior_deterministic():
    prior = GaussianPrior(np.zeros(2), np.eye(2))
    a = sample_prior(prior, 3, seed=7).particles
    b = sample_prior(prior, 3, seed=7).particles
    assert a.shape == (3, 2)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_prior(prior, 3, seed=8).particles)


def test_sample_prior_prefix_stable():
    # particle n draws from its own stream, so growing N keeps earlier rows
    prior = GaussianPrior(np.zeros(4), np.eye(4))
    small = sample_prior(prior, 5, seed=3).particles
    large = sample_prior(prior, 9, seed=3).particles
    assert np.array_equal(small, large[:5])


def test_degenerate_covariance_rejected():
    with pytest.raises(ConfigurationError):
        GaussianPrior(np.zeros(2), np.zeros((2, 2)))
    with pytest.raises(ConfigurationError):
        GaussianPrior(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_asymmetric_covariance_rejected():
    with pytest.raises(ConfigurationError):
        GaussianPrior(np.zeros(2), np.array([[1.0, 0.1], [0.0, 1.0]]))


def test_sample_variance_matches_covariance():
    prior = GaussianPrior(np.zeros(1), 4.0 * np.eye(1))
    X = sample_prior(prior, 100_000, seed=0).particles
    assert 3.8 <= X.var() <= 4.2


def test_banded_sample_covariance():
    prior = laplacian_prior(9)
    X = sample_prior(prior, 40_000, seed=1).particles
    err = np.abs(np.cov(X.T) - prior.covariance).max()
    assert err < 0.05 * np.abs(prior.covariance).max()


def test_grad_log_prior_examples():
    assert np.allclose(grad_log_prior(GaussianPrior(np.zeros(2), np.eye(2)), [1.0, 2.0]), [-1.0, -2.0])
    prior = GaussianPrior(np.zeros(2), np.diag([4.0, 1.0]))
    assert np.allclose(grad_log_prior(prior, [4.0, 1.0]), [-1.0, -1.0])
    box = UniformPrior(np.zeros(2), np.ones(2))
    assert np.array_equal(grad_log_prior(box, [0.5, 0.5]), [0.0, 0.0])


def test_uniform_outside_support_raises():
    box = UniformPrior(np.zeros(2), np.ones(2))
    with pytest.raises(DomainError):
        grad_log_prior(box, [1.5, 0.5])
    assert box.log_density([1.5, 0.5]) == -np.inf
    assert np.array_equal(box.project_to_support(np.array([[1.5, -0.2]])), [[1.0, 0.0]])


def test_uniform_bounds_validated():
    with pytest.raises(ConfigurationError):
        UniformPrior([0.0, 1.0], [1.0, 1.0])


def test_uniform_samples_inside_box():
    box = UniformPrior(-np.ones(3), 2 * np.ones(3))
    X = sample_prior(box, 500, seed=2).particles
    assert np.all(box.in_support(X))


@pytest.mark.parametrize("seed", range(3))
def test_hessian_is_negative_precision(seed):
    rng = np.random.default_rng(seed)
    cov = random_spd(rng, 3)
    prior = GaussianPrior(rng.standard_normal(3), cov)
    x = rng.standard_normal(3)
    hess = np.stack([fd_gradient(lambda z, i=i: prior.grad_log_density(z)[i], x, 1e-4) for i in range(3)])
    expected = -np.linalg.inv(cov)
    assert np.abs(hess - expected).max() <= 1e-4 * np.abs(expected).max()


def test_banded_matches_dense():
    K, M = fem_matrices(12)
    Q = (0.1 * K + M).toarray()
    banded = laplacian_prior(12)
    dense = GaussianPrior(np.zeros(12), np.linalg.inv(Q))
    rng = np.random.default_rng(0)
    X = rng.standard_normal((4, 12))
    assert np.allclose(banded.covariance, dense.covariance, rtol=1e-10, atol=1e-12)
    assert np.allclose(banded.precision_apply(X), X @ Q, rtol=1e-12, atol=1e-12)
    assert np.allclose(banded.grad_log_density(X), dense.grad_log_density(X), rtol=1e-9, atol=1e-9)
    # whitening factors differ, but both reproduce the covariance
    Wb = banded.unwhiten(np.eye(12))
    assert np.allclose(Wb @ Wb.T, dense.covariance, rtol=1e-10, atol=1e-12)
    g = rng.standard_normal((3, 12))
    assert np.allclose(banded.whiten_rows(g) @ Wb.T, g @ dense.covariance, atol=1e-10)


def test_brownian_path_prior_covariance():
    prior = diffusion_prior(50, "path")
    t = np.arange(1, 51) / 50
    assert np.allclose(prior.covariance, np.minimum.outer(t, t), atol=1e-12)


def test_ensemble_validation():
    with pytest.raises(DomainError):
        ParticleEnsemble(np.array([[0.0, np.nan]]))
    with pytest.raises(ConfigurationError):
        ParticleEnsemble(np.zeros((0, 2)))
    e = ParticleEnsemble(np.zeros((3, 2)))
    assert (e.count, e.dim) == (3, 2)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 40), st.integers(0, 2**31 - 1))
def test_sampling_reproducible(count, seed):
    prior = GaussianPrior(np.ones(3), np.diag([1.0, 2.0, 3.0]))
    assert np.array_equal(sample_prior(prior, count, seed).particles, sample_prior(prior, count, seed).particles)
