import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import fd_gradient
from psvgd.errors import ConfigurationError, DegenerateBandwidthError
from psvgd.kernel import KernelConfig, kernel_eval, kernel_grad_first_arg, median_bandwidth, pairwise_sq_distances

coords = st.floats(-3, 3, allow_nan=False)


def test_median_bandwidth_two_points():
    assert median_bandwidth(np.array([[0.0, 0.0], [2.0, 0.0]])) == pytest.approx(4 / math.log(2))
    assert 4 / math.log(2) == pytest.approx(5.7708, abs=1e-4)


def test_median_bandwidth_three_points():
    assert median_bandwidth(np.array([[0.0], [1.0], [3.0]])) == pytest.approx(4 / math.log(3))


def test_median_bandwidth_degenerate():
    with pytest.raises(DegenerateBandwidthError):
        median_bandwidth(np.zeros((2, 2)))
    with pytest.raises(ConfigurationError):
        median_bandwidth(np.zeros((1, 2)))


def test_weighted_median_uses_metric():
    pts = np.array([[0.0, 0.0], [1.0, 0.0]])
    assert median_bandwidth(pts, np.array([3.0, 0.0])) == pytest.approx(4 / math.log(2))


def test_kernel_eval_examples():
    assert kernel_eval([0.3, -1.0], [0.3, -1.0], 1.0) == 1.0
    assert kernel_eval([1.0, 0.0], [0.0, 0.0], 1.0) == pytest.approx(math.exp(-1))
    assert kernel_eval([1.0, 0.0], [0.0, 0.0], KernelConfig(1.0, np.array([3.0, 0.0]))) == pytest.approx(math.exp(-4))


def test_kernel_grad_examples():
    assert np.array_equal(kernel_grad_first_arg([1.0, 2.0], [1.0, 2.0], 1.0), [0.0, 0.0])
    assert kernel_grad_first_arg([1.0], [0.0], 2.0)[0] == pytest.approx(-math.exp(-0.5))


def test_median_config_requires_resolution():
    with pytest.raises(ConfigurationError):
        kernel_eval([0.0], [1.0], KernelConfig())
    with pytest.raises(ConfigurationError):
        KernelConfig(bandwidth=-1.0)
    with pytest.raises(ConfigurationError):
        KernelConfig(weights=np.array([-1.0]))


def test_kernel_grad_matches_finite_differences():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(100):
        m = int(rng.integers(1, 6))
        w, v = rng.standard_normal(m), rng.standard_normal(m)
        config = KernelConfig(float(rng.uniform(0.5, 5.0)), rng.uniform(0, 3, m) if rng.random() < 0.5 else None)
        numeric = fd_gradient(lambda z: kernel_eval(z, v, config), w, 1e-5)
        analytic = kernel_grad_first_arg(w, v, config)
        worst = max(worst, np.linalg.norm(analytic - numeric) / max(np.linalg.norm(analytic), 1e-8))
    assert worst < 1e-6


@settings(max_examples=60, deadline=None)
@given(arrays(float, 3, elements=coords), arrays(float, 3, elements=coords), st.floats(0.1, 10))
def test_symmetry_and_antisymmetry(w, v, h):
    config = KernelConfig(h, np.array([2.0, 0.5, 0.0]))
    assert kernel_eval(w, v, config) == kernel_eval(v, w, config)
    assert np.array_equal(kernel_grad_first_arg(w, v, config), -kernel_grad_first_arg(v, w, config))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**31 - 1))
def test_gram_positive_semidefinite(n, seed):
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((n, 3))
    gram = np.exp(-pairwise_sq_distances(pts, pts, np.array([1.0, 0.0, 4.0])) / median_bandwidth(pts))
    assert np.linalg.eigvalsh(gram).min() > -1e-10


def test_zero_weights_equal_euclidean():
    rng = np.random.default_rng(1)
    a, b = rng.standard_normal((5, 4)), rng.standard_normal((6, 4))
    assert np.allclose(pairwise_sq_distances(a, b, np.zeros(4)), pairwise_sq_distances(a, b), rtol=1e-14, atol=0)
