"""Gaussian kernels on particle coordinates, with optional eigenvalue-weighted metric.

The squared distance is ``Q(v) = v^T (diag(weights) + I) v``; ``weights=None``
gives the Euclidean metric.  The kernel is ``exp(-Q(w - w') / h)``.
"""

from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from psvgd.errors import ConfigurationError, DegenerateBandwidthError


@dataclass(frozen=True)
class KernelConfig:
    """Bandwidth rule and metric.

    ``bandwidth`` is ``"median"`` for the median heuristic or a positive float.
    ``weights`` are the eigenvalues of the weighted metric, or None.
    """

    bandwidth: Union[str, float] = "median"
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        if isinstance(self.bandwidth, str):
            if self.bandwidth != "median":
                raise ConfigurationError(f"unknown bandwidth rule {self.bandwidth!r}")
        elif not float(self.bandwidth) > 0:
            raise ConfigurationError("fixed bandwidth must be positive")
        if self.weights is not None:
            weights = np.asarray(self.weights, dtype=float)
            if np.any(weights < 0) or not np.all(np.isfinite(weights)):
                raise ConfigurationError("metric weights must be finite and non-negative")
            object.__setattr__(self, "weights", weights)

    @property
    def is_median(self):
        return isinstance(self.bandwidth, str)

    def with_weights(self, weights):
        return replace(self, weights=weights)

    def resolve(self, points):
        """Bandwidth for the current particle locations."""
        if self.is_median:
            return median_bandwidth(points, self.weights)
        return float(self.bandwidth)


def _metric(weights, dim):
    if weights is None:
        return None
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (dim,):
        raise ConfigurationError(f"metric has {weights.size} weights for {dim} coordinates")
    return 1.0 + weights


def pairwise_sq_distances(a, b, weights=None):
    """Weighted squared distances between rows of ``a`` and rows of ``b``.

    Computed from explicit differences, so the result is exactly symmetric.
    """
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    diff = a[:, None, :] - b[None, :, :]
    metric = _metric(weights, a.shape[1])
    if metric is None:
        return np.einsum("ijk,ijk->ij", diff, diff)
    return np.einsum("ijk,ijk,k->ij", diff, diff, metric)


def sq_distance_table(points, weights=None, block=64):
    """Full ``N x N`` table of weighted squared distances, built in row blocks."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    out = np.empty((n, n))
    for start in range(0, n, block):
        rows = slice(start, min(start + block, n))
        out[rows] = pairwise_sq_distances(points[rows], points, weights)
    return out


def bandwidth_from_table(sq):
    """Median heuristic from a precomputed squared-distance table."""
    n = sq.shape[0]
    if n < 2:
        raise ConfigurationError("median bandwidth needs at least two points")
    med = np.median(np.sqrt(sq[np.triu_indices(n, k=1)]))
    if not med > 0:
        raise DegenerateBandwidthError("median pairwise distance is zero")
    return med**2 / np.log(n)


def median_bandwidth(points, weights=None):
    """Median heuristic ``med^2 / log N`` over all pairwise distances."""
    return bandwidth_from_table(sq_distance_table(points, weights))


def _resolve_scalar(config, bandwidth):
    if isinstance(config, (int, float)):
        return float(config), None
    if bandwidth is None:
        if config.is_median:
            raise ConfigurationError("median bandwidth must be resolved against an ensemble first")
        bandwidth = config.bandwidth
    return float(bandwidth), config.weights


def kernel_eval(w, w_other, config, bandwidth=None):
    """Kernel value for a single pair; ``config`` may also be a bare bandwidth."""
    h, weights = _resolve_scalar(config, bandwidth)
    w = np.atleast_1d(np.asarray(w, dtype=float))
    w_other = np.atleast_1d(np.asarray(w_other, dtype=float))
    if w.shape != w_other.shape:
        raise ConfigurationError("kernel arguments differ in length")
    return float(np.exp(-pairwise_sq_distances(w, w_other, weights)[0, 0] / h))


def kernel_grad_first_arg(w, w_other, config, bandwidth=None):
    """Gradient of :func:`kernel_eval` with respect to its first argument."""
    h, weights = _resolve_scalar(config, bandwidth)
    w = np.atleast_1d(np.asarray(w, dtype=float))
    w_other = np.atleast_1d(np.asarray(w_other, dtype=float))
    k = kernel_eval(w, w_other, h if weights is None else KernelConfig(h, weights))
    metric = _metric(weights, w.size)
    diff = w - w_other
    if metric is not None:
        diff = metric * diff
    return -(2.0 / h) * k * diff


def kernel_rows(points, rows, bandwidth, weights=None):
    """Rows ``rows`` of the kernel Gram matrix over ``points``."""
    return np.exp(-pairwise_sq_distances(points[rows], points, weights) / bandwidth)
