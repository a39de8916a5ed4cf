"""Likelihood-informed subspace from sampled log-likelihood gradients.

The gradient information matrix ``H = (1/M) G^T G`` is kept in factor form.
With the prior covariance factored as ``Gamma = L L^T``, the whitened rows
``G L`` give the prior-preconditioned matrix ``L^T H L``; its eigenpairs
``(lambda_i, v_i)`` map to directions ``psi_i = L v_i`` solving
``H psi = lambda Gamma^{-1} psi``.  The eigenvalues are dimensionless: they
compare the data information along ``psi_i`` with the prior precision there.

Basis columns are Euclidean-orthonormalized (QR) after mapping back, so
``P_r = Psi Psi^T`` is an orthogonal projector.  The eigenvalues are kept
unchanged for rank selection and for the weighted kernel metric.  The
triangular factor ``R = Psi^T L V`` is kept as the basis ``frame``: it maps
prior-whitened eigen-coordinates to orthonormal coefficients, ``w = R omega``.
"""

from dataclasses import dataclass, field

import numpy as np

from psvgd.core import ParticleEnsemble
from psvgd.errors import ConfigurationError, NumericalError
from psvgd.parallel import serial_pool


@dataclass
class GradientStack:
    """Log-likelihood gradients, one row per sample."""

    grads: np.ndarray

    def __post_init__(self):
        grads = np.atleast_2d(np.asarray(self.grads, dtype=float))
        if grads.shape[0] < 1:
            raise ConfigurationError("gradient stack needs at least one row")
        if not np.all(np.isfinite(grads)):
            raise NumericalError("gradient stack contains non-finite entries")
        self.grads = grads

    @property
    def count(self):
        return self.grads.shape[0]

    @property
    def dim(self):
        return self.grads.shape[1]

    def information_matrix(self):
        """Dense ``(1/M) G^T G``; for checks on small problems only."""
        return self.grads.T @ self.grads / self.count


@dataclass
class ProjectionBasis:
    """Orthonormal basis ``psi`` (d x r) with its pencil eigenvalues.

    ``spectrum`` keeps every computed eigenvalue, including the truncated
    tail, for diagnostics.  ``frame`` is the r x r matrix ``R`` with
    ``Psi R`` equal to the prior-whitened eigenvectors mapped back to the
    parameter space; it is the identity when not supplied.
    """

    psi: np.ndarray
    eigenvalues: np.ndarray
    truncation_threshold: float = float("nan")
    spectrum: np.ndarray = field(default=None)
    frame: np.ndarray = field(default=None)

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=float)
        self.psi = psi.reshape(-1, 1) if psi.ndim == 1 else psi
        self.eigenvalues = np.atleast_1d(np.asarray(self.eigenvalues, dtype=float))
        if self.eigenvalues.size != self.psi.shape[1]:
            raise ConfigurationError("one eigenvalue per basis column is required")
        if self.spectrum is None:
            self.spectrum = self.eigenvalues.copy()
        if self.frame is None:
            self.frame = np.eye(self.psi.shape[1])
        self.frame = np.atleast_2d(np.asarray(self.frame, dtype=float))
        if self.frame.shape != (self.psi.shape[1],) * 2:
            raise ConfigurationError("frame must be r x r for a rank-r basis")

    @property
    def rank(self):
        return self.psi.shape[1]

    @property
    def dim(self):
        return self.psi.shape[0]

    def truncate(self, rank, threshold=None):
        if not 1 <= rank <= self.rank:
            raise ConfigurationError(f"cannot truncate a rank-{self.rank} basis to rank {rank}")
        return ProjectionBasis(
            self.psi[:, :rank].copy(),
            self.eigenvalues[:rank].copy(),
            self.truncation_threshold if threshold is None else threshold,
            self.spectrum,
            self.frame[:rank, :rank].copy(),
        )

    def tail(self):
        """Computed eigenvalues beyond the retained rank."""
        return self.spectrum[self.rank :]


def assemble_gradient_stack(model, ensemble, pool=None):
    pool = pool or serial_pool()
    X = ensemble.particles if isinstance(ensemble, ParticleEnsemble) else np.atleast_2d(ensemble)
    grads = pool.fill(lambda rows: model.grad_log_likelihood(X[rows]), X.shape[0])
    return GradientStack(grads)


def _orient(columns):
    """Fix column signs so the largest-magnitude entry of each is positive."""
    if columns.size == 0:
        return columns
    idx = np.argmax(np.abs(columns), axis=0)
    signs = np.sign(columns[idx, np.arange(columns.shape[1])])
    signs[signs == 0] = 1.0
    return columns * signs


def _complete(vectors, dim, count):
    """Extend orthonormal columns to ``count`` columns deterministically."""
    if vectors.shape[1] >= count:
        return vectors[:, :count]
    q, _ = np.linalg.qr(np.hstack([vectors, np.eye(dim)]))
    extra = q[:, vectors.shape[1] : count]
    return np.hstack([vectors, _orient(extra)])


def generalized_eigensolve(stack, prior, max_rank=None, relative_cutoff=1e-12):
    """Dominant eigenpairs of the gradient information against the prior.

    ``prior`` is any prior exposing ``whiten_rows`` and ``unwhiten`` (a
    :class:`~psvgd.core.GaussianPrior` or :class:`~psvgd.core.UniformPrior`)
    or a dense SPD covariance matrix.  Returns a basis holding
    ``max_rank`` columns (default ``min(M, d)``).
    """
    if isinstance(stack, np.ndarray):
        stack = GradientStack(stack)
    if not hasattr(prior, "whiten_rows"):
        from psvgd.core import GaussianPrior

        prior = GaussianPrior(np.zeros(stack.dim), prior)
    M, d = stack.count, stack.dim
    limit = min(M, d)
    max_rank = limit if max_rank is None else int(max_rank)
    if not 1 <= max_rank <= limit:
        raise ConfigurationError(f"max_rank must lie in [1, {limit}], got {max_rank}")

    white = prior.whiten_rows(stack.grads)
    if M <= d:
        gram = white @ white.T / M
        values, vecs = np.linalg.eigh(0.5 * (gram + gram.T))
        order = np.argsort(values)[::-1]
        values, vecs = values[order], vecs[:, order]
        values = np.clip(values, 0.0, None)
        keep = values > relative_cutoff * max(values[0], np.finfo(float).tiny)
        v = white.T @ vecs[:, keep] / np.sqrt(M * values[keep])
    else:
        small = white.T @ white / M
        values, vecs = np.linalg.eigh(0.5 * (small + small.T))
        order = np.argsort(values)[::-1]
        values, vecs = np.clip(values[order], 0.0, None), vecs[:, order]
        keep = values > relative_cutoff * max(values[0], np.finfo(float).tiny)
        v = vecs[:, keep]
    values = values[:limit]
    v = _complete(v[:, :max_rank], d, max_rank)

    psi = prior.unwhiten(v)
    q, r = np.linalg.qr(psi)
    q = _orient(q * np.where(np.diag(r) < 0, -1.0, 1.0))
    # upper triangular up to rounding, so leading blocks survive truncation
    frame = np.triu(q.T @ psi)
    return ProjectionBasis(q, values[:max_rank].copy(), spectrum=values.copy(), frame=frame)


def select_rank(eigenvalues, threshold):
    """Smallest ``r >= 1`` with ``lambda_{r+1} < threshold``."""
    eigenvalues = np.atleast_1d(np.asarray(eigenvalues, dtype=float))
    if eigenvalues.size == 0:
        raise ConfigurationError("empty spectrum")
    if not threshold > 0:
        raise ConfigurationError("rank threshold must be positive")
    below = np.flatnonzero(eigenvalues < threshold)
    if below.size == 0:
        return int(eigenvalues.size)
    return max(int(below[0]), 1)


def project(basis, x):
    """Coefficients ``w = Psi^T x`` and complement ``x - Psi w`` (rows of ``x``)."""
    psi = basis.psi if isinstance(basis, ProjectionBasis) else np.asarray(basis)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != psi.shape[0]:
        raise ConfigurationError(f"parameter length {x.shape[-1]} does not match basis dimension {psi.shape[0]}")
    w = x @ psi
    return w, x - w @ psi.T


def reconstruct(basis, w, x_perp):
    psi = basis.psi if isinstance(basis, ProjectionBasis) else np.asarray(basis)
    return np.asarray(w) @ psi.T + x_perp


def projection_error_bound(tail, gamma=1.0):
    """``(gamma / 2) * sum(tail)``; a relative indicator with unknown ``gamma``."""
    tail = np.asarray(tail, dtype=float)
    if np.any(tail < 0):
        raise ConfigurationError("tail eigenvalues must be non-negative")
    return 0.5 * gamma * float(np.sum(tail))
