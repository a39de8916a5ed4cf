"""Constant likelihood: the posterior equals the prior."""

import numpy as np

from psvgd.core import as_batch


class ConstantLikelihood:
    def __init__(self, dim):
        self.dim = int(dim)
        self.data = np.zeros(0)

    def log_likelihood(self, x):
        X, squeeze = as_batch(x)
        out = np.zeros(X.shape[0])
        return out[0] if squeeze else out

    def grad_log_likelihood(self, x):
        X, squeeze = as_batch(x)
        out = np.zeros_like(X)
        return out[0] if squeeze else out
