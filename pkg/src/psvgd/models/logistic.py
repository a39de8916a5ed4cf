"""Bayesian logistic regression for binary labels."""

import numpy as np
from scipy.special import expit

from psvgd.core import GaussianPrior, UniformPrior, as_batch
from psvgd.errors import ConfigurationError


def log_sigmoid(z):
    """``log(1 / (1 + exp(-z)))`` without overflow."""
    return -np.logaddexp(0.0, -z)


class LogisticRegressionModel:
    """Bernoulli likelihood with logits ``features @ x``."""

    def __init__(self, features, labels):
        features = np.atleast_2d(np.asarray(features, dtype=float))
        labels = np.asarray(labels, dtype=float).ravel()
        if features.shape[0] != labels.size:
            raise ConfigurationError("one label per feature row is required")
        if not np.all((labels == 0) | (labels == 1)):
            raise ConfigurationError("labels must be 0 or 1")
        self.features = features
        self.labels = labels
        self.data = labels
        self.dim = features.shape[1]

    def log_likelihood(self, x):
        X, squeeze = as_batch(x)
        logits = X @ self.features.T
        out = np.sum(self.labels * log_sigmoid(logits) + (1.0 - self.labels) * log_sigmoid(-logits), axis=1)
        return out[0] if squeeze else out

    def grad_log_likelihood(self, x):
        X, squeeze = as_batch(x)
        out = (self.labels - expit(X @ self.features.T)) @ self.features
        return out[0] if squeeze else out

    def predict_proba(self, x, features=None):
        """Class-1 probabilities, one row per parameter sample."""
        features = self.features if features is None else np.atleast_2d(features)
        X, squeeze = as_batch(x)
        out = expit(X @ features.T)
        return out[0] if squeeze else out


def logistic_synthetic(n_data=100, d=20, seed=0, scale=1.0):
    """Gaussian features with labels drawn from a planted weight vector."""
    rng = np.random.default_rng(seed)
    features = rng.standard_normal((n_data, d))
    weights = scale * rng.standard_normal(d) / np.sqrt(d)
    labels = (rng.random(n_data) < expit(features @ weights)).astype(float)
    model = LogisticRegressionModel(features, labels)
    model.truth = weights
    return model


def load_classification_text(path):
    """Read a numeric text matrix; the last column holds the labels.

    Values may be separated by commas or whitespace.  Labels of -1 are
    mapped to 0.
    """
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append([float(tok) for tok in line.replace(",", " ").split()])
    if not rows:
        raise ConfigurationError(f"no data rows in {path}")
    table = np.array(rows)
    labels = table[:, -1]
    labels = np.where(labels == -1, 0.0, labels)
    return table[:, :-1], labels


def logistic_prior(d, kind="uniform", bound=1.0, std=1.0):
    if kind == "uniform":
        return UniformPrior(-bound * np.ones(d), bound * np.ones(d))
    if kind == "gaussian":
        return GaussianPrior(np.zeros(d), std**2 * np.eye(d))
    raise ConfigurationError(f"unknown logistic prior {kind!r}")
