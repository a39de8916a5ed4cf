"""Benchmark inference problems and a registry used by the experiment driver."""

from psvgd.errors import ConfigurationError
from psvgd.models.diffusion import ConditionalDiffusionModel, diffusion_build, diffusion_prior
from psvgd.models.flat import ConstantLikelihood
from psvgd.models.linear import LinearGaussianModel, laplacian_prior, linear_build
from psvgd.models.logistic import (
    LogisticRegressionModel,
    load_classification_text,
    logistic_prior,
    logistic_synthetic,
)
from psvgd.models.reference import ReferenceMoments, reference_posterior_rwmh


def _linear(params, prior_spec):
    model = linear_build(
        d=int(params.get("d", 17)),
        s=int(params.get("s", 15)),
        sigma_rel=float(params.get("sigma_rel", 0.01)),
        prior_spec=prior_spec.get("kind", "laplacian"),
        seed=int(params.get("seed", 0)),
    )
    return model, model.prior


def _diffusion(params, prior_spec):
    steps = int(params.get("steps", 100))
    parameterization = params.get("parameterization", "increments")
    model = diffusion_build(
        steps=steps,
        n_obs=int(params.get("n_obs", 20)),
        noise_std=float(params.get("noise_std", 0.1)),
        seed=int(params.get("seed", 0)),
        parameterization=parameterization,
    )
    return model, diffusion_prior(steps, parameterization)


def _logistic(params, prior_spec):
    if "path" in params:
        features, labels = load_classification_text(params["path"])
        model = LogisticRegressionModel(features, labels)
    else:
        model = logistic_synthetic(
            n_data=int(params.get("n_data", 100)),
            d=int(params.get("d", 20)),
            seed=int(params.get("seed", 0)),
        )
    prior = logistic_prior(
        model.dim,
        kind=prior_spec.get("kind", "uniform"),
        bound=float(prior_spec.get("bound", 1.0)),
        std=float(prior_spec.get("std", 1.0)),
    )
    return model, prior


REGISTRY = {"linear": _linear, "diffusion": _diffusion, "logistic": _logistic}


def build_problem(name, params=None, prior_spec=None):
    """Return ``(model, prior)`` for a registered model name."""
    if name not in REGISTRY:
        raise ConfigurationError(f"unknown model {name!r}; known: {sorted(REGISTRY)}")
    return REGISTRY[name](dict(params or {}), dict(prior_spec or {}))


__all__ = [
    "REGISTRY",
    "ConditionalDiffusionModel",
    "ConstantLikelihood",
    "LinearGaussianModel",
    "LogisticRegressionModel",
    "ReferenceMoments",
    "build_problem",
    "diffusion_build",
    "diffusion_prior",
    "laplacian_prior",
    "linear_build",
    "load_classification_text",
    "logistic_prior",
    "logistic_synthetic",
    "reference_posterior_rwmh",
]
