"""Multi-run studies behind the benchmark comparisons.

Each study assembles :class:`ExperimentConfig` objects and runs them
in memory; nothing is written unless an output directory is configured.
"""

import numpy as np

from psvgd.harness.config import ExperimentConfig
from psvgd.harness.runner import run_experiment


def linear_config(algorithm, d, trial, particles=256, iterations=200, inner_iterations=10, workers=1):
    """SVGD or adaptive pSVGD on the linear problem; ``trial`` seeds data and particles."""
    return ExperimentConfig(
        name=f"{algorithm}-d{d}-t{trial}",
        model="linear",
        model_params={"d": d, "s": 15, "sigma_rel": 0.01, "seed": trial},
        algorithm=algorithm,
        particles=particles,
        workers=workers,
        seed=trial,
        iterations=iterations,
        inner_iterations=inner_iterations,
        tolerance=0.0,
        w_tol=0.0,
        x_tol=0.0,
    )


def linear_accuracy_study(dims=(17, 65, 257), trials=5, particles=256, iterations=200, workers=1):
    """Variance RMSE of SVGD and adaptive pSVGD per dimension and trial.

    Returns ``{d: {"svgd": [...], "psvgd-adaptive": [...]}}``.
    """
    table = {}
    for d in dims:
        row = {}
        for algorithm in ("svgd", "psvgd-adaptive"):
            row[algorithm] = [
                run_experiment(linear_config(algorithm, d, t, particles, iterations, workers=workers)).metrics["variance_rmse"]
                for t in range(trials)
            ]
        table[d] = row
    return table


def study_means(table):
    return {d: {alg: float(np.mean(v)) for alg, v in row.items()} for d, row in table.items()}


def diffusion_config(algorithm, seed=0, particles=128, iterations=100, parameterization="path", **overrides):
    settings = dict(
        name=f"{algorithm}-diffusion-s{seed}",
        model="diffusion",
        model_params={"steps": 100, "n_obs": 20, "noise_std": 0.1, "seed": seed, "parameterization": parameterization},
        algorithm=algorithm,
        particles=particles,
        seed=seed,
        iterations=iterations,
        inner_iterations=10,
        tolerance=0.0,
        w_tol=0.0,
        x_tol=0.0,
    )
    settings.update(overrides)
    return ExperimentConfig(**settings)


def diffusion_comparison(seed=0, particles=128, iterations=100, parameterization="path"):
    """Path-space metrics of SVGD and adaptive pSVGD at matched budgets."""
    return {
        alg: run_experiment(diffusion_config(alg, seed, particles, iterations, parameterization)).metrics
        for alg in ("svgd", "psvgd-adaptive")
    }


def diffusion_spectrum(seed=0, particles=128, iterations=500, parameterization="increments"):
    """Final selected rank and spectrum of an adaptive pSVGD run."""
    result = run_experiment(diffusion_config("psvgd-adaptive", seed, particles, iterations, parameterization))
    return result.record.ranks[-1], np.asarray(result.record.spectra[-1])
