"""Random-walk Metropolis reference sampler for small problems."""

import logging
from dataclasses import dataclass

import numpy as np

from psvgd.errors import ConfigurationError

logger = logging.getLogger(__name__)


@dataclass
class ReferenceMoments:
    mean: np.ndarray
    variance: np.ndarray
    acceptance_rate: float
    ess: np.ndarray
    warning: bool
    samples: np.ndarray


def effective_sample_size(chain):
    """Per-coordinate ESS with Geyer's initial positive sequence."""
    chain = np.atleast_2d(np.asarray(chain, dtype=float).T).T
    n, d = chain.shape
    centered = chain - chain.mean(axis=0)
    size = 1 << (2 * n - 1).bit_length()
    spectrum = np.fft.rfft(centered, n=size, axis=0)
    acov = np.fft.irfft(spectrum * np.conj(spectrum), n=size, axis=0)[:n] / n
    ess = np.empty(d)
    for j in range(d):
        if acov[0, j] <= 0:
            ess[j] = n
            continue
        rho = acov[:, j] / acov[0, j]
        total = 0.0
        for t in range(0, n - 1, 2):
            pair = rho[t] + rho[t + 1]
            if pair < 0:
                break
            total += pair
        ess[j] = n / max(2.0 * total - 1.0, 1e-12)
    return ess


def reference_posterior_rwmh(model, prior, chain_length, seed, burn_in=None, adapt=True, thin=10, initial=None):
    """Random-walk Metropolis with proposals preconditioned by the prior covariance.

    During burn-in the proposal covariance is re-estimated from the chain
    and its scale tuned towards 0.234 acceptance; afterwards both are frozen
    so the retained chain is a plain Metropolis chain.  Moments and ESS are
    computed from the post-burn-in chain; ``thin`` only affects the stored
    samples.
    """
    if chain_length < 2:
        raise ConfigurationError("chain too short")
    d = prior.dim
    burn_in = chain_length // 5 if burn_in is None else int(burn_in)
    rng = np.random.default_rng(seed)

    def log_target(x):
        lp = prior.log_density(x)
        if not np.isfinite(lp):
            return -np.inf
        return float(model.log_likelihood(x)) + float(lp)

    x = prior.mean.copy() if initial is None else np.asarray(initial, dtype=float).copy()
    current = log_target(x)
    factor = prior.unwhiten(np.eye(d))
    log_scale = np.log(2.38 / np.sqrt(d))
    run_sum = np.zeros(d)
    run_outer = np.zeros((d, d))
    seen = 0
    rescaled = False

    kept = np.empty((chain_length - burn_in, d))
    accepted = 0
    for step in range(chain_length):
        proposal = x + np.exp(log_scale) * (factor @ rng.standard_normal(d))
        candidate = log_target(proposal)
        accept = np.log(rng.random()) < candidate - current
        if accept:
            x, current = proposal, candidate
        if step < burn_in:
            if adapt:
                log_scale += (float(accept) - 0.234) / np.sqrt(step + 1.0)
                run_sum += x
                run_outer += np.outer(x, x)
                seen += 1
                if seen >= 2 * d and seen % 200 == 0:
                    mean = run_sum / seen
                    cov = run_outer / seen - np.outer(mean, mean)
                    cov = 0.5 * (cov + cov.T) + 1e-10 * np.trace(cov) / d * np.eye(d)
                    try:
                        factor = np.linalg.cholesky(cov)
                        if not rescaled:
                            # first switch away from the prior factor
                            log_scale = np.log(2.38 / np.sqrt(d))
                            rescaled = True
                    except np.linalg.LinAlgError:
                        pass
        else:
            kept[step - burn_in] = x
            accepted += int(accept)

    rate = accepted / max(len(kept), 1)
    warning = not 0.05 <= rate <= 0.8
    if warning:
        logger.warning("random-walk acceptance rate %.3f outside [0.05, 0.8]", rate)
    return ReferenceMoments(
        mean=kept.mean(axis=0),
        variance=kept.var(axis=0, ddof=1),
        acceptance_rate=rate,
        ess=effective_sample_size(kept),
        warning=warning,
        samples=kept[::thin].copy(),
    )
