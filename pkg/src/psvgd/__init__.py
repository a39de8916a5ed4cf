"""Stein variational gradient descent and its projected, subspace-adaptive variant."""

from psvgd.core import GaussianPrior, ParticleEnsemble, UniformPrior, grad_log_prior, sample_prior
from psvgd.errors import (
    ConfigurationError,
    DegenerateBandwidthError,
    DomainError,
    NumericalError,
    PsvgdError,
)
from psvgd.kernel import KernelConfig, kernel_eval, kernel_grad_first_arg, median_bandwidth
from psvgd.parallel import WorkerPool
from psvgd.projected import (
    CoefficientEnsemble,
    PsvgdConfig,
    coefficient_grad_log_posterior,
    psvgd_direction,
    reconstruct_ensemble,
    run_adaptive_psvgd,
    run_psvgd,
    run_psvgd_inner,
)
from psvgd.record import RunRecord
from psvgd.subspace import (
    GradientStack,
    ProjectionBasis,
    assemble_gradient_stack,
    generalized_eigensolve,
    project,
    projection_error_bound,
    reconstruct,
    select_rank,
)
from psvgd.svgd import SvgdConfig, line_search_step, run_svgd, svgd_direction

__version__ = "0.1.0"
