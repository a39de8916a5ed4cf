"""Experiment configuration read from YAML."""

from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Union

import yaml

from psvgd.errors import ConfigurationError
from psvgd.kernel import KernelConfig
from psvgd.models import REGISTRY
from psvgd.projected import PsvgdConfig
from psvgd.svgd import SvgdConfig

ALGORITHMS = ("svgd", "psvgd", "psvgd-adaptive", "rwmh-reference")


@dataclass
class ExperimentConfig:
    """One run: a model, a prior, an algorithm and its settings.

    ``iterations`` is the transport budget for ``svgd``; for the projected
    algorithms it is split into ``iterations // inner_iterations`` outer
    steps of ``inner_iterations`` coefficient updates each.  For
    ``rwmh-reference`` ``chain_length`` and ``burn_in`` apply instead.
    """

    model: str = "linear"
    model_params: dict = field(default_factory=dict)
    prior: dict = field(default_factory=dict)
    algorithm: str = "svgd"
    particles: int = 64
    workers: int = 1
    seed: int = 0
    iterations: int = 100
    inner_iterations: int = 10
    step: Union[str, float] = "line-search"
    step_init: float = 1.0
    max_backtracks: int = 20
    tolerance: Optional[float] = None
    w_tol: Optional[float] = None
    x_tol: Optional[float] = None
    rank_threshold: float = 1e-2
    max_rank: Optional[int] = None
    bandwidth: Union[str, float] = "median"
    eigen_metric: bool = True
    frame: str = "prior"
    chain_length: int = 20000
    burn_in: Optional[int] = None
    output_dir: Optional[str] = None
    name: Optional[str] = None

    def __post_init__(self):
        if self.model not in REGISTRY:
            raise ConfigurationError(f"unknown model {self.model!r}; known: {sorted(REGISTRY)}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigurationError(f"unknown algorithm {self.algorithm!r}; known: {list(ALGORITHMS)}")
        if self.particles < 1 or self.workers < 1:
            raise ConfigurationError("particles and workers must be positive")
        if self.particles % self.workers:
            raise ConfigurationError(f"{self.particles} particles cannot be split evenly over {self.workers} workers")
        if self.iterations < 1:
            raise ConfigurationError("iterations must be at least 1")
        if self.inner_iterations < 1:
            raise ConfigurationError("inner_iterations must be at least 1")
        if self.algorithm == "rwmh-reference" and self.chain_length < 2:
            raise ConfigurationError("chain_length must be at least 2")
        # fail early on invalid transport settings
        if self.algorithm != "rwmh-reference":
            self.transport_config()

    @property
    def label(self):
        return self.name or self.algorithm

    def kernel(self):
        bandwidth = self.bandwidth if self.bandwidth == "median" else float(self.bandwidth)
        return KernelConfig(bandwidth=bandwidth)

    def transport_config(self):
        """The :class:`SvgdConfig` or :class:`PsvgdConfig` for this run."""
        common = dict(
            particles=self.particles,
            step=self.step,
            step_init=self.step_init,
            max_backtracks=self.max_backtracks,
            kernel=self.kernel(),
            seed=self.seed,
        )
        if self.algorithm == "svgd":
            return SvgdConfig(max_iterations=self.iterations, tolerance=self.tolerance, **common)
        if self.algorithm in ("psvgd", "psvgd-adaptive"):
            outer = max(self.iterations // self.inner_iterations, 1)
            return PsvgdConfig(
                outer_iterations=outer,
                inner_iterations=self.inner_iterations,
                w_tol=self.w_tol,
                x_tol=self.x_tol,
                rank_threshold=self.rank_threshold,
                max_rank=self.max_rank,
                eigen_metric=self.eigen_metric,
                frame=self.frame,
                **common,
            )
        raise ConfigurationError(f"{self.algorithm} has no transport settings")

    def to_dict(self):
        return asdict(self)

    def replace(self, **changes):
        data = self.to_dict()
        data.update({k: v for k, v in changes.items() if v is not None})
        return ExperimentConfig(**data)


def config_from_dict(data):
    """Build a config from a mapping, rejecting unknown keys.

    ``model`` may be a name or a mapping with ``name`` and ``params``.
    """
    if not isinstance(data, dict):
        raise ConfigurationError("configuration must be a mapping")
    data = dict(data)
    model = data.get("model")
    if isinstance(model, dict):
        model = dict(model)
        data["model"] = model.pop("name", None)
        params = model.pop("params", {})
        if model:
            raise ConfigurationError(f"unknown model keys: {sorted(model)}")
        data["model_params"] = dict(params or {})
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigurationError(f"unknown configuration keys: {unknown}")
    try:
        return ExperimentConfig(**data)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from None


def load_config(path):
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"malformed config {path}: {exc}") from None
    return config_from_dict(data or {})


def dump_config(config, path):
    with open(path, "w") as fh:
        yaml.safe_dump(config.to_dict(), fh, sort_keys=True)
