"""Per-run diagnostics collected by the transport drivers."""

import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

PHASES = ("gradient", "kernel", "update", "total")

ITERATION_FIELDS = ("iteration", "outer", "step_norm", "bandwidth", "step_size", "backtrack_exhausted", "rank")


@dataclass
class RunRecord:
    """Step norms per iteration, spectra per adaptation, and phase timings.

    ``iteration`` counts transport iterations across all adaptation steps and
    is strictly increasing.  ``outer`` is -1 for full-space SVGD.
    Timings are wall-clock seconds; the gradient phase includes eigensolves.
    """

    algorithm: str = ""
    iterations: dict = field(default_factory=lambda: {name: [] for name in ITERATION_FIELDS})
    spectra: list = field(default_factory=list)
    ranks: list = field(default_factory=list)
    tail_bounds: list = field(default_factory=list)
    timings: dict = field(default_factory=lambda: dict.fromkeys(PHASES, 0.0))
    stop_reason: str = ""

    def log_iteration(self, outer, step_norm, bandwidth, step_size, exhausted=False, rank=0):
        idx = len(self.iterations["iteration"])
        row = (idx, outer, float(step_norm), float(bandwidth), float(step_size), bool(exhausted), int(rank))
        for name, value in zip(ITERATION_FIELDS, row):
            self.iterations[name].append(value)
        return idx

    def log_adaptation(self, eigenvalues, rank, tail_bound):
        self.spectra.append(np.asarray(eigenvalues, dtype=float).copy())
        self.ranks.append(int(rank))
        self.tail_bounds.append(float(tail_bound))

    @property
    def iteration_count(self):
        return len(self.iterations["iteration"])

    @property
    def adaptation_count(self):
        return len(self.spectra)

    @property
    def step_norms(self):
        return np.asarray(self.iterations["step_norm"], dtype=float)

    @contextmanager
    def timed(self, phase):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[phase] += time.perf_counter() - start
