"""Comma-separated artifacts for ensembles, run records and metrics.

Floats are written with 17 significant digits, which round-trips every
double exactly.  Everything except ``timings.csv`` is a deterministic
function of the configuration and seed.
"""

import csv
import os

import numpy as np

from psvgd.core import ParticleEnsemble
from psvgd.record import ITERATION_FIELDS, PHASES, RunRecord

FLOAT_FORMAT = "%.17g"

ENSEMBLE_FILE = "ensemble.csv"
ITERATIONS_FILE = "iterations.csv"
ADAPTATIONS_FILE = "adaptations.csv"
SPECTRA_FILE = "spectra.csv"
TIMINGS_FILE = "timings.csv"
METRICS_FILE = "metrics.csv"
RUN_FILE = "run.csv"
CONFIG_FILE = "config.yaml"


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return FLOAT_FORMAT % value
    return str(value)


def write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def read_rows(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader]


def write_matrix(path, matrix, header):
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        np.savetxt(fh, matrix, fmt=FLOAT_FORMAT, delimiter=",")


def read_matrix(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data.reshape(-1, len(header))


def save_ensemble(path, ensemble):
    X = ensemble.particles if isinstance(ensemble, ParticleEnsemble) else np.asarray(ensemble)
    write_matrix(path, X, [f"x{j}" for j in range(X.shape[1])])


def load_ensemble(path):
    return ParticleEnsemble(read_matrix(path)[1])


def save_record(directory, record, extra=None):
    """Write the iteration log, adaptation log, spectra, timings and run facts.

    ``extra`` adds key-value pairs to ``run.csv``.
    """
    it = record.iterations
    write_rows(
        os.path.join(directory, ITERATIONS_FILE),
        ITERATION_FIELDS,
        zip(*(it[name] for name in ITERATION_FIELDS)),
    )
    write_rows(
        os.path.join(directory, ADAPTATIONS_FILE),
        ("adaptation", "rank", "tail_bound"),
        ((i, r, t) for i, (r, t) in enumerate(zip(record.ranks, record.tail_bounds))),
    )
    write_rows(
        os.path.join(directory, SPECTRA_FILE),
        ("adaptation", "index", "eigenvalue"),
        ((i, j, lam) for i, spec in enumerate(record.spectra) for j, lam in enumerate(spec)),
    )
    write_rows(
        os.path.join(directory, TIMINGS_FILE),
        ("phase", "seconds"),
        ((p, record.timings[p]) for p in PHASES),
    )
    write_rows(
        os.path.join(directory, RUN_FILE),
        ("key", "value"),
        [("algorithm", record.algorithm), ("stop_reason", record.stop_reason)] + sorted((extra or {}).items()),
    )


def load_run_facts(directory):
    return dict(read_rows(os.path.join(directory, RUN_FILE))[1])


def load_record(directory):
    record = RunRecord()
    _, rows = read_rows(os.path.join(directory, ITERATIONS_FILE))
    casts = {"iteration": int, "outer": int, "rank": int, "backtrack_exhausted": lambda v: bool(int(v))}
    for row in rows:
        for name, value in zip(ITERATION_FIELDS, row):
            record.iterations[name].append(casts.get(name, float)(value))
    _, rows = read_rows(os.path.join(directory, ADAPTATIONS_FILE))
    spectra = {}
    _, spec_rows = read_rows(os.path.join(directory, SPECTRA_FILE))
    for a, _j, lam in spec_rows:
        spectra.setdefault(int(a), []).append(float(lam))
    for a, rank, tail in rows:
        record.log_adaptation(np.array(spectra.get(int(a), [])), int(rank), float(tail))
    _, rows = read_rows(os.path.join(directory, TIMINGS_FILE))
    for phase, seconds in rows:
        record.timings[phase] = float(seconds)
    _, rows = read_rows(os.path.join(directory, RUN_FILE))
    meta = dict(rows)
    record.algorithm = meta.get("algorithm", "")
    record.stop_reason = meta.get("stop_reason", "")
    return record


def save_metrics(path, metrics):
    write_rows(path, ("metric", "value"), sorted(metrics.items()))


def load_metrics(path):
    _, rows = read_rows(path)
    out = {}
    for name, value in rows:
        try:
            out[name] = float(value)
        except ValueError:
            out[name] = value
    return out
