import filecmp
import os

import numpy as np
import pytest
import scipy.stats
import yaml

from psvgd.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main
from psvgd.core import ParticleEnsemble
from psvgd.errors import ConfigurationError
from psvgd.harness import io
from psvgd.harness.config import ExperimentConfig, config_from_dict, load_config
from psvgd.harness.metrics import compare_runs, coverage, credible_interval, mean_rmse, variance_rmse
from psvgd.harness.runner import OUTPUT_ENV, load_summary, run_experiment
from psvgd.projected import PsvgdConfig
from psvgd.record import PHASES, RunRecord
from psvgd.svgd import SvgdConfig

CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


def small_config(**changes):
    settings = dict(
        name="small",
        model="linear",
        model_params={"d": 17, "seed": 0},
        algorithm="psvgd-adaptive",
        particles=16,
        iterations=20,
        inner_iterations=5,
    )
    settings.update(changes)
    return ExperimentConfig(**settings)


def write_yaml(path, data):
    path.write_text(yaml.safe_dump(data))
    return str(path)


# configuration


def test_config_validation():
    with pytest.raises(ConfigurationError):
        small_config(model="elliptic")
    with pytest.raises(ConfigurationError):
        small_config(algorithm="mcmc")
    with pytest.raises(ConfigurationError):
        small_config(particles=10, workers=4)
    with pytest.raises(ConfigurationError):
        small_config(iterations=0)
    with pytest.raises(ConfigurationError):
        small_config(step=-1.0)
    with pytest.raises(ConfigurationError):
        small_config(frame="skew")


def test_transport_config_split():
    settings = small_config(iterations=100, inner_iterations=10).transport_config()
    assert isinstance(settings, PsvgdConfig)
    assert (settings.outer_iterations, settings.inner_iterations) == (10, 10)
    assert isinstance(small_config(algorithm="svgd").transport_config(), SvgdConfig)


def test_config_from_dict_and_yaml(tmp_path):
    data = {"model": {"name": "linear", "params": {"d": 9}}, "algorithm": "svgd", "particles": 8}
    config = config_from_dict(data)
    assert config.model_params == {"d": 9}
    assert load_config(write_yaml(tmp_path / "c.yaml", data)) == config
    with pytest.raises(ConfigurationError):
        config_from_dict({"model": "linear", "particle_count": 3})
    with pytest.raises(ConfigurationError):
        config_from_dict({"model": {"name": "linear", "kind": "x"}})
    with pytest.raises(ConfigurationError):
        config_from_dict(["not", "a", "mapping"])
    bad = tmp_path / "bad.yaml"
    bad.write_text("model: [unclosed\n")
    with pytest.raises(ConfigurationError):
        load_config(str(bad))


def test_replace_ignores_none():
    config = small_config()
    assert config.replace(seed=None, workers=None) == config
    assert config.replace(seed=5).seed == 5


@pytest.mark.parametrize("name", sorted(os.listdir(CONFIG_DIR)))
def test_shipped_configs_load(name):
    assert isinstance(load_config(os.path.join(CONFIG_DIR, name)), ExperimentConfig)


# metrics


def test_variance_rmse_examples():
    X = np.array([[1.0, 0.0], [-1.0, 2.0], [0.0, 1.0]])
    assert variance_rmse(X, X.var(axis=0, ddof=1)) == 0.0
    assert variance_rmse(np.array([[-1.0], [1.0]]), [1.0]) == pytest.approx(1.0)
    assert variance_rmse(np.ones((5, 3)), [1.0, 2.0, 2.0]) == pytest.approx(1.0)
    with pytest.raises(ConfigurationError):
        variance_rmse(np.ones((1, 2)), [1.0, 1.0])
    with pytest.raises(ConfigurationError):
        variance_rmse(np.ones((3, 2)), [1.0, 0.0])


def test_mean_rmse():
    assert mean_rmse(np.array([[1.0, 2.0], [3.0, 2.0]]), [2.0, 0.0]) == pytest.approx(np.sqrt(2.0))


def test_credible_interval_examples():
    lo, hi = credible_interval(np.full((30, 2), 3.0))
    assert np.array_equal(lo, [3.0, 3.0]) and np.array_equal(hi, [3.0, 3.0])
    # stratified standard normal sample: the percentiles are nearly exact
    X = scipy.stats.norm.ppf((np.arange(1000) + 0.5) / 1000)[:, None]
    lo, hi = credible_interval(X, 0.9)
    assert abs(lo[0] + 1.645) < 0.01 and abs(hi[0] - 1.645) < 0.01
    # random draws: one 5% quantile has standard error near 0.07, so average over seeds
    bands = np.array([credible_interval(np.random.default_rng(s).standard_normal((1000, 1))) for s in range(20)])
    assert abs(bands[:, 0].mean() + 1.645) < 0.1 and abs(bands[:, 1].mean() - 1.645) < 0.1
    lo, hi = credible_interval(X, 1.0)
    assert lo[0] == X.min() and hi[0] == X.max()
    with pytest.raises(ConfigurationError):
        credible_interval(X, 0.0)


def test_coverage():
    X = np.random.default_rng(1).standard_normal((2000, 4))
    assert coverage(X, [0.0, 0.5, -0.5, 10.0]) == 0.75


def summary(run, key="k", metrics=None):
    return {
        "run": run,
        "algorithm": "svgd",
        "model_key": key,
        "iterations": 3,
        "final_rank": "",
        "total_seconds": 0.5,
        "metrics": {"variance_rmse": 0.1} if metrics is None else metrics,
    }


def test_compare_runs():
    header, rows = compare_runs([summary("a")])
    assert header[-1] == "variance_rmse" and len(rows) == 1
    with pytest.raises(ConfigurationError):
        compare_runs([])
    with pytest.raises(ConfigurationError):
        compare_runs([summary("a"), summary("b", key="other")])
    with pytest.raises(ConfigurationError):
        compare_runs([summary("a"), summary("b", metrics={"mean_rmse": 1.0})])


# artifacts


def test_ensemble_round_trip_bit_exact(tmp_path):
    X = np.random.default_rng(2).standard_normal((7, 3)) * np.array([1e-300, 1.0, 1e300])
    path = tmp_path / "ens.csv"
    io.save_ensemble(str(path), ParticleEnsemble(X))
    assert np.array_equal(io.load_ensemble(str(path)).particles, X)


def test_record_round_trip_bit_exact(tmp_path):
    record = RunRecord(algorithm="psvgd-adaptive")
    rng = np.random.default_rng(3)
    for i in range(4):
        record.log_iteration(i // 2, rng.random(), rng.random() * 10, 0.5**i, i == 3, 3)
    record.log_adaptation(np.array([5.0, 1.0, 0.1 / 3]), 2, 0.1 / 6)
    record.log_adaptation(np.array([4.0, 2.0 / 3]), 2, 0.0)
    record.timings["total"] = 1.25
    record.stop_reason = "max_iterations"
    io.save_record(str(tmp_path), record)
    back = io.load_record(str(tmp_path))
    assert back.iterations == record.iterations
    assert [s.tolist() for s in back.spectra] == [s.tolist() for s in record.spectra]
    assert back.ranks == record.ranks and back.tail_bounds == record.tail_bounds
    assert back.timings == record.timings
    assert (back.algorithm, back.stop_reason) == (record.algorithm, record.stop_reason)


def test_metrics_round_trip(tmp_path):
    metrics = {"variance_rmse": 0.1 / 3, "iterations": 20, "label": "x"}
    path = tmp_path / "m.csv"
    io.save_metrics(str(path), metrics)
    assert io.load_metrics(str(path)) == {"variance_rmse": 0.1 / 3, "iterations": 20.0, "label": "x"}


# runs


def test_svgd_run_writes_artifacts(tmp_path):
    config = small_config(algorithm="svgd", particles=64, iterations=5)
    result = run_experiment(config, str(tmp_path))
    assert io.load_ensemble(str(tmp_path / io.ENSEMBLE_FILE)).particles.shape == (64, 17)
    for name in (io.ITERATIONS_FILE, io.ADAPTATIONS_FILE, io.SPECTRA_FILE, io.TIMINGS_FILE, io.METRICS_FILE, io.RUN_FILE, io.CONFIG_FILE):
        assert (tmp_path / name).is_file()
    assert load_config(str(tmp_path / io.CONFIG_FILE)) == config
    assert result.metrics["iterations"] == 5


def test_record_consistency():
    result = run_experiment(small_config())
    record = result.record
    assert len(record.spectra) == record.adaptation_count == 4
    assert np.all(np.diff(record.iterations["iteration"]) > 0)
    phases = sum(record.timings[p] for p in PHASES if p != "total")
    assert phases <= 1.05 * record.timings["total"]


def test_repeat_runs_byte_identical(tmp_path):
    config = small_config()
    run_experiment(config, str(tmp_path / "a"))
    run_experiment(config, str(tmp_path / "b"))
    same = [n for n in os.listdir(tmp_path / "a") if n != io.TIMINGS_FILE]
    match, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", same, shallow=False)
    assert not mismatch and not errors and len(match) == 7


@pytest.mark.parametrize("algorithm", ["svgd", "psvgd", "psvgd-adaptive"])
def test_worker_count_metrics_equal(algorithm):
    one = run_experiment(small_config(algorithm=algorithm)).metrics
    four = run_experiment(small_config(algorithm=algorithm, workers=4)).metrics
    assert one.keys() == four.keys()
    for key in one:
        assert abs(one[key] - four[key]) <= 1e-12 * max(1.0, abs(one[key]))


def test_reference_run_metrics():
    config = small_config(model_params={"d": 9, "s": 5}, algorithm="rwmh-reference", chain_length=4000)
    metrics = run_experiment(config).metrics
    assert {"variance_rmse", "acceptance_rate", "min_ess", "rate_warning"} <= metrics.keys()


def test_diffusion_and_logistic_metrics():
    diffusion = small_config(model="diffusion", model_params={"seed": 0}, iterations=10)
    assert {"path_mean_rmse", "path_coverage_90", "data_misfit"} <= run_experiment(diffusion).metrics.keys()
    logistic = small_config(model="logistic", model_params={"d": 6, "n_data": 40}, iterations=10)
    accuracy = run_experiment(logistic).metrics["train_accuracy"]
    assert 0.0 <= accuracy <= 1.0


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    result = run_experiment(small_config(output_dir=str(tmp_path / "cfg")))
    assert result.out_dir == str(tmp_path / "env")
    assert (tmp_path / "env" / io.METRICS_FILE).is_file()
    assert not (tmp_path / "cfg").exists()
    explicit = run_experiment(small_config(), str(tmp_path / "arg"))
    assert explicit.out_dir == str(tmp_path / "arg")


# command line


def test_cli_run_and_compare(tmp_path, capsys):
    base = {"model": {"name": "linear", "params": {"d": 17}}, "particles": 16, "iterations": 10, "inner_iterations": 5}
    svgd = write_yaml(tmp_path / "svgd.yaml", {**base, "algorithm": "svgd", "name": "svgd"})
    psvgd = write_yaml(tmp_path / "psvgd.yaml", {**base, "algorithm": "psvgd-adaptive", "name": "psvgd"})
    assert main(["run", "--config", svgd, "--out", str(tmp_path / "r1")]) == EXIT_OK
    assert main(["run", "--config", psvgd, "--out", str(tmp_path / "r2"), "--seed", "3", "--workers", "2"]) == EXIT_OK
    assert "variance_rmse" in capsys.readouterr().out
    assert load_config(str(tmp_path / "r2" / io.CONFIG_FILE)).seed == 3
    # the two algorithms report different metric sets, so compare like with like
    assert main(["run", "--config", svgd, "--out", str(tmp_path / "r3"), "--seed", "1"]) == EXIT_OK
    assert main(["compare", "--out", str(tmp_path / "cmp"), str(tmp_path / "r1"), str(tmp_path / "r3")]) == EXIT_OK
    header, rows = io.read_rows(str(tmp_path / "cmp" / "comparison.csv"))
    assert header[:2] == ["run", "algorithm"] and len(rows) == 2
    assert load_summary(str(tmp_path / "r1"))["run"] == "svgd"


def test_cli_config_errors(tmp_path):
    assert main(["run", "--config", str(tmp_path / "missing.yaml")]) == EXIT_CONFIG
    bad = write_yaml(tmp_path / "bad.yaml", {"model": "linear", "particles": 10, "workers": 3})
    assert main(["run", "--config", bad]) == EXIT_CONFIG
    assert main(["compare", "--out", str(tmp_path), str(tmp_path)]) == EXIT_CONFIG


def test_cli_mismatched_models(tmp_path):
    for d, name in ((9, "a"), (17, "b")):
        model = {"name": "linear", "params": {"d": d, "s": 5}}
        cfg = write_yaml(tmp_path / f"{name}.yaml", {"model": model, "particles": 8, "iterations": 2})
        assert main(["run", "--config", cfg, "--out", str(tmp_path / name)]) == EXIT_OK
    assert main(["compare", "--out", str(tmp_path / "c"), str(tmp_path / "a"), str(tmp_path / "b")]) == EXIT_CONFIG


def test_cli_numerical_failure(tmp_path):
    cfg = write_yaml(tmp_path / "blowup.yaml", {"model": "linear", "algorithm": "svgd", "particles": 8, "iterations": 5, "step": 1e300})
    with np.errstate(all="ignore"):
        assert main(["run", "--config", cfg]) == EXIT_NUMERICAL
