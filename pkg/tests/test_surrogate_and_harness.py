import json

import numpy as np
import pytest

from solarkd import experiments as ex
from solarkd.cli import main
from solarkd.config import ExperimentConfig, dump_config, load_config, parse_config
from solarkd.dataio import load_csv
from solarkd.surrogate import decomposition, generate_surrogate

TINY = ExperimentConfig(
    surrogate_n=300, neuron_counts=(3, 5, 7, 9), repetitions=3, mlp_epochs=30,
    gwo_populations=(6, 8, 10, 12), gwo_iterations=5, anfis_epochs=3,
)

TINY_TEXT = """\
# reduced protocol for tests
surrogate_n = 300
neuron_counts = 3, 5, 7, 9
mlp_epochs = 30
gwo_populations = 6, 8, 10, 12
gwo_iterations = 5
anfis_epochs = 3
"""


@pytest.fixture(scope="module")
def prep():
    return ex.prepare_data(TINY)


@pytest.fixture(scope="module")
def full_report(prep):
    return ex.run_all(TINY, prep)


# ---- surrogate ---------------------------------------------------------------

def test_surrogate_deterministic():
    a, b = generate_surrogate(500, seed=4), generate_surrogate(500, seed=4)
    assert a.fingerprint() == b.fingerprint()
    assert a.fingerprint() != generate_surrogate(500, seed=5).fingerprint()


def test_surrogate_noiseless_target_is_decomposition():
    d = generate_surrogate(1000, seed=1, noise=0.0)
    np.testing.assert_array_equal(d.targets, decomposition(d.features[:, 3]))


def test_surrogate_ranges():
    d = generate_surrogate(5000, seed=2)
    glob, beam, sun, kt, k = d.features.T
    assert d.columns == ("global", "beam", "sunshine_index", "kt", "k", "kd")
    assert np.all((d.targets >= 0) & (d.targets <= 1))
    assert np.all((sun >= 0) & (sun <= 1))
    assert np.all((kt >= 0.02) & (kt <= 0.9))
    assert np.all(glob > 0) and np.all(beam >= 0) and np.all(k >= 0)


def test_surrogate_csv_roundtrip(tmp_path):
    d = generate_surrogate(200, seed=3, path=tmp_path / "s.csv")
    assert load_csv(tmp_path / "s.csv").fingerprint() == d.fingerprint()


@pytest.mark.parametrize("kw", [dict(n=50), dict(noise=-0.1)])
def test_surrogate_validation(kw):
    with pytest.raises(ValueError):
        generate_surrogate(**kw)


# ---- configuration -------------------------------------------------------------

def test_parse_config():
    cfg = parse_config(TINY_TEXT)
    assert cfg == TINY


def test_config_dump_roundtrip(tmp_path):
    cfg = TINY.with_overrides(shuffle=True, seeds=(3, 4), metric_scale="original", data="x.csv")
    (tmp_path / "c.txt").write_text(dump_config(cfg))
    assert load_config(tmp_path / "c.txt") == cfg
    default = ExperimentConfig()
    assert parse_config(dump_config(default)) == default


@pytest.mark.parametrize("text", ["nonsense = 1", "neuron_counts", "metric_scale = kelvin",
                                  "shuffle = maybe", "mf_kinds = gaussian, sigmoid"])
def test_parse_config_rejects(text):
    with pytest.raises(ValueError):
        parse_config(text)


def test_config_defaults():
    cfg = ExperimentConfig()
    assert cfg.neuron_counts == (15, 20, 25, 30)
    assert cfg.gwo_populations == (100, 200, 300, 400)
    assert (cfg.final_neurons, cfg.final_population, cfg.final_mf) == (20, 300, "gaussian")
    assert cfg.split_ratio == 0.8 and cfg.mlp_learning_rate == 0.01


# ---- harness -------------------------------------------------------------------

def test_prepare_data_fits_scaling_on_train_only(prep):
    assert prep.train.n == 240 and prep.test.n == 60
    assert prep.train.features.min() == -1.0 and prep.train.features.max() == 1.0
    np.testing.assert_array_equal(prep.train.features.min(0), -1.0)


def test_neuron_sweep_rows(prep, full_report):
    rows = full_report.rows_for("neurons")
    assert [r.config for r in rows] == ["3", "5", "7", "9"]
    assert all(r.phase == "train" and r.mae <= r.rmse for r in rows)
    header, trace = full_report.traces["neurons"]
    assert len(trace) == 4 * TINY.mlp_epochs


def test_neuron_sweep_trains_best_of_repetitions(prep, monkeypatch):
    calls = []
    real = ex.train_mlp_gd
    monkeypatch.setattr(ex, "train_mlp_gd", lambda *a: calls.append(1) or real(*a))
    ex.run_neuron_sweep(TINY, prep)
    assert len(calls) == 12


def test_population_sweep_rows(full_report):
    rows = full_report.rows_for("population")
    assert [r.config for r in rows] == ["6", "8", "10", "12"]
    assert full_report.metadata["population_neurons"] == full_report.winner.neurons
    _, trace = full_report.traces["population"]
    assert len(trace) == 4 * TINY.gwo_iterations


def test_mf_sweep_rows(full_report):
    assert [r.config for r in full_report.rows_for("mf")] == [
        "Triangular", "Trapezoidal", "Gbell", "Gaussian"]


def test_final_comparison(prep, full_report):
    rows = full_report.rows_for("final")
    assert [r.config for r in rows] == ["MLP", "ANFIS", "MLP-GWO"]
    assert all(r.phase == "test" for r in rows)
    for name in ex.MODEL_NAMES:
        res = full_report.residuals[name]
        assert res.shape == (prep.test.n, 3)
        np.testing.assert_array_equal(res[:, 2], res[:, 0] - res[:, 1])


def test_winners_minimize_selection_metric(full_report):
    w = full_report.winner
    for exp, chosen in (("neurons", str(w.neurons)), ("population", str(w.population)),
                        ("mf", w.mf.capitalize())):
        rows = full_report.rows_for(exp)
        assert min(rows, key=lambda r: r.mae).config == chosen


def test_final_models_match_retrain(prep, full_report):
    w = full_report.winner
    fresh = ex.run_final_comparison(TINY, ex.Winners(w.neurons, w.population, w.mf), prep)
    assert fresh.rows == full_report.rows_for("final")


def test_original_scale_metrics(prep):
    cfg = TINY.with_overrides(metric_scale="original")
    rep = ex.run_final_comparison(cfg, ex.Winners(3, 6, "gaussian"), prep)
    norm = ex.run_final_comparison(TINY, ex.Winners(3, 6, "gaussian"), prep)
    span = prep.norm.maxs[-1] - prep.norm.mins[-1]
    for a, b in zip(rep.rows, norm.rows):
        assert a.scale == "original"
        assert a.rmse == pytest.approx(b.rmse * span / 2, rel=1e-9)


def test_validation_fraction_scores_on_tail():
    cfg = TINY.with_overrides(validation_fraction=0.25)
    p = ex.prepare_data(cfg)
    assert p.select_phase == "validation" and p.fit.n == 180 and p.select.n == 60
    rep = ex.run_mf_sweep(cfg, p)
    assert all(r.phase == "validation" for r in rep.rows)


def test_seed_study_shape():
    cfg = TINY.with_overrides(seeds=(0, 1))
    out = ex.run_seed_study(cfg, ex.Winners(3, 6, "gaussian"))
    assert set(out) == set(ex.MODEL_NAMES)
    assert all(v.shape == (2,) and np.all(v > 0) for v in out.values())


def test_write_outputs(tmp_path, full_report):
    files = {p.name for p in ex.write_outputs(full_report, tmp_path)}
    assert files == {"report.csv", "report.txt", "trace_neurons.csv", "trace_population.csv",
                     "trace_mf.csv", "residuals_mlp.csv", "residuals_anfis.csv",
                     "residuals_mlp_gwo.csv", "metadata.json"}
    lines = (tmp_path / "report.csv").read_text().splitlines()
    assert len(lines) == 1 + 15
    assert "np." not in (tmp_path / "trace_population.csv").read_text()
    meta = json.loads((tmp_path / "metadata.json").read_text())
    assert meta["n_test"] == 60 and "created" in meta


# ---- command line ---------------------------------------------------------------

@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "tiny.cfg"
    p.write_text(TINY_TEXT)
    return p


def _outputs(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.name != "metadata.json"}


def test_cli_all_reproducible(tmp_path, cfg_file, capsys):
    assert main(["all", "--config", str(cfg_file), "--out-dir", str(tmp_path / "a")]) == 0
    assert main(["all", "--config", str(cfg_file), "--out-dir", str(tmp_path / "b")]) == 0
    a, b = _outputs(tmp_path / "a"), _outputs(tmp_path / "b")
    assert a == b and len(a) == 8
    assert "MLP-GWO" in capsys.readouterr().out


@pytest.mark.parametrize("command,experiment,n_rows", [
    ("sweep-mlp", "neurons", 4), ("sweep-anfis", "mf", 4),
    (["sweep-gwo", "--neurons", "3"], "population", 4),
    (["compare", "--neurons", "3", "--population", "6", "--mf", "gbell"], "final", 3),
])
def test_cli_subcommands(tmp_path, cfg_file, command, experiment, n_rows):
    argv = [command] if isinstance(command, str) else list(command)
    assert main(argv + ["--config", str(cfg_file), "--out-dir", str(tmp_path)]) == 0
    lines = (tmp_path / "report.csv").read_text().splitlines()[1:]
    assert len(lines) == n_rows and all(line.startswith(experiment + ",") for line in lines)


def test_cli_generate_then_use(tmp_path, cfg_file):
    out = tmp_path / "data.csv"
    assert main(["generate", "--n", "300", "--seed", "7", "--out", str(out)]) == 0
    assert load_csv(out).n == 300
    assert main(["sweep-anfis", "--config", str(cfg_file), "--data", str(out),
                 "--out-dir", str(tmp_path / "r")]) == 0
    meta = json.loads((tmp_path / "r" / "metadata.json").read_text())
    assert meta["data_fingerprint"] == load_csv(out).fingerprint()


@pytest.mark.parametrize("argv", [
    ["sweep-mlp", "--data", "/nonexistent/file.csv"],
    ["generate", "--n", "10"],
])
def test_cli_errors_exit_nonzero(tmp_path, argv, capsys):
    assert main(argv + ["--out-dir", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    assert err.startswith("solarkd: error:") and err.count("\n") == 1


def test_cli_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2
