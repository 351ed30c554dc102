"""Sweeps over network size, GWO population and membership family, and the final test comparison.

Sweeps score every configuration on the training partition; only the final
comparison touches the held-out test rows. With ``validation_fraction > 0``
the sweeps instead fit on the leading part of the training partition and
score on its tail.
"""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .anfis import AnfisModel, AnfisTrainConfig, anfis_init_grid, anfis_predict, train_anfis_hybrid
from .config import ExperimentConfig
from .dataio import (Dataset, NormalizationParams, denormalize_targets, load_csv,
                     normalize_dataset, normalize_fit, split_train_test)
from .gwo import GwoConfig, train_mlp_gwo
from .metrics import compute_metrics
from .mlp import TrainConfig, mlp_forward, mlp_init, train_mlp_gd
from .surrogate import generate_surrogate

logger = logging.getLogger(__name__)

MODEL_NAMES = ("MLP", "ANFIS", "MLP-GWO")
EXPERIMENT_HEADERS = {
    "neurons": "No. of neurons in the hidden layer",
    "mf": "MF type",
    "population": "No. of population",
    "final": "Model Name",
}


@dataclass(frozen=True)
class PreparedData:
    """Normalised train/test partitions plus the fitted scaling."""

    train: Dataset
    test: Dataset
    norm: NormalizationParams
    fingerprint: str
    fit: Dataset = None      # rows used for fitting during sweeps
    select: Dataset = None   # rows scored during sweeps
    select_phase: str = "train"


@dataclass(frozen=True)
class ReportRow:
    experiment: str
    config: str
    phase: str
    mae: float
    rmse: float
    scale: str


@dataclass
class ExperimentReport:
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    winner: object = None
    traces: dict = field(default_factory=dict)      # experiment -> list of csv rows
    models: dict = field(default_factory=dict)      # config -> trained model
    residuals: dict = field(default_factory=dict)   # model name -> (n, 3) array

    def extend(self, other: "ExperimentReport") -> "ExperimentReport":
        self.rows.extend(other.rows)
        self.metadata.update(other.metadata)
        self.traces.update(other.traces)
        self.residuals.update(other.residuals)
        return self

    def rows_for(self, experiment: str) -> list:
        return [r for r in self.rows if r.experiment == experiment]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["experiment", "configuration", "phase", "mae", "rmse", "scale"])
        for r in self.rows:
            w.writerow([r.experiment, r.config, r.phase, repr(r.mae), repr(r.rmse), r.scale])
        return buf.getvalue()

    def format_table(self) -> str:
        out = []
        for exp in dict.fromkeys(r.experiment for r in self.rows):
            rows = self.rows_for(exp)
            head = EXPERIMENT_HEADERS.get(exp, "configuration")
            width = max(len(head), *(len(r.config) for r in rows))
            out.append(f"[{exp}] phase={rows[0].phase} scale={rows[0].scale}")
            out.append(f"{head:<{width}}  {'MAE':>10}  {'RMSE':>10}")
            for r in rows:
                out.append(f"{r.config:<{width}}  {r.mae:10.6f}  {r.rmse:10.6f}")
            out.append("")
        return "\n".join(out)


@dataclass
class Winners:
    neurons: int
    population: int
    mf: str
    models: dict = field(default_factory=dict)


def prepare_data(cfg: ExperimentConfig, data: Optional[Dataset] = None) -> PreparedData:
    """Load or generate the raw table, split it and fit scaling on the training rows only."""
    if data is None:
        if cfg.data:
            data = load_csv(cfg.data)
        else:
            data = generate_surrogate(cfg.surrogate_n, cfg.surrogate_seed, cfg.surrogate_noise)
    split = split_train_test(data, cfg.split_ratio, cfg.seed, cfg.shuffle)
    norm = normalize_fit(split.train)
    train = normalize_dataset(split.train, norm)
    test = normalize_dataset(split.test, norm)
    fit, select, phase = train, train, "train"
    if cfg.validation_fraction > 0:
        inner = split_train_test(train, 1.0 - cfg.validation_fraction, cfg.seed, False)
        fit, select, phase = inner.train, inner.test, "validation"
    return PreparedData(train, test, norm, data.fingerprint(), fit, select, phase)


def _score(cfg: ExperimentConfig, prep: PreparedData, targets, predictions):
    if cfg.metric_scale == "original":
        targets = denormalize_targets(targets, prep.norm)
        predictions = denormalize_targets(predictions, prep.norm)
    return compute_metrics(targets, predictions)


def _select(cfg: ExperimentConfig, metrics) -> float:
    return metrics.mae if cfg.selection_metric == "mae" else metrics.rmse


def _base_metadata(cfg: ExperimentConfig, prep: PreparedData) -> dict:
    return {
        "seeds": list(cfg.seeds),
        "data_fingerprint": prep.fingerprint,
        "metric_scale": cfg.metric_scale,
        "selection_metric": cfg.selection_metric,
        "n_train": prep.train.n,
        "n_test": prep.test.n,
    }


def _train_mlp(cfg: ExperimentConfig, hidden: int, fit: Dataset, score_on: Dataset,
               prep: PreparedData):
    """Best of ``cfg.repetitions`` seeded gradient-descent runs by the selection metric."""
    tcfg = TrainConfig(cfg.mlp_learning_rate, cfg.mlp_epochs, cfg.seed, cfg.repetitions)
    best = None
    for rep in range(cfg.repetitions):
        params, trace = train_mlp_gd(mlp_init(hidden, cfg.seed + rep), fit, tcfg)
        m = _score(cfg, prep, score_on.targets, mlp_forward(params, score_on.features))
        if best is None or _select(cfg, m) < _select(cfg, best[2]):
            best = (params, trace, m)
    return best


def run_neuron_sweep(cfg: ExperimentConfig, prep: Optional[PreparedData] = None) -> ExperimentReport:
    prep = prep or prepare_data(cfg)
    report = ExperimentReport(metadata=_base_metadata(cfg, prep))
    trace_rows = []
    best = None
    for hidden in cfg.neuron_counts:
        params, trace, m = _train_mlp(cfg, hidden, prep.fit, prep.select, prep)
        report.rows.append(ReportRow("neurons", str(hidden), prep.select_phase, m.mae, m.rmse,
                                     cfg.metric_scale))
        report.models[hidden] = params
        trace_rows += [(hidden, e + 1, v) for e, v in enumerate(trace)]
        if best is None or _select(cfg, m) < best[1]:
            best = (hidden, _select(cfg, m))
    report.traces["neurons"] = (("neurons", "epoch", "mse"), trace_rows)
    report.winner = best[0]
    report.metadata["neurons_winner"] = best[0]
    return report


def _gwo_config(cfg: ExperimentConfig, population: int) -> GwoConfig:
    return GwoConfig(population, cfg.gwo_iterations, -cfg.gwo_bound, cfg.gwo_bound, cfg.seed)


def run_population_sweep(cfg: ExperimentConfig, winning_neurons: int,
                         prep: Optional[PreparedData] = None) -> ExperimentReport:
    prep = prep or prepare_data(cfg)
    report = ExperimentReport(metadata=_base_metadata(cfg, prep))
    trace_rows = []
    best = None
    for pop in cfg.gwo_populations:
        params, result = train_mlp_gwo(winning_neurons, prep.fit, _gwo_config(cfg, pop))
        m = _score(cfg, prep, prep.select.targets, mlp_forward(params, prep.select.features))
        report.rows.append(ReportRow("population", str(pop), prep.select_phase, m.mae, m.rmse,
                                     cfg.metric_scale))
        report.models[pop] = params
        trace_rows += [(pop, t + 1, f, a) for t, (f, a) in enumerate(zip(result.trace, result.a_values))]
        if best is None or _select(cfg, m) < best[1]:
            best = (pop, _select(cfg, m))
    report.traces["population"] = (("population", "iteration", "alpha_fitness", "a"), trace_rows)
    report.winner = best[0]
    report.metadata.update(population_winner=best[0], population_neurons=winning_neurons)
    return report


def run_mf_sweep(cfg: ExperimentConfig, prep: Optional[PreparedData] = None) -> ExperimentReport:
    prep = prep or prepare_data(cfg)
    report = ExperimentReport(metadata=_base_metadata(cfg, prep))
    acfg = AnfisTrainConfig(cfg.anfis_epochs, cfg.anfis_learning_rate, cfg.seed)
    trace_rows = []
    best = None
    for kind in cfg.mf_kinds:
        model, trace = train_anfis_hybrid(anfis_init_grid(prep.fit, kind, cfg.seed), prep.fit, acfg)
        m = _score(cfg, prep, prep.select.targets, anfis_predict(model, prep.select.features))
        report.rows.append(ReportRow("mf", kind.capitalize(), prep.select_phase, m.mae, m.rmse,
                                     cfg.metric_scale))
        report.models[kind] = model
        trace_rows += [(kind, e + 1, v) for e, v in enumerate(trace)]
        if best is None or _select(cfg, m) < best[1]:
            best = (kind, _select(cfg, m))
    report.traces["mf"] = (("mf_type", "epoch", "mse"), trace_rows)
    report.winner = best[0]
    report.metadata["mf_winner"] = best[0]
    return report


def fit_final_models(cfg: ExperimentConfig, winners: Winners, prep: PreparedData) -> dict:
    """Train the three winning configurations on the full training partition.

    Models already present in ``winners.models`` (keyed by model name) are reused;
    training is deterministic, so a retrain with the same seed gives the same weights.
    """
    models = dict(winners.models)
    if "MLP" not in models:
        models["MLP"] = _train_mlp(cfg, winners.neurons, prep.train, prep.train, prep)[0]
    if "ANFIS" not in models:
        acfg = AnfisTrainConfig(cfg.anfis_epochs, cfg.anfis_learning_rate, cfg.seed)
        models["ANFIS"] = train_anfis_hybrid(anfis_init_grid(prep.train, winners.mf, cfg.seed),
                                             prep.train, acfg)[0]
    if "MLP-GWO" not in models:
        models["MLP-GWO"] = train_mlp_gwo(winners.neurons, prep.train,
                                          _gwo_config(cfg, winners.population))[0]
    return models


def predict(model, X) -> np.ndarray:
    if isinstance(model, AnfisModel):
        return anfis_predict(model, X)
    return mlp_forward(model, X)


def run_final_comparison(cfg: ExperimentConfig, winners: Winners,
                         prep: Optional[PreparedData] = None) -> ExperimentReport:
    """Test-set MAE/RMSE of MLP, ANFIS and MLP-GWO plus per-row residuals."""
    prep = prep or prepare_data(cfg)
    report = ExperimentReport(metadata=_base_metadata(cfg, prep))
    models = fit_final_models(cfg, winners, prep)
    for name in MODEL_NAMES:
        pred = predict(models[name], prep.test.features)
        target = prep.test.targets
        if cfg.metric_scale == "original":
            target = denormalize_targets(target, prep.norm)
            pred = denormalize_targets(pred, prep.norm)
        m = compute_metrics(target, pred)
        report.rows.append(ReportRow("final", name, "test", m.mae, m.rmse, cfg.metric_scale))
        report.residuals[name] = np.column_stack([target, pred, target - pred])
    report.models = models
    report.metadata.update(
        final_neurons=winners.neurons, final_population=winners.population, final_mf=winners.mf,
        final_models_note=f"winning configurations trained on the full training partition "
                          f"with seed {cfg.seed}",
    )
    return report


def run_all(cfg: ExperimentConfig, prep: Optional[PreparedData] = None) -> ExperimentReport:
    prep = prep or prepare_data(cfg)
    neurons = run_neuron_sweep(cfg, prep)
    mf = run_mf_sweep(cfg, prep)
    population = run_population_sweep(cfg, neurons.winner, prep)
    winners = Winners(neurons.winner, population.winner, mf.winner)
    if prep.select_phase == "train":
        winners.models = {
            "MLP": neurons.models[neurons.winner],
            "ANFIS": mf.models[mf.winner],
            "MLP-GWO": population.models[population.winner],
        }
    final = run_final_comparison(cfg, winners, prep)
    report = ExperimentReport(metadata=_base_metadata(cfg, prep))
    for part in (neurons, mf, population, final):
        report.extend(part)
    report.winner = winners
    return report


def run_seed_study(cfg: ExperimentConfig, winners: Winners, data: Optional[Dataset] = None):
    """Repeat the final comparison once per seed in ``cfg.seeds``.

    For each seed a fresh surrogate is drawn (unless ``data`` is given) and the
    split shuffle seed and training seeds follow it. Returns a dict mapping
    model name to an array of test RMSE values, one per seed.
    """
    import dataclasses

    out = {name: [] for name in MODEL_NAMES}
    for seed in cfg.seeds:
        scfg = dataclasses.replace(cfg, seeds=(seed,), surrogate_seed=seed)
        report = run_final_comparison(scfg, Winners(winners.neurons, winners.population, winners.mf),
                                      prepare_data(scfg, data))
        for row in report.rows:
            out[row.config].append(row.rmse)
    return {k: np.array(v) for k, v in out.items()}


def write_outputs(report: ExperimentReport, out_dir, extra_meta: Optional[dict] = None) -> list:
    """Write report.csv, report.txt, trace_*.csv, residuals_*.csv and metadata.json.

    Everything except metadata.json (which carries a timestamp) is a pure
    function of configuration, seeds and data.
    """
    import datetime
    import json

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    (out / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    (out / "report.txt").write_text(report.format_table(), encoding="utf-8")
    written += [out / "report.csv", out / "report.txt"]
    for name, (header, rows) in report.traces.items():
        path = out / f"trace_{name}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows([repr(float(v)) if isinstance(v, float) else v for v in row] for row in rows)
        written.append(path)
    for name, arr in report.residuals.items():
        path = out / f"residuals_{name.lower().replace('-', '_')}.csv"
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["target", "prediction", "residual"])
            w.writerows([repr(float(v)) for v in row] for row in arr)
        written.append(path)
    meta = dict(report.metadata)
    meta.update(extra_meta or {})
    meta["created"] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    (out / "metadata.json").write_text(json.dumps(meta, indent=2, default=str) + "\n",
                                       encoding="utf-8")
    written.append(out / "metadata.json")
    return written
