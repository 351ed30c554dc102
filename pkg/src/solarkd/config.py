"""Experiment configuration and its ``key = value`` file format.

Example file::

    # lists are comma separated
    neuron_counts = 15, 20, 25, 30
    gwo_populations = 100, 200, 300, 400
    gwo_iterations = 500
    metric_scale = normalized
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

from .anfis import MF_KINDS


@dataclass(frozen=True)
class ExperimentConfig:
    data: Optional[str] = None
    surrogate_n: int = 5000
    surrogate_noise: float = 0.05
    surrogate_seed: int = 0
    split_ratio: float = 0.8
    shuffle: bool = False
    seeds: tuple = (0,)
    neuron_counts: tuple = (15, 20, 25, 30)
    repetitions: int = 3
    mlp_learning_rate: float = 0.01
    mlp_epochs: int = 2000
    gwo_populations: tuple = (100, 200, 300, 400)
    gwo_iterations: int = 500
    gwo_bound: float = 5.0
    mf_kinds: tuple = MF_KINDS
    anfis_epochs: int = 500
    anfis_learning_rate: float = 0.01
    metric_scale: str = "normalized"
    selection_metric: str = "mae"
    validation_fraction: float = 0.0
    final_neurons: int = 20
    final_population: int = 300
    final_mf: str = "gaussian"

    def __post_init__(self):
        if self.metric_scale not in ("normalized", "original"):
            raise ValueError("metric_scale must be 'normalized' or 'original'")
        if self.selection_metric not in ("mae", "rmse"):
            raise ValueError("selection_metric must be 'mae' or 'rmse'")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must lie in [0, 1)")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        for kind in self.mf_kinds:
            if kind not in MF_KINDS:
                raise ValueError(f"unknown membership family {kind!r}")

    @property
    def seed(self) -> int:
        return int(self.seeds[0])

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **{k: v for k, v in kw.items() if v is not None})

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def _coerce(raw: str, default):
    raw = raw.strip()
    if isinstance(default, bool):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if isinstance(default, tuple):
        items = [s.strip() for s in raw.split(",") if s.strip()]
        kind = type(default[0]) if default else str
        return tuple(kind(s) for s in items)
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    if raw.lower() in ("", "none"):
        return None
    return raw


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    base = base or ExperimentConfig()
    known = {f.name: getattr(base, f.name) for f in fields(base)}
    updates = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        if key not in known:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        updates[key] = _coerce(val, known[key])
    return dataclasses.replace(base, **updates)


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def dump_config(cfg: ExperimentConfig) -> str:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ", ".join(str(x) for x in v)
        lines.append(f"{f.name} = {'none' if v is None else v}")
    return "\n".join(lines) + "\n"


__all__ = ["ExperimentConfig", "dump_config", "load_config", "parse_config"]
