"""Tabular I/O, [-1, 1] min-max scaling and train/test splitting.

A :class:`Dataset` holds the five irradiance predictors and the diffuse
fraction target in the column order of :data:`SCHEMA`.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

logger = logging.getLogger(__name__)

SCHEMA: tuple[str, ...] = ("global", "beam", "sunshine_index", "kt", "k", "kd")
N_FEATURES = 5


class DataError(ValueError):
    """Raised for malformed input files or invalid dataset operations."""


class DegenerateColumnError(DataError):
    def __init__(self, column: str):
        super().__init__(f"column {column!r} is constant; cannot normalize")
        self.column = column


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus target vector.

    Attributes
    ----------
    features : ndarray, shape (n, 5)
    targets : ndarray, shape (n,)
    columns : tuple of str
        Six names, five features followed by the target.
    dropped : int
        Rows discarded while loading (0 for in-memory datasets).
    """

    features: np.ndarray
    targets: np.ndarray
    columns: tuple[str, ...] = SCHEMA
    dropped: int = field(default=0, compare=False)

    def __post_init__(self):
        X = np.array(self.features, dtype=float)
        y = np.array(self.targets, dtype=float).reshape(-1)
        if X.ndim != 2 or X.shape[1] != N_FEATURES:
            raise DataError(f"features must have shape (n, {N_FEATURES}), got {X.shape}")
        if X.shape[0] != y.shape[0]:
            raise DataError(f"{X.shape[0]} feature rows but {y.shape[0]} targets")
        if len(self.columns) != N_FEATURES + 1:
            raise DataError("columns must list 5 features and 1 target")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise DataError("dataset contains non-finite values")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "targets", y)
        object.__setattr__(self, "columns", tuple(self.columns))

    @property
    def n(self) -> int:
        return self.targets.shape[0]

    def table(self) -> np.ndarray:
        """Return the (n, 6) matrix of features with the target appended."""
        return np.column_stack([self.features, self.targets])

    def take(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(self.features[rows], self.targets[rows], self.columns)

    def fingerprint(self) -> str:
        import hashlib

        h = hashlib.sha256()
        h.update(",".join(self.columns).encode())
        h.update(np.ascontiguousarray(self.table()).tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class NormalizationParams:
    """Per-column minima and maxima for all six columns."""

    mins: np.ndarray
    maxs: np.ndarray
    columns: tuple[str, ...] = SCHEMA

    def index(self, col) -> int:
        if isinstance(col, str):
            try:
                return [c.lower() for c in self.columns].index(col.lower())
            except ValueError:
                raise DataError(f"unknown column {col!r}") from None
        return int(col)


@dataclass(frozen=True)
class SplitDataset:
    train: Dataset
    test: Dataset
    ratio: float
    seed: int
    train_rows: np.ndarray
    test_rows: np.ndarray


def load_csv(path, schema: Sequence[str] = SCHEMA) -> Dataset:
    """Read a comma-separated file whose header starts with ``schema``.

    Header names are compared case-insensitively; extra trailing columns are
    ignored. Rows with missing, non-numeric or non-finite cells are dropped
    and counted in ``Dataset.dropped``.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    schema = tuple(schema)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        got = [h.strip().lower() for h in header[: len(schema)]]
        if got != [s.lower() for s in schema]:
            raise DataError(f"{path}: header {header!r} does not match schema {list(schema)!r}")
        ncol = len(schema)
        rows, dropped = [], 0
        for rec in reader:
            if not rec or all(not c.strip() for c in rec):
                continue
            try:
                vals = [float(c) for c in rec[:ncol]]
            except ValueError:
                dropped += 1
                continue
            if len(vals) < ncol or not all(math.isfinite(v) for v in vals):
                dropped += 1
                continue
            rows.append(vals)
    if len(rows) < 2:
        raise DataError(f"{path}: fewer than 2 valid rows after filtering ({dropped} dropped)")
    if dropped:
        logger.info("%s: dropped %d invalid rows", path, dropped)
    table = np.array(rows, dtype=float)
    return Dataset(table[:, :N_FEATURES], table[:, N_FEATURES], schema, dropped=dropped)


def save_csv(data: Dataset, path) -> None:
    """Write ``data`` in the layout :func:`load_csv` reads back losslessly."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(data.columns)
        for row in data.table():
            w.writerow([repr(float(v)) for v in row])


def normalize_fit(data: Dataset) -> NormalizationParams:
    table = data.table()
    mins = table.min(axis=0)
    maxs = table.max(axis=0)
    for name, lo, hi in zip(data.columns, mins, maxs):
        if not hi > lo:
            raise DegenerateColumnError(name)
    mins.setflags(write=False)
    maxs.setflags(write=False)
    return NormalizationParams(mins, maxs, data.columns)


def normalize_apply(x, col, params: NormalizationParams):
    """Map ``x`` onto [-1, 1] using the column's fitted range.

    Values outside the fitted range extrapolate linearly.
    """
    j = params.index(col)
    lo, hi = params.mins[j], params.maxs[j]
    return ((np.asarray(x, dtype=float) - lo) / (hi - lo)) * 2.0 - 1.0


def denormalize(x_n, col, params: NormalizationParams):
    j = params.index(col)
    lo, hi = params.mins[j], params.maxs[j]
    return (np.asarray(x_n, dtype=float) + 1.0) / 2.0 * (hi - lo) + lo


def normalize_dataset(data: Dataset, params: NormalizationParams) -> Dataset:
    table = (data.table() - params.mins) / (params.maxs - params.mins) * 2.0 - 1.0
    return Dataset(table[:, :N_FEATURES], table[:, N_FEATURES], data.columns)


def denormalize_targets(y_n, params: NormalizationParams):
    return denormalize(y_n, N_FEATURES, params)


def split_train_test(data: Dataset, ratio: float = 0.8, seed: int = 0,
                     shuffle: bool = False) -> SplitDataset:
    """Deterministic partition into leading ``ceil(ratio * n)`` train rows and the rest.

    With ``shuffle=True`` the rows are permuted by ``numpy.random.default_rng(seed)``
    before cutting. Both partitions keep at least one row.
    """
    if not 0.0 < ratio < 1.0:
        raise DataError(f"ratio must lie in (0, 1), got {ratio}")
    n = data.n
    # round() guards against 0.7 * 10 == 7.000000000000001
    n_train = math.ceil(round(ratio * n, 9))
    n_train = min(max(n_train, 1), n - 1)
    order = np.arange(n)
    if shuffle:
        order = np.random.default_rng(seed).permutation(n)
    tr, te = order[:n_train], order[n_train:]
    return SplitDataset(data.take(tr), data.take(te), ratio, seed, tr, te)
