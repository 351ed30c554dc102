"""MAE / RMSE / MSE error summaries."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Metrics:
    mae: float
    rmse: float
    mse: float
    n: int


def compute_metrics(targets, predictions) -> Metrics:
    """Mean absolute error and root mean squared error of ``predictions``.

    Raises
    ------
    ValueError
        If the inputs differ in length, are empty or hold non-finite values.
    """
    x = np.asarray(targets, dtype=float).reshape(-1)
    y = np.asarray(predictions, dtype=float).reshape(-1)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.size} targets vs {y.size} predictions")
    if x.size == 0:
        raise ValueError("cannot compute metrics of an empty sample")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("targets and predictions must be finite")
    err = x - y
    mae = float(np.mean(np.abs(err)))
    mse = float(np.mean(err * err))
    rmse = float(np.sqrt(mse))
    # the two sums round independently; keep mae <= rmse exact
    mae = min(mae, rmse)
    return Metrics(mae=mae, rmse=rmse, mse=mse, n=int(x.size))


def mse(targets, predictions) -> float:
    err = np.asarray(targets, dtype=float) - np.asarray(predictions, dtype=float)
    return float(np.mean(err * err))
