"""Synthetic hourly irradiance records in the six-column layout.

Generator, per row (``N`` = standard normal draws, ``noise`` = scale)::

    cos_z ~ U(0.08, 1),  doy ~ U{1..365}
    i0h   = 1367 * (1 + 0.033 cos(2 pi doy / 365)) * cos_z     # extraterrestrial, horizontal
    kt    = clip(0.9 * Beta(3, 1.8), 0.02, 0.9)
    kd    = clip(decomposition(kt) + noise * N, 0, 1)
    global = kt * i0h
    beam   = global * (1 - kd) / cos_z                          # so beam * cos_z <= global
    k      = max(kd * kt * (1 + noise * N), 0)
    sunshine_index = clip(1.4 * kt - 0.15 + noise * N, 0, 1)

with ``decomposition(kt) = 1 / (1 + exp(-5.0 + 8.6 kt))``, a logistic
diffuse-fraction curve. With ``noise == 0`` the ``kd`` column equals
``decomposition(kt)`` exactly.
"""
from __future__ import annotations

import numpy as np

from .dataio import SCHEMA, Dataset, save_csv

SOLAR_CONSTANT = 1367.0


def decomposition(kt):
    return 1.0 / (1.0 + np.exp(-5.0 + 8.6 * np.asarray(kt, dtype=float)))


def generate_surrogate(n: int = 5000, seed: int = 0, noise: float = 0.05, path=None) -> Dataset:
    """Draw ``n`` synthetic records; write them to ``path`` as CSV if given."""
    if n < 100:
        raise ValueError("surrogate generator needs n >= 100")
    if noise < 0:
        raise ValueError("noise must be non-negative")
    rng = np.random.default_rng(seed)
    cos_z = rng.uniform(0.08, 1.0, n)
    doy = rng.integers(1, 366, n)
    kt = np.clip(0.9 * rng.beta(3.0, 1.8, n), 0.02, 0.9)
    eps = rng.standard_normal((3, n))
    i0h = SOLAR_CONSTANT * (1.0 + 0.033 * np.cos(2 * np.pi * doy / 365.0)) * cos_z
    kd = np.clip(decomposition(kt) + noise * eps[0], 0.0, 1.0)
    glob = kt * i0h
    beam = glob * (1.0 - kd) / cos_z
    k = np.maximum(kd * kt * (1.0 + noise * eps[1]), 0.0)
    sunshine = np.clip(1.4 * kt - 0.15 + noise * eps[2], 0.0, 1.0)
    data = Dataset(np.column_stack([glob, beam, sunshine, kt, k]), kd, SCHEMA)
    if path is not None:
        save_csv(data, path)
    return data
