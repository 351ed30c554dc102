"""Grey Wolf Optimizer for box-constrained minimisation, and an MLP trainer built on it.

Update rule for a follower ``x`` guided by leader ``x_l`` (alpha, beta, delta)::

    A = 2 a r1 - a,   C = 2 r2,   d_l = |C x_l - x|,   x_l' = x_l - A d_l
    x_new = (x_alpha' + x_beta' + x_delta') / 3,   clamped to the box

``r1`` and ``r2`` are drawn fresh for every (leader, wolf, dimension). Each
iteration is synchronous: leaders are the three best wolves of the current
population, they stay in place, and every other wolf moves towards them.
``a`` falls linearly from 2 at the first iteration towards 0.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .dataio import N_FEATURES, Dataset
from .mlp import Activation, param_count, vector_to_param

logger = logging.getLogger(__name__)


class NonFiniteCostError(ValueError):
    def __init__(self, position: np.ndarray, value: float):
        super().__init__(f"cost returned {value} at position {np.array2string(position, precision=6)}")
        self.position = position


@dataclass(frozen=True)
class GwoConfig:
    """Optimizer settings.

    ``lower_bound`` / ``upper_bound`` may be scalars (broadcast to every
    dimension) or d-vectors.
    """

    population: int = 30
    iterations: int = 500
    lower_bound: object = -5.0
    upper_bound: object = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.population < 4:
            raise ValueError("population must be >= 4 (three leaders plus a follower)")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")

    def bounds(self, dim: Optional[int] = None):
        lo = np.asarray(self.lower_bound, dtype=float)
        hi = np.asarray(self.upper_bound, dtype=float)
        if dim is None:
            if lo.ndim == 0 and hi.ndim == 0:
                raise ValueError("scalar bounds need an explicit dimension")
            dim = max(lo.size, hi.size)
        for b in (lo, hi):
            if b.ndim and b.size != dim:
                raise ValueError(f"bounds have dimension {b.size}, expected {dim}")
        lo = np.broadcast_to(lo, (dim,)).astype(float)
        hi = np.broadcast_to(hi, (dim,)).astype(float)
        if not np.all(hi > lo):
            raise ValueError("upper_bound must exceed lower_bound in every dimension")
        return lo, hi


@dataclass
class GwoState:
    """Snapshot of the pack after an iteration (passed to callbacks)."""

    positions: np.ndarray
    fitness: np.ndarray
    alpha: tuple
    beta: tuple
    delta: tuple
    a: float
    iteration: int


@dataclass
class GwoResult:
    position: np.ndarray
    fitness: float
    trace: np.ndarray          # alpha fitness after each iteration
    a_values: np.ndarray       # coefficient used in each iteration


def coefficient_schedule(t: int, t_max: int) -> float:
    if t_max < 1 or not 0 <= t <= t_max:
        raise ValueError(f"need 0 <= t <= t_max and t_max >= 1, got t={t}, t_max={t_max}")
    return 2.0 * (1.0 - t / t_max)


def leader_step(wolf, leaders, a: float, rng=None, *, r1=None, r2=None,
                lower=None, upper=None) -> np.ndarray:
    """Move one wolf (d-vector) or a stack of wolves (m, d) towards the leaders.

    Parameters
    ----------
    wolf : ndarray, shape (d,) or (m, d)
    leaders : ndarray, shape (3, d)
        Alpha, beta and delta positions.
    a : float
    rng : numpy Generator, optional
        Source of ``r1, r2``; drawn as ``rng.random((2, 3) + wolf.shape)``.
    r1, r2 : ndarray, shape (3,) + wolf.shape, optional
        Explicit random numbers, overriding ``rng``.
    lower, upper : array_like, optional
        Box to clamp the result into.
    """
    x = np.asarray(wolf, dtype=float)
    lead = np.asarray(leaders, dtype=float).reshape((3,) + (1,) * (x.ndim - 1) + x.shape[-1:])
    if r1 is None or r2 is None:
        r = rng.random((2, 3) + x.shape)
        r1 = r[0] if r1 is None else r1
        r2 = r[1] if r2 is None else r2
    A = 2.0 * a * np.asarray(r1) - a
    C = 2.0 * np.asarray(r2)
    dist = np.abs(C * lead - x)
    guided = lead - A * dist
    out = (guided[0] + guided[1] + guided[2]) / 3.0
    if lower is not None or upper is not None:
        out = np.clip(out, lower, upper)
    return out


def _evaluate(cost, X: np.ndarray, vectorized: bool) -> np.ndarray:
    if vectorized:
        f = np.asarray(cost(X), dtype=float).reshape(-1)
    else:
        f = np.array([float(cost(x)) for x in X])
    bad = ~np.isfinite(f)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise NonFiniteCostError(X[i].copy(), float(f[i]))
    return f


def _state(X, fit, order, a, t) -> GwoState:
    leaders = [(X[i].copy(), float(fit[i])) for i in order[:3]]
    return GwoState(X.copy(), fit.copy(), leaders[0], leaders[1], leaders[2], a, t)


def gwo_optimize(cost: Callable, cfg: GwoConfig, dim: Optional[int] = None, *,
                 vectorized: bool = False,
                 callback: Optional[Callable[[GwoState], None]] = None) -> GwoResult:
    """Minimise ``cost`` over the box given by ``cfg``.

    Parameters
    ----------
    cost : callable
        ``cost(x) -> float`` for a d-vector, or with ``vectorized=True``
        ``cost(X) -> (m,)`` for an (m, d) stack of positions.
    cfg : GwoConfig
    dim : int, optional
        Search dimension; needed only when ``cfg`` bounds are scalars.
    callback : callable, optional
        Called with a :class:`GwoState` after every iteration.

    Returns
    -------
    GwoResult
        The alpha wolf at the end of the run and the per-iteration alpha fitness.
    """
    lo, hi = cfg.bounds(dim)
    d = lo.size
    rng = np.random.default_rng(cfg.seed)
    X = lo + rng.random((cfg.population, d)) * (hi - lo)
    fit = _evaluate(cost, X, vectorized)
    order = np.argsort(fit, kind="stable")
    T = cfg.iterations
    trace = np.empty(T)
    a_values = np.empty(T)
    for t in range(T):
        a = coefficient_schedule(t, T)
        leaders = X[order[:3]].copy()
        followers = np.sort(order[3:])
        X[followers] = leader_step(X[followers], leaders, a, rng, lower=lo, upper=hi)
        fit[followers] = _evaluate(cost, X[followers], vectorized)
        order = np.argsort(fit, kind="stable")
        trace[t] = fit[order[0]]
        a_values[t] = a
        if callback is not None:
            callback(_state(X, fit, order, a, t))
    best = order[0]
    logger.debug("gwo finished: %d iterations, best=%.6g", T, fit[best])
    return GwoResult(X[best].copy(), float(fit[best]), trace, a_values)


def _unpack(V: np.ndarray, hidden_dim: int):
    h, k = hidden_dim, hidden_dim * N_FEATURES
    m = V.shape[0]
    return (V[:, :k].reshape(m, h, N_FEATURES), V[:, k:k + h], V[:, k + h:k + 2 * h], V[:, -1])


def batch_mlp_mse(V, hidden_dim: int, X, y, hidden_activation=Activation.TANH,
                  output_activation=Activation.IDENTITY, chunk_elems: int = 2_000_000) -> np.ndarray:
    """Training MSE of many flat parameter vectors at once.

    ``V`` has shape (m, n_params); the result has shape (m,). Each row is
    computed independently, so results do not depend on chunking.
    """
    from .mlp import activation_eval

    V = np.atleast_2d(np.asarray(V, dtype=float))
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    step = max(1, chunk_elems // max(1, n * hidden_dim))
    out = np.empty(V.shape[0])
    for s in range(0, V.shape[0], step):
        w1, b1, w2, b2 = _unpack(V[s:s + step], hidden_dim)
        hid = activation_eval(hidden_activation, np.matmul(X, w1.transpose(0, 2, 1)) + b1[:, None, :])
        pred = activation_eval(output_activation, np.matmul(hid, w2[:, :, None])[..., 0] + b2[:, None])
        err = pred - y
        out[s:s + step] = np.mean(err * err, axis=1)
    return out


def train_mlp_gwo(hidden_dim: int, train: Dataset, cfg: GwoConfig,
                  hidden_activation=Activation.TANH, output_activation=Activation.IDENTITY,
                  callback=None):
    """Search the flattened network weights with GWO, minimising training MSE.

    Returns
    -------
    params : MlpParams
        Network built from the alpha position.
    result : GwoResult
    """
    d = param_count(hidden_dim)
    lo, hi = cfg.bounds(d)
    if lo.size != d:
        raise ValueError(f"search dimension {lo.size} != parameter count {d}")
    X, y = train.features, train.targets

    def cost(V):
        return batch_mlp_mse(V, hidden_dim, X, y, hidden_activation, output_activation)

    result = gwo_optimize(cost, cfg, d, vectorized=True, callback=callback)
    params = vector_to_param(result.position, hidden_dim, hidden_activation, output_activation)
    return params, result


def write_trace_csv(result: GwoResult, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("iteration,alpha_fitness,a\n")
        for t, (f, a) in enumerate(zip(result.trace, result.a_values)):
            fh.write(f"{t},{float(f)!r},{float(a)!r}\n")


__all__ = [
    "GwoConfig", "GwoResult", "GwoState", "NonFiniteCostError", "batch_mlp_mse",
    "coefficient_schedule", "gwo_optimize", "leader_step", "train_mlp_gwo", "write_trace_csv",
]
