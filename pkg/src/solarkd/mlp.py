"""Single-hidden-layer perceptron with analytic gradients.

The network computes ``K(b2 + w2 @ Q(b1 + w1 @ x))`` where ``Q`` is the
hidden activation and ``K`` the output activation. Note that tanh here is the
ordinary hyperbolic tangent ``(e^x - e^-x) / (e^x + e^-x)``.

Flat parameter layout (used by the GWO trainer and the text format)::

    w1 row-major (hidden_dim * 5) | b1 (hidden_dim) | w2 (hidden_dim) | b2 (1)
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataio import N_FEATURES, Dataset

logger = logging.getLogger(__name__)


class Activation(str, enum.Enum):
    TANH = "tanh"
    SIGMOID = "sigmoid"
    IDENTITY = "identity"


class DivergenceError(RuntimeError):
    def __init__(self, epoch: int, loss: float):
        super().__init__(f"training diverged at epoch {epoch} (loss={loss})")
        self.epoch = epoch


def _sigmoid(x):
    # split on sign so exp never overflows
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def activation_eval(kind, x):
    kind = Activation(kind)
    if kind is Activation.TANH:
        return np.tanh(x)
    if kind is Activation.SIGMOID:
        r = _sigmoid(np.atleast_1d(x))
        return r if np.ndim(x) else float(r[0])
    return np.asarray(x, dtype=float) if np.ndim(x) else float(x)


def _activation_and_slope(kind: Activation, z: np.ndarray):
    if kind is Activation.TANH:
        a = np.tanh(z)
        return a, 1.0 - a * a
    if kind is Activation.SIGMOID:
        a = _sigmoid(z)
        return a, a * (1.0 - a)
    return z, np.ones_like(z)


@dataclass(frozen=True)
class MlpParams:
    """Weights and biases of a 5-input, 1-output perceptron.

    Attributes
    ----------
    w1 : ndarray, shape (hidden_dim, 5)
    b1 : ndarray, shape (hidden_dim,)
    w2 : ndarray, shape (1, hidden_dim)
    b2 : float
    hidden_activation, output_activation : Activation
    """

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float
    hidden_activation: Activation = Activation.TANH
    output_activation: Activation = Activation.IDENTITY

    def __post_init__(self):
        w1 = np.array(self.w1, dtype=float)
        h = w1.shape[0]
        b1 = np.array(self.b1, dtype=float).reshape(-1)
        w2 = np.array(self.w2, dtype=float).reshape(1, -1)
        if w1.ndim != 2 or w1.shape[1] != N_FEATURES:
            raise ValueError(f"w1 must have shape (hidden_dim, {N_FEATURES}), got {w1.shape}")
        if b1.shape != (h,) or w2.shape != (1, h):
            raise ValueError("b1 / w2 sizes do not match hidden_dim")
        if not (np.all(np.isfinite(w1)) and np.all(np.isfinite(b1)) and np.all(np.isfinite(w2))
                and np.isfinite(self.b2)):
            raise ValueError("network parameters must be finite")
        for arr in (w1, b1, w2):
            arr.setflags(write=False)
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "b1", b1)
        object.__setattr__(self, "w2", w2)
        object.__setattr__(self, "b2", float(self.b2))
        object.__setattr__(self, "hidden_activation", Activation(self.hidden_activation))
        object.__setattr__(self, "output_activation", Activation(self.output_activation))

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def n_params(self) -> int:
        return param_count(self.hidden_dim)

    def __eq__(self, other):
        if not isinstance(other, MlpParams):
            return NotImplemented
        return (np.array_equal(self.w1, other.w1) and np.array_equal(self.b1, other.b1)
                and np.array_equal(self.w2, other.w2) and self.b2 == other.b2
                and self.hidden_activation == other.hidden_activation
                and self.output_activation == other.output_activation)

    __hash__ = None


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 2000
    seed: int = 0
    repetitions: int = 3

    def __post_init__(self):
        if not self.learning_rate >= 0:
            raise ValueError("learning_rate must be non-negative")
        if self.epochs < 1 or self.repetitions < 1:
            raise ValueError("epochs and repetitions must be >= 1")


def param_count(hidden_dim: int) -> int:
    return hidden_dim * N_FEATURES + 2 * hidden_dim + 1


def mlp_init(hidden_dim: int, seed: int = 0, hidden_activation=Activation.TANH,
             output_activation=Activation.IDENTITY) -> MlpParams:
    """Uniform ``+-1/sqrt(fan_in)`` weights, zero biases."""
    if not 1 <= hidden_dim <= 1024:
        raise ValueError(f"hidden_dim must be in 1..1024, got {hidden_dim}")
    rng = np.random.default_rng(seed)
    lim1 = 1.0 / np.sqrt(N_FEATURES)
    lim2 = 1.0 / np.sqrt(hidden_dim)
    w1 = rng.uniform(-lim1, lim1, size=(hidden_dim, N_FEATURES))
    w2 = rng.uniform(-lim2, lim2, size=(1, hidden_dim))
    return MlpParams(w1, np.zeros(hidden_dim), w2, 0.0, hidden_activation, output_activation)


def mlp_forward(params: MlpParams, x):
    """Network output for one 5-vector (returns float) or an (n, 5) batch."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != N_FEATURES or x.ndim > 2:
        raise ValueError(f"expected input of width {N_FEATURES}, got shape {x.shape}")
    hidden = activation_eval(params.hidden_activation, x @ params.w1.T + params.b1)
    out = activation_eval(params.output_activation, hidden @ params.w2[0] + params.b2)
    return float(out) if x.ndim == 1 else np.asarray(out)


def mlp_mse(params: MlpParams, data: Dataset) -> float:
    err = mlp_forward(params, data.features) - data.targets
    return float(np.mean(err * err))


def _loss_and_gradient(params: MlpParams, X: np.ndarray, y: np.ndarray):
    n = X.shape[0]
    z1 = X @ params.w1.T + params.b1
    hid, dhid = _activation_and_slope(params.hidden_activation, z1)
    z2 = hid @ params.w2[0] + params.b2
    out, dout = _activation_and_slope(params.output_activation, z2)
    err = out - y
    delta2 = (2.0 / n) * err * dout                       # (n,)
    g_w2 = delta2 @ hid                                   # (h,)
    g_b2 = delta2.sum()
    delta1 = np.outer(delta2, params.w2[0]) * dhid        # (n, h)
    g_w1 = delta1.T @ X                                   # (h, 5)
    g_b1 = delta1.sum(axis=0)
    grad = np.concatenate([g_w1.ravel(), g_b1, g_w2, [g_b2]])
    return float(np.mean(err * err)), grad


def backprop_gradient(params: MlpParams, X, y=None) -> np.ndarray:
    """Gradient of the batch mean squared error, in :func:`param_to_vector` layout.

    ``X`` may be a :class:`Dataset` (targets taken from it) or a feature matrix
    paired with ``y``.
    """
    if isinstance(X, Dataset):
        X, y = X.features, X.targets
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.shape[0] == 0:
        raise ValueError("empty batch")
    return _loss_and_gradient(params, X, y)[1]


def param_to_vector(params: MlpParams) -> np.ndarray:
    return np.concatenate([params.w1.ravel(), params.b1, params.w2[0], [params.b2]])


def vector_to_param(v, hidden_dim: int, hidden_activation=Activation.TANH,
                    output_activation=Activation.IDENTITY) -> MlpParams:
    v = np.asarray(v, dtype=float).reshape(-1)
    expected = param_count(hidden_dim)
    if v.size != expected:
        raise ValueError(f"parameter vector has length {v.size}, expected {expected} "
                         f"for hidden_dim={hidden_dim}")
    h, k = hidden_dim, hidden_dim * N_FEATURES
    return MlpParams(v[:k].reshape(h, N_FEATURES), v[k:k + h], v[k + h:k + 2 * h].reshape(1, h),
                     v[-1], hidden_activation, output_activation)


def with_vector(params: MlpParams, v) -> MlpParams:
    return vector_to_param(v, params.hidden_dim, params.hidden_activation,
                           params.output_activation)


def train_mlp_gd(init: MlpParams, train: Dataset, cfg: TrainConfig):
    """Full-batch gradient descent on the training MSE.

    Returns
    -------
    params : MlpParams
    trace : ndarray, shape (epochs,)
        Training MSE after each update.
    """
    theta = param_to_vector(init)
    X, y = train.features, train.targets
    trace = np.empty(cfg.epochs)
    params = init
    _, grad = _loss_and_gradient(params, X, y)
    for epoch in range(cfg.epochs):
        theta = theta - cfg.learning_rate * grad
        if not np.all(np.isfinite(theta)):
            raise DivergenceError(epoch, float("nan"))
        params = with_vector(init, theta)
        with np.errstate(over="ignore", invalid="ignore"):
            loss, grad = _loss_and_gradient(params, X, y)
        if not np.isfinite(loss):
            raise DivergenceError(epoch, loss)
        trace[epoch] = loss
    return params, trace


def train_mlp_best_of(hidden_dim: int, train: Dataset, cfg: TrainConfig,
                      hidden_activation=Activation.TANH,
                      output_activation=Activation.IDENTITY):
    """Run ``cfg.repetitions`` seeded trainings and keep the lowest final training MSE.

    Repetition ``r`` initialises with seed ``cfg.seed + r``.
    """
    best = None
    for r in range(cfg.repetitions):
        init = mlp_init(hidden_dim, cfg.seed + r, hidden_activation, output_activation)
        params, trace = train_mlp_gd(init, train, cfg)
        logger.debug("hidden=%d rep=%d final mse=%.6g", hidden_dim, r, trace[-1])
        if best is None or trace[-1] < best[1][-1]:
            best = (params, trace)
    return best


def save_mlp(params: MlpParams, path) -> None:
    """Write a plain-text ``key = value`` header followed by the flat parameter vector."""
    lines = [
        "format = solarkd-mlp-1",
        f"input_dim = {N_FEATURES}",
        f"hidden_dim = {params.hidden_dim}",
        f"hidden_activation = {params.hidden_activation.value}",
        f"output_activation = {params.output_activation.value}",
        "layout = w1_rows,b1,w2,b2",
        f"n_params = {params.n_params}",
        "params =",
    ]
    lines += [repr(float(v)) for v in param_to_vector(params)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_mlp(path) -> MlpParams:
    header, values = {}, []
    in_params = False
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if in_params:
            values.append(float(line))
            continue
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key == "params":
            in_params = True
        else:
            header[key] = val
    if header.get("format") != "solarkd-mlp-1":
        raise ValueError(f"{path}: not a solarkd MLP file")
    return vector_to_param(values, int(header["hidden_dim"]), header["hidden_activation"],
                           header["output_activation"])


__all__ = [
    "Activation", "DivergenceError", "MlpParams", "TrainConfig", "activation_eval",
    "backprop_gradient", "load_mlp", "mlp_forward", "mlp_init", "mlp_mse", "param_count",
    "param_to_vector", "save_mlp", "train_mlp_best_of", "train_mlp_gd", "vector_to_param",
    "with_vector",
]
