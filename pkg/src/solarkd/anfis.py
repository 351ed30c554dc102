"""Grid-partition first-order Takagi-Sugeno ANFIS with hybrid learning.

Five inputs with two membership functions each give 32 rules, enumerated
as ``itertools.product(range(2), repeat=5)`` (first input most significant).
Rule ``r`` fires with the product of its five memberships and outputs
``p_r . x + r_r``; the model output is the firing-weighted average.

Training alternates a damped least-squares solve for the 32 x 6 linear
consequents with one gradient-descent step on the premise parameters.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import scipy.linalg

from .dataio import N_FEATURES, Dataset

logger = logging.getLogger(__name__)

MF_KINDS = ("triangular", "trapezoidal", "gbell", "gaussian")
N_PARAMS = {"triangular": 3, "trapezoidal": 4, "gbell": 3, "gaussian": 2}
MFS_PER_INPUT = 2
N_RULES = MFS_PER_INPUT ** N_FEATURES
RULE_TABLE = np.array(list(itertools.product(range(MFS_PER_INPUT), repeat=N_FEATURES)))
STARVATION_EPS = 1e-12
LSE_DAMPING = 1e-8
MIN_WIDTH = 1e-6


class SingularSystemError(np.linalg.LinAlgError):
    pass


def _check_kind(kind: str) -> str:
    kind = kind.lower()
    if kind not in N_PARAMS:
        raise ValueError(f"unknown membership family {kind!r}; expected one of {MF_KINDS}")
    return kind


def validate_mf(kind: str, params) -> None:
    kind = _check_kind(kind)
    p = np.asarray(params, dtype=float)
    if p.shape[-1] != N_PARAMS[kind]:
        raise ValueError(f"{kind} takes {N_PARAMS[kind]} parameters, got {p.shape[-1]}")
    if not np.all(np.isfinite(p)):
        raise ValueError("membership parameters must be finite")
    if kind in ("triangular", "trapezoidal"):
        if np.any(np.diff(p, axis=-1) < 0):
            raise ValueError(f"{kind} parameters must be non-decreasing, got {p}")
    elif kind == "gbell":
        if np.any(p[..., 0] <= 0) or np.any(p[..., 1] <= 0):
            raise ValueError("gbell needs a > 0 and b > 0")
    elif np.any(p[..., 1] <= 0):
        raise ValueError("gaussian needs sigma > 0")


@dataclass(frozen=True)
class MembershipFunction:
    """A single membership function, e.g. ``MembershipFunction("gbell", (2, 1, 0))``.

    Parameter order: triangular (a, b, c), trapezoidal (a, b, c, d),
    gbell (a, b, c), gaussian (c, sigma).
    """

    kind: str
    params: tuple

    def __post_init__(self):
        object.__setattr__(self, "kind", _check_kind(self.kind))
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))
        validate_mf(self.kind, self.params)

    def __call__(self, x):
        return mf_eval(self, x)


def _ramp_up(x, lo, hi):
    # (x - lo) / (hi - lo), with a vertical edge when lo == hi
    width = hi - lo
    safe = np.where(width > 0, width, 1.0)
    return np.where(width > 0, (x - lo) / safe, np.where(x >= hi, 1.0, 0.0))


def _ramp_down(x, lo, hi):
    width = hi - lo
    safe = np.where(width > 0, width, 1.0)
    return np.where(width > 0, (hi - x) / safe, np.where(x <= lo, 1.0, 0.0))


def mf_values(kind: str, params, x) -> np.ndarray:
    """Evaluate membership, broadcasting ``params[..., k]`` against ``x``."""
    p = np.asarray(params, dtype=float)
    x = np.asarray(x, dtype=float)
    if kind == "triangular":
        a, b, c = p[..., 0], p[..., 1], p[..., 2]
        mu = np.minimum(_ramp_up(x, a, b), _ramp_down(x, b, c))
    elif kind == "trapezoidal":
        a, b, c, d = (p[..., i] for i in range(4))
        mu = np.minimum(np.minimum(_ramp_up(x, a, b), 1.0), _ramp_down(x, c, d))
    elif kind == "gbell":
        a, b, c = p[..., 0], p[..., 1], p[..., 2]
        with np.errstate(over="ignore"):
            mu = 1.0 / (1.0 + np.abs((x - c) / a) ** (2.0 * b))
    else:
        c, s = p[..., 0], p[..., 1]
        mu = np.exp(-((x - c) ** 2) / (2.0 * s * s))
    return np.clip(mu, 0.0, 1.0)


def mf_eval(mf: MembershipFunction, x):
    out = mf_values(mf.kind, mf.params, x)
    return float(out) if np.ndim(out) == 0 else out


def mf_partials(kind: str, params, x) -> np.ndarray:
    """Derivatives of membership w.r.t. each parameter, shape ``broadcast + (k,)``.

    Piecewise-linear families use the one-sided slope of the active piece;
    kinks are measure-zero and take the value of the piece on their left.
    """
    p = np.asarray(params, dtype=float)
    x = np.asarray(x, dtype=float)
    if kind == "gaussian":
        c, s = p[..., 0], p[..., 1]
        mu = np.exp(-((x - c) ** 2) / (2.0 * s * s))
        return np.stack([mu * (x - c) / s**2, mu * (x - c) ** 2 / s**3], axis=-1)
    if kind == "gbell":
        a, b, c = p[..., 0], p[..., 1], p[..., 2]
        u = np.abs((x - c) / a)
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            z = u ** (2.0 * b)
            mu = 1.0 / (1.0 + z)
            dmu_dz = -mu * mu
            dz_da = -2.0 * b * z / a
            dz_db = np.where(u > 0, 2.0 * np.log(np.where(u > 0, u, 1.0)) * z, 0.0)
            dz_dc = np.where(x != c, -2.0 * b * z / np.where(x != c, x - c, 1.0), 0.0)
        out = np.stack([dmu_dz * dz_da, dmu_dz * dz_db, dmu_dz * dz_dc], axis=-1)
        return np.nan_to_num(out, nan=0.0, posinf=0.0, neginf=0.0)
    if kind == "triangular":
        a, b, c = p[..., 0], p[..., 1], p[..., 2]
        zeros = np.zeros(np.broadcast(x, a).shape)
        up = (x > a) & (x <= b) & (b > a)
        down = (x > b) & (x < c) & (c > b)
        lw = np.where(b > a, b - a, 1.0)
        rw = np.where(c > b, c - b, 1.0)
        da = np.where(up, (x - b) / lw**2, zeros)
        db = np.where(up, -(x - a) / lw**2, np.where(down, (c - x) / rw**2, zeros))
        dc = np.where(down, (x - b) / rw**2, zeros)
        return np.stack([da, db, dc], axis=-1)
    a, b, c, d = (p[..., i] for i in range(4))
    zeros = np.zeros(np.broadcast(x, a).shape)
    up = (x > a) & (x < b) & (b > a)
    down = (x > c) & (x < d) & (d > c)
    lw = np.where(b > a, b - a, 1.0)
    rw = np.where(d > c, d - c, 1.0)
    da = np.where(up, (x - b) / lw**2, zeros)
    db = np.where(up, -(x - a) / lw**2, zeros)
    dc = np.where(down, (d - x) / rw**2, zeros)
    dd = np.where(down, (x - c) / rw**2, zeros)
    return np.stack([da, db, dc, dd], axis=-1)


def project_premise(kind: str, premise: np.ndarray) -> np.ndarray:
    """Restore family constraints after an unconstrained update."""
    p = np.array(premise, dtype=float)
    if kind in ("triangular", "trapezoidal"):
        p.sort(axis=-1)
    elif kind == "gbell":
        p[..., 0] = np.maximum(p[..., 0], MIN_WIDTH)
        p[..., 1] = np.maximum(p[..., 1], MIN_WIDTH)
    else:
        p[..., 1] = np.maximum(p[..., 1], MIN_WIDTH)
    return p


@dataclass(frozen=True)
class AnfisModel:
    """Premise parameters, shape (5, 2, k), and consequents, shape (32, 6).

    Consequent row ``r`` holds ``(p1..p5, r)`` of rule ``r``.
    """

    kind: str
    premise: np.ndarray
    consequents: np.ndarray

    def __post_init__(self):
        kind = _check_kind(self.kind)
        prem = np.array(self.premise, dtype=float)
        cons = np.array(self.consequents, dtype=float)
        if prem.shape != (N_FEATURES, MFS_PER_INPUT, N_PARAMS[kind]):
            raise ValueError(f"premise must have shape (5, 2, {N_PARAMS[kind]}), got {prem.shape}")
        if cons.shape != (N_RULES, N_FEATURES + 1):
            raise ValueError(f"consequents must have shape ({N_RULES}, 6), got {cons.shape}")
        validate_mf(kind, prem)
        prem.setflags(write=False)
        cons.setflags(write=False)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "premise", prem)
        object.__setattr__(self, "consequents", cons)

    @property
    def n_rules(self) -> int:
        return N_RULES

    def membership(self, i: int, m: int) -> MembershipFunction:
        return MembershipFunction(self.kind, self.premise[i, m])

    def __eq__(self, other):
        if not isinstance(other, AnfisModel):
            return NotImplemented
        return (self.kind == other.kind and np.array_equal(self.premise, other.premise)
                and np.array_equal(self.consequents, other.consequents))

    __hash__ = None


@dataclass(frozen=True)
class AnfisTrainConfig:
    epochs: int = 500
    premise_learning_rate: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if not self.premise_learning_rate > 0:
            raise ValueError("premise_learning_rate must be positive")


@dataclass
class ForwardPass:
    output: np.ndarray        # (n,)
    firing: np.ndarray        # (n, 32)
    normalized: np.ndarray    # (n, 32)
    starved: np.ndarray       # (n,) bool
    memberships: np.ndarray   # (n, 5, 2)
    rule_outputs: np.ndarray  # (n, 32)


def anfis_init_grid(train: Dataset, kind: str = "gaussian", seed: int = 0) -> AnfisModel:
    """Two evenly spaced MFs per input over the training range, zero consequents.

    Centres sit at ``min + range/3`` and ``min + 2 range/3``. Base half-width
    ``w = range/2``; triangles use it directly, trapezoids add a core of
    ``w/5`` either side, gaussians and bells are sized to cross at 0.5 midway
    between the centres. ``seed`` is accepted for interface symmetry; the
    layout is deterministic.
    """
    kind = _check_kind(kind)
    X = train.features
    lo, hi = X.min(axis=0), X.max(axis=0)
    rng_ = hi - lo
    bad = np.flatnonzero(~(rng_ > 0))
    if bad.size:
        raise ValueError(f"input {train.columns[bad[0]]!r} has a degenerate range")
    centres = np.stack([lo + rng_ / 3.0, lo + 2.0 * rng_ / 3.0], axis=1)  # (5, 2)
    w = (rng_ / 2.0)[:, None] * np.ones((1, MFS_PER_INPUT))
    half_gap = (rng_ / 6.0)[:, None] * np.ones((1, MFS_PER_INPUT))
    if kind == "triangular":
        prem = np.stack([centres - w, centres, centres + w], axis=-1)
    elif kind == "trapezoidal":
        prem = np.stack([centres - w, centres - w / 5, centres + w / 5, centres + w], axis=-1)
    elif kind == "gbell":
        prem = np.stack([half_gap, np.full_like(w, 2.0), centres], axis=-1)
    else:
        prem = np.stack([centres, half_gap / np.sqrt(2.0 * np.log(2.0))], axis=-1)
    return AnfisModel(kind, prem, np.zeros((N_RULES, N_FEATURES + 1)))


def _memberships(model: AnfisModel, X: np.ndarray) -> np.ndarray:
    # (n, 5, 1) against (5, 2, k) -> (n, 5, 2)
    return mf_values(model.kind, model.premise[None], X[:, :, None])


def _rule_factors(mu: np.ndarray) -> np.ndarray:
    # (n, 5, 32): membership of input i in the MF rule r uses
    return mu[:, np.arange(N_FEATURES)[:, None], RULE_TABLE.T]


def anfis_forward_batch(model: AnfisModel, X) -> ForwardPass:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    mu = _memberships(model, X)
    firing = np.prod(_rule_factors(mu), axis=1)
    total = firing.sum(axis=1)
    starved = total < STARVATION_EPS
    safe = np.where(starved, 1.0, total)
    norm = np.where(starved[:, None], 0.0, firing / safe[:, None])
    rule_out = X @ model.consequents[:, :N_FEATURES].T + model.consequents[:, N_FEATURES]
    out = np.sum(norm * rule_out, axis=1)
    return ForwardPass(out, firing, norm, starved, mu, rule_out)


def anfis_forward(model: AnfisModel, x):
    """Evaluate one input vector.

    Returns
    -------
    output : float
    firing, normalized_firing : ndarray, shape (32,)
    starved : bool
        True when total firing is below 1e-12; the output is then 0.
    """
    fp = anfis_forward_batch(model, np.asarray(x, dtype=float).reshape(1, N_FEATURES))
    return float(fp.output[0]), fp.firing[0], fp.normalized[0], bool(fp.starved[0])


def anfis_predict(model: AnfisModel, X) -> np.ndarray:
    return anfis_forward_batch(model, X).output


def anfis_mse(model: AnfisModel, data: Dataset) -> float:
    err = anfis_predict(model, data.features) - data.targets
    return float(np.mean(err * err))


def design_matrix(normalized: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Rows ``[wbar_r * x_1..x_5, wbar_r]`` for every rule, shape (n, 192)."""
    ext = np.column_stack([X, np.ones(X.shape[0])])
    return (normalized[:, :, None] * ext[:, None, :]).reshape(X.shape[0], -1)


def lse_consequents(model: AnfisModel, train: Dataset, damping: float = LSE_DAMPING) -> AnfisModel:
    """Least-squares consequents for fixed premises.

    Solves ``(Phi^T Phi + damping I) theta = Phi^T y`` by Cholesky. Starved
    rows are left out of the system.
    """
    fp = anfis_forward_batch(model, train.features)
    keep = ~fp.starved
    if not keep.any():
        raise SingularSystemError("every training row is starved; no system to solve")
    phi = design_matrix(fp.normalized[keep], train.features[keep])
    gram = phi.T @ phi
    gram[np.diag_indices_from(gram)] += damping
    rhs = phi.T @ train.targets[keep]
    try:
        theta = scipy.linalg.cho_solve(scipy.linalg.cho_factor(gram), rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"consequent system is singular: {exc}") from exc
    if not np.all(np.isfinite(theta)):
        raise SingularSystemError("consequent solve produced non-finite values")
    return replace(model, consequents=theta.reshape(N_RULES, N_FEATURES + 1))


def premise_gradient(model: AnfisModel, train: Dataset) -> np.ndarray:
    """Gradient of training MSE w.r.t. the premise parameters, shape (5, 2, k)."""
    X, y = train.features, train.targets
    n = X.shape[0]
    fp = anfis_forward_batch(model, X)
    keep = ~fp.starved
    factors = _rule_factors(fp.memberships)                        # (n, 5, 32)
    total = np.where(fp.starved, 1.0, fp.firing.sum(axis=1))
    dL_dy = np.where(keep, 2.0 * (fp.output - y) / n, 0.0)       # (n,)
    # dy/dw_r = (f_r - y) / sum(w)
    g_rule = dL_dy[:, None] * (fp.rule_outputs - fp.output[:, None]) / total[:, None]
    grad_mu = np.zeros_like(fp.memberships)                        # (n, 5, 2)
    for i in range(N_FEATURES):
        others = np.prod(np.delete(factors, i, axis=1), axis=1)   # (n, 32)
        contrib = g_rule * others
        for m in range(MFS_PER_INPUT):
            grad_mu[:, i, m] = contrib[:, RULE_TABLE[:, i] == m].sum(axis=1)
    partials = mf_partials(model.kind, model.premise[None], X[:, :, None])  # (n, 5, 2, k)
    return np.einsum("nim,nimk->imk", grad_mu, partials)


def premise_gradient_step(model: AnfisModel, train: Dataset, lr: float) -> AnfisModel:
    if lr == 0:
        return model
    step = model.premise - lr * premise_gradient(model, train)
    return replace(model, premise=project_premise(model.kind, step))


def train_anfis_hybrid(init: AnfisModel, train: Dataset, cfg: AnfisTrainConfig):
    """Hybrid learning: per epoch, LSE on consequents then one premise gradient step.

    Returns
    -------
    model : AnfisModel
        Model after the final epoch's consequent solve (premises of that epoch).
    trace : ndarray, shape (epochs,)
        Training MSE right after each consequent solve.
    """
    model = init
    trace = np.empty(cfg.epochs)
    for epoch in range(cfg.epochs):
        model = lse_consequents(model, train)
        trace[epoch] = anfis_mse(model, train)
        if epoch + 1 < cfg.epochs:
            model = premise_gradient_step(model, train, cfg.premise_learning_rate)
    logger.debug("anfis %s: mse %.6g -> %.6g", init.kind, trace[0], trace[-1])
    return model, trace


def save_anfis(model: AnfisModel, path) -> None:
    """Plain-text format: header lines, one premise line per (input, MF), 32 consequent rows."""
    lines = [
        "format = solarkd-anfis-1",
        f"mf_kind = {model.kind}",
        f"inputs = {N_FEATURES}",
        f"mfs_per_input = {MFS_PER_INPUT}",
        f"rules = {N_RULES}",
        "premise =",
    ]
    for i in range(N_FEATURES):
        for m in range(MFS_PER_INPUT):
            lines.append(f"{i} {m} " + " ".join(repr(float(v)) for v in model.premise[i, m]))
    lines.append("consequents =")
    for row in model.consequents:
        lines.append(" ".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_anfis(path) -> AnfisModel:
    header, premise, cons = {}, {}, []
    section = None
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.endswith("=") and line[:-1].strip() in ("premise", "consequents"):
            section = line[:-1].strip()
            continue
        if section is None:
            key, _, val = line.partition("=")
            header[key.strip()] = val.strip()
        elif section == "premise":
            parts = line.split()
            premise[int(parts[0]), int(parts[1])] = [float(v) for v in parts[2:]]
        else:
            cons.append([float(v) for v in line.split()])
    if header.get("format") != "solarkd-anfis-1":
        raise ValueError(f"{path}: not a solarkd ANFIS file")
    kind = header["mf_kind"]
    prem = np.array([[premise[i, m] for m in range(MFS_PER_INPUT)] for i in range(N_FEATURES)])
    return AnfisModel(kind, prem, np.array(cons))
