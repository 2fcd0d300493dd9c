"""MAE loss, Adam, and the mini-batch training loop."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import tensor
from .datagen import Dataset
from .errors import ConfigError, DivergedError, ShapeError
from .network import Network, backward, forward


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 0.001
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-7
    shuffle_seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        for name in ("learning_rate", "adam_beta1", "adam_beta2", "adam_epsilon"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1)")


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0

    @classmethod
    def for_params(cls, params) -> "AdamState":
        return cls(m=[np.zeros_like(p) for p in params], v=[np.zeros_like(p) for p in params])


@dataclass
class TrainHistory:
    """Per-epoch mean training MAE; truncated at the epoch a divergence occurred."""

    losses: list[float] = field(default_factory=list)
    diverged: bool = False
    reason: str = ""

    @property
    def final_loss(self) -> float:
        if self.diverged or not self.losses:
            return math.inf
        return self.losses[-1]


def _check_pair(yhat: np.ndarray, y: np.ndarray) -> None:
    if yhat.shape != y.shape or yhat.size == 0:
        raise ShapeError(f"prediction shape {yhat.shape} vs target shape {y.shape}")


def mae_loss(yhat, y) -> float:
    yhat = np.asarray(yhat, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_pair(yhat, y)
    return float(np.mean(np.abs(yhat - y)))


def mae_grad(yhat, y) -> np.ndarray:
    """Subgradient of :func:`mae_loss` w.r.t. ``yhat``; zero at ties."""
    yhat = np.asarray(yhat, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_pair(yhat, y)
    return np.sign(yhat - y) / yhat.size


def adam_step(params: list[np.ndarray], grads, state: AdamState, cfg: TrainConfig) -> list[np.ndarray]:
    """One bias-corrected Adam update. Returns new parameter arrays; ``state`` is advanced in place."""
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ShapeError("params, grads and Adam state must align")
    b1, b2, eps = cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon
    state.t += 1
    c1 = 1.0 - b1**state.t
    c2 = 1.0 - b2**state.t
    out = []
    for i, (p, g) in enumerate(zip(params, grads)):
        if p.shape != g.shape:
            raise ShapeError(f"gradient shape {g.shape} != parameter shape {p.shape}")
        m = b1 * state.m[i] + (1.0 - b1) * g
        v = b2 * state.v[i] + (1.0 - b2) * (g * g)
        # an infinite second moment would silently zero the step, so it counts as divergence
        if not (math.isfinite(np.add.reduce(m, axis=None)) and math.isfinite(np.add.reduce(v, axis=None))):
            raise DivergedError("non-finite Adam moment estimate")
        state.m[i], state.v[i] = m, v
        new = p - cfg.learning_rate * (m / c1) / (np.sqrt(v / c2) + eps)
        if not math.isfinite(np.add.reduce(new, axis=None)):
            raise DivergedError("non-finite parameter after Adam update")
        out.append(new)
    return out


def train(net: Network, data: Dataset, cfg: TrainConfig) -> TrainHistory:
    """Mini-batch Adam on MAE. Mutates ``net``; divergence is recorded, not raised."""
    X, y = data.X, data.y
    if X.shape[1] != net.spec.input_width:
        raise ShapeError(f"data has {X.shape[1]} inputs, network expects {net.spec.input_width}")
    rng = np.random.Generator(np.random.PCG64(cfg.shuffle_seed))
    # Adam is elementwise, so one flat buffer gives the same update as per-tensor steps
    state = AdamState.for_params([net.flat])
    history = TrainHistory()
    n = X.shape[0]
    bs = cfg.batch_size
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        Xs, ys = X[order], y[order]
        batch_losses = []
        try:
            for start in range(0, n, bs):
                xb = tensor.row_range(Xs, start, min(start + bs, n))
                yb = ys[start:start + bs]
                trace = forward(net, xb)
                batch_losses.append(mae_loss(trace.yhat, yb))
                grads = backward(net, trace, mae_grad(trace.yhat, yb))
                (flat,) = adam_step([net.flat], [grads.flatten()], state, cfg)
                net.set_flat(flat)
        except DivergedError as exc:
            history.diverged, history.reason = True, str(exc)
            return history
        loss = float(np.mean(batch_losses))
        if not math.isfinite(loss):
            history.diverged, history.reason = True, "non-finite epoch loss"
            return history
        history.losses.append(loss)
    return history
