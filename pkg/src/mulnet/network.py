"""Two-hidden-layer dense regressor with a linear scalar output."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from functools import cached_property
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import tensor
from .activations import activation_jacobian_apply, apply_activation, get_activation
from .errors import ConfigError, ShapeError

PARAM_NAMES = ("W1", "b1", "W2", "b2", "W3", "b3")
# a wide log layer feeding a narrow exp layer extrapolates most reliably at 100 epochs
DEFAULT_H1 = 16
DEFAULT_H2 = 4


@dataclass(frozen=True)
class NetworkSpec:
    input_width: int
    hidden1_width: int = DEFAULT_H1
    hidden2_width: int = DEFAULT_H2
    a1: str = "symlog"
    a2: str = "symexp"
    init_seed: int = 0

    def __post_init__(self):
        widths = (self.input_width, self.hidden1_width, self.hidden2_width)
        if min(widths) < 1:
            raise ConfigError(f"layer widths must be >= 1, got {widths}")
        get_activation(self.a1)
        get_activation(self.a2)

    @cached_property
    def shapes(self) -> dict[str, tuple[int, ...]]:
        n, h1, h2 = self.input_width, self.hidden1_width, self.hidden2_width
        return {"W1": (n, h1), "b1": (h1,), "W2": (h1, h2), "b2": (h2,), "W3": (h2, 1), "b3": (1,)}

    @cached_property
    def layout(self) -> tuple[tuple[str, int, int, tuple[int, ...]], ...]:
        """(name, start, stop, shape) of each tensor inside the flat parameter vector."""
        out, offset = [], 0
        for name, shape in self.shapes.items():
            size = math.prod(shape)
            out.append((name, offset, offset + size, shape))
            offset += size
        return tuple(out)

    @property
    def n_parameters(self) -> int:
        return self.layout[-1][2]


class ForwardTrace(NamedTuple):
    x: np.ndarray
    z1: np.ndarray
    h1: np.ndarray
    z2: np.ndarray
    h2: np.ndarray
    yhat: np.ndarray


class Gradients(NamedTuple):
    dW1: np.ndarray
    db1: np.ndarray
    dW2: np.ndarray
    db2: np.ndarray
    dW3: np.ndarray
    db3: np.ndarray

    def flatten(self) -> np.ndarray:
        return np.concatenate([g.ravel() for g in self])


@dataclass
class Network:
    spec: NetworkSpec
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    W3: np.ndarray
    b3: np.ndarray

    def __post_init__(self):
        parts = []
        for name, shape in self.spec.shapes.items():
            value = np.asarray(getattr(self, name), dtype=np.float64)
            if value.shape != shape:
                raise ShapeError(f"{name} has shape {value.shape}, expected {shape}")
            parts.append(value.ravel())
        self.set_flat(np.concatenate(parts))
        self._act1 = get_activation(self.spec.a1)
        self._act2 = get_activation(self.spec.a2)

    @property
    def flat(self) -> np.ndarray:
        """All parameters as one vector in W1, b1, W2, b2, W3, b3 order."""
        return self._flat

    def set_flat(self, flat: np.ndarray) -> None:
        """Adopt ``flat`` as the parameter buffer; the named tensors become views into it."""
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (self.spec.n_parameters,):
            raise ShapeError(f"flat parameters of shape {flat.shape}, expected ({self.spec.n_parameters},)")
        self._flat = flat
        for name, start, stop, shape in self.spec.layout:
            setattr(self, name, flat[start:stop].reshape(shape))

    def parameters(self) -> list[np.ndarray]:
        return [getattr(self, name) for name in PARAM_NAMES]

    def to_dict(self) -> dict:
        return {
            "spec": asdict(self.spec),
            "params": {name: getattr(self, name).ravel().tolist() for name in PARAM_NAMES},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Network":
        spec = NetworkSpec(**doc["spec"])
        params = {
            name: np.array(doc["params"][name], dtype=np.float64).reshape(shape)
            for name, shape in spec.shapes.items()
        }
        return cls(spec=spec, **params)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "Network":
        return cls.from_dict(json.loads(Path(path).read_text()))


def init_network(spec: NetworkSpec) -> Network:
    """Glorot-uniform weights from a PCG64 stream seeded by ``spec.init_seed``; zero biases."""
    rng = np.random.Generator(np.random.PCG64(spec.init_seed))
    params = {}
    for name, shape in spec.shapes.items():
        if name.startswith("W"):
            limit = np.sqrt(6.0 / (shape[0] + shape[1]))
            params[name] = rng.uniform(-limit, limit, size=shape)
        else:
            params[name] = np.zeros(shape)
    return Network(spec=spec, **params)


def forward(net: Network, x: tensor.Matrix) -> ForwardTrace:
    if x.ndim != 2 or x.shape[1] != net.spec.input_width:
        raise ShapeError(f"input shape {x.shape}, expected (*, {net.spec.input_width})")
    z1 = tensor.add_row_broadcast(tensor.matmul(x, net.W1), net.b1)
    h1 = apply_activation(net._act1, z1)
    z2 = tensor.add_row_broadcast(tensor.matmul(h1, net.W2), net.b2)
    h2 = apply_activation(net._act2, z2)
    yhat = tensor.add_row_broadcast(tensor.matmul(h2, net.W3), net.b3)
    return ForwardTrace(x, z1, h1, z2, h2, yhat)


def predict(net: Network, x: tensor.Matrix) -> tensor.Matrix:
    return forward(net, x).yhat


def backward(net: Network, trace: ForwardTrace, dL_dyhat: tensor.Matrix) -> Gradients:
    """Reverse-mode gradients of a loss whose derivative w.r.t. the output is ``dL_dyhat``."""
    if dL_dyhat.shape != trace.yhat.shape:
        raise ShapeError(f"dL/dyhat shape {dL_dyhat.shape}, expected {trace.yhat.shape}")
    d3 = dL_dyhat
    dW3 = tensor.matmul(tensor.transpose(trace.h2), d3)
    db3 = tensor.column_sums(d3)
    d2 = activation_jacobian_apply(net._act2, trace.z2, tensor.matmul(d3, tensor.transpose(net.W3)))
    dW2 = tensor.matmul(tensor.transpose(trace.h1), d2)
    db2 = tensor.column_sums(d2)
    d1 = activation_jacobian_apply(net._act1, trace.z1, tensor.matmul(d2, tensor.transpose(net.W2)))
    dW1 = tensor.matmul(tensor.transpose(trace.x), d1)
    db1 = tensor.column_sums(d1)
    return Gradients(dW1, db1, dW2, db2, dW3, db3)
