"""Activation registry.

Holds the symmetric logarithm / exponential pair used by the multiplicative
model plus the eleven baseline activations it is compared against. Every
activation carries an exact derivative; softmax is the one vector-valued
entry and is differentiated through its per-row Jacobian instead.

Baseline constants are the usual Keras defaults.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import tensor
from .errors import NumericOverflowError, ShapeError, UnknownActivationError

#: Largest |x| accepted by symexp; e**709 is the last finite power in float64.
SYMEXP_LIMIT = 700.0

ELU_ALPHA = 1.0
SELU_ALPHA = 1.6732632423543772848170429916717
SELU_SCALE = 1.0507009873554804934193349852946
HARD_SIGMOID_SLOPE = 0.2
HARD_SIGMOID_SHIFT = 0.5

BASELINE_NAMES = (
    "elu",
    "hard_sigmoid",
    "linear",
    "relu",
    "selu",
    "sigmoid",
    "softmax",
    "softplus",
    "softsign",
    "swish",
    "tanh",
)
PROPOSED_PAIR = ("symlog", "symexp")


@dataclass(frozen=True)
class Activation:
    """A named activation with its exact derivative.

    ``value`` and ``derivative`` are vectorised over numpy arrays. For the
    vector-valued softmax ``value`` works row-wise and ``derivative`` is
    ``None``; use :func:`activation_jacobian_apply` instead.
    ``seams`` lists points where the derivative is not continuous.
    """

    name: str
    value: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray] | None
    is_vector_valued: bool = False
    seams: tuple[float, ...] = field(default=())

    def __call__(self, x):
        return self.value(np.asarray(x, dtype=np.float64))


# -- symmetric pair ---------------------------------------------------------

def symlog(x):
    """log(x + 1) for x >= 0 and -log(1 - x) for x < 0."""
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.log1p(np.abs(x))


def symlog_deriv(x):
    x = np.asarray(x, dtype=np.float64)
    return 1.0 / (1.0 + np.abs(x))


def _check_symexp_domain(x: np.ndarray) -> None:
    # NaN fails the comparison, so it is rejected too
    if not np.abs(x).max(initial=0.0) <= SYMEXP_LIMIT:
        raise NumericOverflowError(
            f"symexp input outside [-{SYMEXP_LIMIT:g}, {SYMEXP_LIMIT:g}]"
        )


def symexp(x):
    """e**x - 1 for x >= 0 and 1 - e**(-x) for x < 0.

    Raises NumericOverflowError when ``|x| > 700``.
    """
    x = np.asarray(x, dtype=np.float64)
    ax = np.abs(x)
    if not ax.max(initial=0.0) <= SYMEXP_LIMIT:
        raise NumericOverflowError(f"symexp input outside [-{SYMEXP_LIMIT:g}, {SYMEXP_LIMIT:g}]")
    return np.sign(x) * np.expm1(ax)


def symexp_deriv(x):
    x = np.asarray(x, dtype=np.float64)
    _check_symexp_domain(x)
    return np.exp(np.abs(x))


# -- baselines ----------------------------------------------------------------

def _sigmoid(x):
    # tanh form avoids overflow in exp for large |x|
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _sigmoid_deriv(x):
    s = _sigmoid(x)
    return s * (1.0 - s)


def _elu(x):
    return np.where(x > 0, x, ELU_ALPHA * np.expm1(np.minimum(x, 0.0)))


def _elu_deriv(x):
    return np.where(x > 0, 1.0, ELU_ALPHA * np.exp(np.minimum(x, 0.0)))


def _selu(x):
    return SELU_SCALE * np.where(x > 0, x, SELU_ALPHA * np.expm1(np.minimum(x, 0.0)))


def _selu_deriv(x):
    return SELU_SCALE * np.where(x > 0, 1.0, SELU_ALPHA * np.exp(np.minimum(x, 0.0)))


def _hard_sigmoid(x):
    return np.clip(HARD_SIGMOID_SLOPE * x + HARD_SIGMOID_SHIFT, 0.0, 1.0)


def _hard_sigmoid_deriv(x):
    inner = HARD_SIGMOID_SLOPE * x + HARD_SIGMOID_SHIFT
    return np.where((inner > 0.0) & (inner < 1.0), HARD_SIGMOID_SLOPE, 0.0)


def _relu(x):
    return np.maximum(x, 0.0)


def _relu_deriv(x):
    return np.where(x > 0, 1.0, 0.0)


def _linear(x):
    return x


def _linear_deriv(x):
    return np.ones_like(x)


def _softplus(x):
    return np.logaddexp(0.0, x)


def _softsign(x):
    return x / (1.0 + np.abs(x))


def _softsign_deriv(x):
    return 1.0 / (1.0 + np.abs(x)) ** 2


def _swish(x):
    return x * _sigmoid(x)


def _swish_deriv(x):
    s = _sigmoid(x)
    return s + x * s * (1.0 - s)


def _tanh_deriv(x):
    return 1.0 - np.tanh(x) ** 2


def _softmax(z):
    z = np.atleast_2d(z)
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


_hs_edge = HARD_SIGMOID_SHIFT / HARD_SIGMOID_SLOPE

_REGISTRY: dict[str, Activation] = {
    a.name: a
    for a in (
        Activation("symlog", symlog, symlog_deriv),
        Activation("symexp", symexp, symexp_deriv),
        Activation("elu", _elu, _elu_deriv),
        Activation("hard_sigmoid", _hard_sigmoid, _hard_sigmoid_deriv, seams=(-_hs_edge, _hs_edge)),
        Activation("linear", _linear, _linear_deriv),
        Activation("relu", _relu, _relu_deriv, seams=(0.0,)),
        Activation("selu", _selu, _selu_deriv, seams=(0.0,)),
        Activation("sigmoid", _sigmoid, _sigmoid_deriv),
        Activation("softmax", _softmax, None, is_vector_valued=True),
        Activation("softplus", _softplus, _sigmoid),
        Activation("softsign", _softsign, _softsign_deriv),
        Activation("swish", _swish, _swish_deriv),
        Activation("tanh", np.tanh, _tanh_deriv),
    )
}


def get_activation(name: str) -> Activation:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise UnknownActivationError(f"unknown activation {name!r}") from None


def baseline_activation(name: str) -> Activation:
    """Look up one of the eleven baseline activations."""
    if name not in BASELINE_NAMES:
        raise UnknownActivationError(f"{name!r} is not a baseline activation")
    return _REGISTRY[name]


def all_activations() -> list[Activation]:
    return list(_REGISTRY.values())


def apply_activation(act: Activation, z: tensor.Matrix) -> tensor.Matrix:
    return tensor.elementwise_map(z, act.value)


def activation_jacobian_apply(act: Activation, z: tensor.Matrix, upstream: tensor.Matrix) -> tensor.Matrix:
    """Back-propagate ``upstream`` (dL/d act(z)) through the activation, giving dL/dz."""
    if z.shape != upstream.shape:
        raise ShapeError(f"activation backward {z.shape} vs {upstream.shape}")
    if act.is_vector_valued:
        s = act.value(z)
        # J^T u for the softmax Jacobian diag(s) - s s^T, row by row
        dot = np.sum(upstream * s, axis=1, keepdims=True)
        return tensor.elementwise_map(upstream, lambda u: s * (u - dot))
    return tensor.elementwise_mul(upstream, act.derivative(z))
