"""Test-set metrics: MAE and mean percentage error."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .datagen import Dataset, TargetFunction
from .errors import DivergedError, ShapeError, UndefinedMetricError
from .network import Network, predict


@dataclass(frozen=True)
class EvalReport:
    pair: tuple[str, str]
    target: TargetFunction
    test_mae: float
    test_pct_err: float
    diverged: bool = False


def _columns(pred, actual) -> tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=np.float64).reshape(-1)
    actual = np.asarray(actual, dtype=np.float64).reshape(-1)
    if pred.shape != actual.shape or pred.size == 0:
        raise ShapeError(f"prediction length {pred.size} vs actual length {actual.size}")
    return pred, actual


def mean_absolute_error(pred, actual) -> float:
    pred, actual = _columns(pred, actual)
    return float(np.mean(np.abs(pred - actual)))


def percent_error(pred, actual) -> float:
    """100/n * sum |pred - actual| / |actual|."""
    pred, actual = _columns(pred, actual)
    if np.any(actual == 0):
        raise UndefinedMetricError("percent error undefined when an actual value is 0")
    return float(100.0 * np.mean(np.abs(pred - actual) / np.abs(actual)))


def evaluate(net: Network, test: Dataset) -> EvalReport:
    """Score ``net`` on the whole test set in one pass."""
    pair = (net.spec.a1, net.spec.a2)
    try:
        pred = predict(net, test.X)
    except DivergedError:
        return EvalReport(pair, test.target, math.inf, math.inf, diverged=True)
    return EvalReport(pair, test.target, mean_absolute_error(pred, test.y), percent_error(pred, test.y))
