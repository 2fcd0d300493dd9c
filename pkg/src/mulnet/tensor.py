"""Dense 2-D float64 kernels.

A "matrix" here is a C-contiguous ``numpy.ndarray`` of dtype float64 and
ndim 2. Samples are rows. Kernels validate shapes, never mutate their
inputs, and raise :class:`DivergedError` instead of returning non-finite
entries.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .errors import DivergedError, ShapeError

Matrix = np.ndarray


def matrix(values, rows: int | None = None, cols: int | None = None) -> Matrix:
    """Build a float64 matrix from nested sequences, or from flat data with ``rows``/``cols``."""
    a = np.array(values, dtype=np.float64)
    if rows is not None or cols is not None:
        if rows is None or cols is None:
            raise ShapeError("rows and cols must be given together")
        if a.size != rows * cols:
            raise ShapeError(f"data length {a.size} != {rows}x{cols}")
        a = a.reshape(rows, cols)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2:
        raise ShapeError(f"expected 2-D data, got ndim={a.ndim}")
    return _checked(a)


def zeros(rows: int, cols: int) -> Matrix:
    return np.zeros((rows, cols), dtype=np.float64)


def _checked(a: np.ndarray) -> Matrix:
    # a sum is non-finite iff some entry is (or the total overflows, which is divergence anyway)
    if not math.isfinite(np.add.reduce(a, axis=None)):
        raise DivergedError("non-finite entries produced")
    return a


def _require_2d(m: Matrix) -> None:
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {m.shape}")


def _as_row(v, width: int) -> np.ndarray:
    if isinstance(v, np.ndarray) and v.shape == (width,):
        return v
    row = np.asarray(v, dtype=np.float64).reshape(-1)
    if row.shape[0] != width:
        raise ShapeError(f"row vector of length {row.shape[0]}, expected {width}")
    return row


def matmul(a: Matrix, b: Matrix) -> Matrix:
    _require_2d(a)
    _require_2d(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul {a.shape} x {b.shape}")
    return _checked(a @ b)


def add_row_broadcast(m: Matrix, bias) -> Matrix:
    """Add ``bias`` (length ``m.cols``) to every row of ``m``."""
    _require_2d(m)
    return _checked(m + _as_row(bias, m.shape[1]))


def transpose(m: Matrix) -> Matrix:
    _require_2d(m)
    return np.ascontiguousarray(m.T)


def elementwise_map(m: Matrix, f: Callable[[np.ndarray], np.ndarray]) -> Matrix:
    """Apply a vectorised scalar function to every entry."""
    _require_2d(m)
    out = np.asarray(f(m), dtype=np.float64)
    if out.shape != m.shape:
        raise ShapeError(f"map changed shape {m.shape} -> {out.shape}")
    return _checked(out)


def elementwise_mul(a: Matrix, b: Matrix) -> Matrix:
    _require_2d(a)
    if a.shape != b.shape:
        raise ShapeError(f"elementwise_mul {a.shape} vs {b.shape}")
    return _checked(a * b)


def scale(m: Matrix, c: float) -> Matrix:
    _require_2d(m)
    return _checked(m * float(c))


def column_sums(m: Matrix) -> np.ndarray:
    """Sum over rows; returns a 1-D row vector of length ``m.cols``."""
    _require_2d(m)
    return _checked(m.sum(axis=0))


def row_range(m: Matrix, start: int, stop: int) -> Matrix:
    """Rows ``start:stop`` as a new matrix (used for mini-batching)."""
    _require_2d(m)
    if not 0 <= start <= stop <= m.shape[0]:
        raise ShapeError(f"row range {start}:{stop} outside 0:{m.shape[0]}")
    return m[start:stop].copy()
