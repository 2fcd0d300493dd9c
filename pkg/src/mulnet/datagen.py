"""Seeded synthetic regression data on disjoint train/test input ranges.

Inputs are i.i.d. uniform on ``[low, high)`` drawn from numpy's PCG64
generator (53-bit uniform doubles). The experiments train on [10, 100)
and test on [100, 1000).
"""
from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, ShapeError

TRAIN_RANGE = (10.0, 100.0)
TEST_RANGE = (100.0, 1000.0)
DEFAULT_SAMPLES = 10_000


@dataclass(frozen=True)
class TargetFunction:
    """``product``: (x1 * ... * xn) / N.  ``complex``: x1 * (x2 + x3) + x4."""

    kind: str
    n_inputs: int
    normalizer: float = 1.0

    def __post_init__(self):
        if self.kind == "product":
            if not 2 <= self.n_inputs <= 4:
                raise ConfigError(f"product targets take 2-4 inputs, got {self.n_inputs}")
        elif self.kind == "complex":
            if self.n_inputs != 4:
                raise ConfigError("the complex target takes exactly 4 inputs")
        else:
            raise ConfigError(f"unknown target kind {self.kind!r}")
        if not self.normalizer >= 1:
            raise ConfigError(f"normalizer must be >= 1, got {self.normalizer}")
        object.__setattr__(self, "normalizer", float(self.normalizer))

    @classmethod
    def product(cls, n: int, normalizer: float = 1.0) -> "TargetFunction":
        return cls("product", n, normalizer)

    @classmethod
    def complex(cls) -> "TargetFunction":
        return cls("complex", 4, 1.0)

    @classmethod
    def parse(cls, text: str) -> "TargetFunction":
        """Parse ``product:n=2,N=10`` or ``complex``."""
        text = text.strip()
        if text == "complex":
            return cls.complex()
        m = re.fullmatch(r"product:(.*)", text)
        if not m:
            raise ConfigError(f"bad target string {text!r}")
        fields = {}
        for part in filter(None, m.group(1).split(",")):
            key, _, value = part.partition("=")
            fields[key.strip()] = value.strip()
        if "n" not in fields or set(fields) - {"n", "N"}:
            raise ConfigError(f"bad target string {text!r}")
        try:
            n, normalizer = int(fields["n"]), float(fields.get("N", 1))
        except ValueError as exc:
            raise ConfigError(f"bad target string {text!r}") from exc
        return cls.product(n, normalizer)

    @property
    def label(self) -> str:
        if self.kind == "complex":
            return "complex"
        return f"product:n={self.n_inputs},N={self.normalizer:g}"

    @property
    def expression(self) -> str:
        if self.kind == "complex":
            return "x1(x2+x3)+x4"
        expr = "".join(f"x{i + 1}" for i in range(self.n_inputs))
        return expr if self.normalizer == 1 else f"{expr}/{self.normalizer:g}"

    @property
    def sort_key(self) -> tuple:
        """Products by arity then normalizer, the complex target last."""
        return (self.kind != "product", self.n_inputs, self.normalizer)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        """Evaluate on a (samples, n_inputs) matrix; returns a column vector."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_inputs:
            raise ShapeError(f"input shape {X.shape}, expected (*, {self.n_inputs})")
        if self.kind == "complex":
            y = X[:, 0] * (X[:, 1] + X[:, 2]) + X[:, 3]
        else:
            y = X[:, 0].copy()
            for i in range(1, self.n_inputs):
                y = y * X[:, i]
            y = y / self.normalizer
        return y.reshape(-1, 1)


def target_value(target: TargetFunction, x) -> float:
    row = np.asarray(x, dtype=np.float64).reshape(1, -1)
    return float(target(row)[0, 0])


def default_targets() -> list[TargetFunction]:
    """The six product targets (raw and normalized for n = 2, 3, 4) and the complex one."""
    targets = []
    for n in (2, 3, 4):
        targets.append(TargetFunction.product(n, 1))
        targets.append(TargetFunction.product(n, 10.0 ** (n - 1)))
    targets.append(TargetFunction.complex())
    return targets


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def target(self) -> TargetFunction:
        return self.meta["target"]

    def __len__(self) -> int:
        return self.X.shape[0]

    def sidecar(self) -> dict:
        t = self.target
        return {
            "target": t.kind,
            "n": t.n_inputs,
            "N": t.normalizer,
            "low": self.meta["low"],
            "high": self.meta["high"],
            "seed": self.meta["seed"],
            "samples": len(self),
        }

    def save(self, csv_path) -> Path:
        """Write ``x1..xn,y`` CSV plus a ``.json`` metadata sidecar; returns the sidecar path."""
        csv_path = Path(csv_path)
        n = self.X.shape[1]
        with csv_path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{i + 1}" for i in range(n)] + ["y"])
            for row, y in zip(self.X, self.y[:, 0]):
                w.writerow([repr(float(v)) for v in row] + [repr(float(y))])
        meta_path = csv_path.with_suffix(".json")
        meta_path.write_text(json.dumps(self.sidecar(), indent=2))
        return meta_path

    @classmethod
    def load(cls, csv_path) -> "Dataset":
        csv_path = Path(csv_path)
        data = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2, dtype=np.float64)
        meta_path = csv_path.with_suffix(".json")
        if meta_path.exists():
            side = json.loads(meta_path.read_text())
            target = TargetFunction(side["target"], side["n"], side["N"])
            meta = {"low": side["low"], "high": side["high"], "seed": side["seed"]}
        else:
            target = TargetFunction.product(data.shape[1] - 1)
            meta = {"low": float(data[:, :-1].min()), "high": float(data[:, :-1].max()), "seed": None}
        meta.update(target=target, sample_count=data.shape[0])
        return cls(X=np.ascontiguousarray(data[:, :-1]), y=data[:, -1:].copy(), meta=meta)


def generate(target: TargetFunction, value_range=TRAIN_RANGE, samples: int = DEFAULT_SAMPLES, seed: int = 0) -> Dataset:
    low, high = map(float, value_range)
    if not (np.isfinite(low) and np.isfinite(high) and low < high):
        raise ConfigError(f"invalid range [{low}, {high})")
    if samples < 1:
        raise ConfigError("samples must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    X = low + (high - low) * rng.random((samples, target.n_inputs))
    # rounding of low + width*u can land on high itself
    X = np.minimum(X, np.nextafter(high, low))
    meta = {"low": low, "high": high, "target": target, "seed": seed, "sample_count": samples}
    return Dataset(X=X, y=target(X), meta=meta)


def histogram(data: Dataset, bins: int = 10) -> tuple[np.ndarray, np.ndarray]:
    """Equal-width histogram of all input entries pooled; returns (edges, counts)."""
    if bins < 1:
        raise ConfigError("bins must be >= 1")
    counts, edges = np.histogram(data.X.ravel(), bins=bins)
    return edges, counts


def write_histogram_csv(data: Dataset, path, bins: int = 10) -> None:
    edges, counts = histogram(data, bins)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_low", "bin_high", "count"])
        for lo, hi, c in zip(edges[:-1], edges[1:], counts):
            w.writerow([repr(float(lo)), repr(float(hi)), int(c)])
