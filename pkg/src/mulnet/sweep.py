"""Activation-pair sweep: every (A1, A2) pair on every target, ranked and reported.

Each trial derives its own seeds by hashing (pair, target) into the plan
seeds, so results do not depend on worker count or completion order.
"""
from __future__ import annotations

import csv
import hashlib
import itertools
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .activations import BASELINE_NAMES, PROPOSED_PAIR, get_activation
from .datagen import DEFAULT_SAMPLES, TEST_RANGE, TRAIN_RANGE, Dataset, TargetFunction, generate, default_targets
from .errors import ConfigError, DivergedError
from .metrics import EvalReport, evaluate
from .network import DEFAULT_H1, DEFAULT_H2, NetworkSpec, init_network
from .training import TrainConfig, TrainHistory, train

log = logging.getLogger(__name__)

SMOKE_BASELINES = (("relu", "linear"), ("elu", "elu"), ("linear", "linear"), ("relu", "selu"))
RANK_KEYS = ("final_train_loss", "test_pct_err")
TOP_CURVES = 7

RESULTS_HEADER = [
    "a1", "a2", "target_kind", "n_inputs", "normalizer",
    "final_train_loss", "test_mae", "test_pct_err", "diverged", "wall_s",
]
CURVES_HEADER = ["a1", "a2", "target_kind", "n_inputs", "normalizer", "epoch", "loss"]


def default_pairs() -> list[tuple[str, str]]:
    """The proposed pair followed by all 121 baseline pairs."""
    return [PROPOSED_PAIR] + list(itertools.product(BASELINE_NAMES, BASELINE_NAMES))


def derive_seed(base: int, *parts) -> int:
    """Stable 63-bit seed from a base seed and any labels."""
    text = "|".join([str(base)] + [str(p) for p in parts])
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big") >> 1


@dataclass
class SweepPlan:
    pairs: list[tuple[str, str]] = field(default_factory=default_pairs)
    targets: list[TargetFunction] = field(default_factory=default_targets)
    train_range: tuple[float, float] = TRAIN_RANGE
    test_range: tuple[float, float] = TEST_RANGE
    train_samples: int = DEFAULT_SAMPLES
    test_samples: int = DEFAULT_SAMPLES
    train_config: TrainConfig = field(default_factory=TrainConfig)
    hidden1_width: int = DEFAULT_H1
    hidden2_width: int = DEFAULT_H2
    data_seed: int = 0
    init_seed: int = 0
    shuffle_seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        self.pairs = [tuple(p) for p in self.pairs]
        if len(set(self.pairs)) != len(self.pairs):
            raise ConfigError("duplicate activation pairs in plan")
        if len(set(self.targets)) != len(self.targets):
            raise ConfigError("duplicate targets in plan")
        for a1, a2 in self.pairs:
            get_activation(a1)
            get_activation(a2)
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")

    @classmethod
    def smoke(cls, **overrides) -> "SweepPlan":
        """Proposed pair plus four baselines, 20 epochs, 2,000 samples."""
        kw = dict(
            pairs=[PROPOSED_PAIR, *SMOKE_BASELINES],
            train_samples=2000,
            test_samples=2000,
            train_config=TrainConfig(epochs=20),
        )
        kw.update(overrides)
        return cls(**kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pairs"] = [list(p) for p in self.pairs]
        d["targets"] = [t.label for t in self.targets]
        d["train_range"] = list(self.train_range)
        d["test_range"] = list(self.test_range)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SweepPlan":
        d = dict(d)
        if "targets" in d:
            d["targets"] = [TargetFunction.parse(t) if isinstance(t, str) else TargetFunction(**t) for t in d["targets"]]
        if "train_config" in d:
            d["train_config"] = TrainConfig(**d["train_config"])
        for key in ("train_range", "test_range"):
            if key in d:
                d[key] = tuple(d[key])
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(f"bad plan: {exc}") from exc

    def datasets(self, target: TargetFunction) -> tuple[Dataset, Dataset]:
        train_set = generate(target, self.train_range, self.train_samples, derive_seed(self.data_seed, target.label, "train"))
        test_set = generate(target, self.test_range, self.test_samples, derive_seed(self.data_seed, target.label, "test"))
        return train_set, test_set


@dataclass
class TrialResult:
    pair: tuple[str, str]
    target: TargetFunction
    history: TrainHistory
    report: EvalReport
    wall_s: float = 0.0

    @property
    def diverged(self) -> bool:
        return self.history.diverged or self.report.diverged

    @property
    def final_train_loss(self) -> float:
        return math.inf if self.diverged else self.history.final_loss

    @property
    def test_pct_err(self) -> float:
        return math.inf if self.diverged else self.report.test_pct_err

    @property
    def test_mae(self) -> float:
        return math.inf if self.diverged else self.report.test_mae

    @property
    def name(self) -> str:
        return "_".join(self.pair)

    def sort_key(self):
        return (self.target.sort_key, self.pair)


def trial_setup(plan: SweepPlan, pair, target: TargetFunction) -> tuple[NetworkSpec, TrainConfig]:
    """Network spec and training config for one trial, with seeds derived from (pair, target)."""
    a1, a2 = pair
    spec = NetworkSpec(
        input_width=target.n_inputs,
        hidden1_width=plan.hidden1_width,
        hidden2_width=plan.hidden2_width,
        a1=a1,
        a2=a2,
        init_seed=derive_seed(plan.init_seed, a1, a2, target.label),
    )
    cfg = replace(plan.train_config, shuffle_seed=derive_seed(plan.shuffle_seed, a1, a2, target.label))
    return spec, cfg


def run_trial(plan: SweepPlan, pair, target: TargetFunction, data=None, keep_network: bool = False):
    """Train and evaluate one pair on one target. Never raises on divergence.

    With ``keep_network`` returns ``(result, network)``.
    """
    a1, a2 = pair
    train_set, test_set = data if data is not None else plan.datasets(target)
    spec, cfg = trial_setup(plan, pair, target)
    start = time.perf_counter()
    with np.errstate(over="ignore", invalid="ignore"):
        net = init_network(spec)
        history = train(net, train_set, cfg)
        if history.diverged:
            report = EvalReport((a1, a2), target, math.inf, math.inf, diverged=True)
        else:
            try:
                report = evaluate(net, test_set)
            except DivergedError:
                report = EvalReport((a1, a2), target, math.inf, math.inf, diverged=True)
    wall = time.perf_counter() - start
    log.debug("%s_%s on %s: loss %.6g pct %.4g (%.1fs)", a1, a2, target.label, history.final_loss, report.test_pct_err, wall)
    result = TrialResult((a1, a2), target, history, report, wall)
    return (result, net) if keep_network else result


def _run_target(args) -> list[TrialResult]:
    plan, target, pairs = args
    data = plan.datasets(target)
    return [run_trial(plan, pair, target, data) for pair in pairs]


def run_sweep(plan: SweepPlan, progress=None) -> list[TrialResult]:
    """Run every (pair, target) trial; returns results sorted by (target, pair)."""
    # chunk by (target, pair block) so workers share generated data
    chunk = max(1, math.ceil(len(plan.pairs) / (plan.jobs * 2)))
    tasks = [
        (plan, target, plan.pairs[i:i + chunk])
        for target in plan.targets
        for i in range(0, len(plan.pairs), chunk)
    ]
    results: list[TrialResult] = []
    if plan.jobs == 1:
        batches = map(_run_target, tasks)
        for batch in batches:
            results.extend(batch)
            if progress:
                progress(len(batch))
    else:
        with ProcessPoolExecutor(max_workers=plan.jobs) as pool:
            for batch in pool.map(_run_target, tasks):
                results.extend(batch)
                if progress:
                    progress(len(batch))
    results.sort(key=TrialResult.sort_key)
    return results


def rank_results(results, target: TargetFunction, key: str = "test_pct_err") -> list[TrialResult]:
    """Ascending by ``key``; diverged trials last; ties broken by pair name."""
    if key not in RANK_KEYS:
        raise ConfigError(f"rank key must be one of {RANK_KEYS}")
    chosen = [r for r in results if r.target == target]
    if not chosen:
        raise LookupError(f"no results for target {target.label}")
    return sorted(chosen, key=lambda r: (r.diverged, getattr(r, key), r.name))


def epochs_to_half_loss(losses) -> float:
    """First epoch index (1-based) whose loss is at most half the first epoch's; inf if never."""
    if not losses:
        return math.inf
    for i, loss in enumerate(losses, start=1):
        if loss <= 0.5 * losses[0]:
            return i
    return math.inf


# -- files --------------------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def _target_cols(t: TargetFunction) -> list[str]:
    return [t.kind, str(t.n_inputs), _fmt(t.normalizer)]


def write_results_csv(results, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULTS_HEADER)
        for r in sorted(results, key=TrialResult.sort_key):
            w.writerow(
                [*r.pair, *_target_cols(r.target),
                 _fmt(r.final_train_loss), _fmt(r.test_mae), _fmt(r.test_pct_err),
                 "true" if r.diverged else "false", f"{r.wall_s:.3f}"]
            )


def write_curves_csv(results, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVES_HEADER)
        for r in sorted(results, key=TrialResult.sort_key):
            for epoch, loss in enumerate(r.history.losses, start=1):
                w.writerow([*r.pair, *_target_cols(r.target), epoch, _fmt(loss)])


def load_results(directory) -> list[TrialResult]:
    """Rebuild trial results from ``results.csv`` and ``loss_curves.csv``."""
    directory = Path(directory)
    curves: dict[tuple, list[float]] = {}
    curves_path = directory / "loss_curves.csv"
    if curves_path.exists():
        with curves_path.open(newline="") as fh:
            for row in csv.DictReader(fh):
                key = (row["a1"], row["a2"], row["target_kind"], int(row["n_inputs"]), float(row["normalizer"]))
                curves.setdefault(key, []).append(float(row["loss"]))
    results = []
    with (directory / "results.csv").open(newline="") as fh:
        for row in csv.DictReader(fh):
            target = TargetFunction(row["target_kind"], int(row["n_inputs"]), float(row["normalizer"]))
            pair = (row["a1"], row["a2"])
            diverged = row["diverged"] == "true"
            losses = curves.get((*pair, target.kind, target.n_inputs, target.normalizer), [])
            history = TrainHistory(losses=losses, diverged=diverged and not math.isfinite(float(row["final_train_loss"])))
            report = EvalReport(pair, target, float(row["test_mae"]), float(row["test_pct_err"]), diverged=diverged)
            results.append(TrialResult(pair, target, history, report, float(row["wall_s"])))
    return results


def table1(results) -> str:
    """Markdown summary: proposed pair vs the best baseline pair, per target."""
    lines = [
        "| Expression | Proposed %err | Proposed MAE | Next best pair | Next best %err |",
        "|---|---|---|---|---|",
    ]
    targets = sorted({r.target for r in results}, key=lambda t: t.sort_key)
    for t in targets:
        ranked = rank_results(results, t, "test_pct_err")
        ours = next((r for r in ranked if r.pair == PROPOSED_PAIR), None)
        best = next((r for r in ranked if r.pair != PROPOSED_PAIR), None)
        cells = [t.expression]
        cells += [f"{ours.test_pct_err:.6g}", f"{ours.test_mae:.6g}"] if ours else ["-", "-"]
        cells += [best.name, f"{best.test_pct_err:.6g}"] if best else ["-", "-"]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def top_curves(results, k: int = TOP_CURVES) -> list[TrialResult]:
    """Per target: the proposed pair plus the ``k`` baselines with the lowest final training loss."""
    out = []
    for t in sorted({r.target for r in results}, key=lambda t: t.sort_key):
        ranked = rank_results(results, t, "final_train_loss")
        out += [r for r in ranked if r.pair == PROPOSED_PAIR]
        out += [r for r in ranked if r.pair != PROPOSED_PAIR][:k]
    return out


def report(results, out_dir) -> list[Path]:
    """Write results.csv, loss_curves.csv, top_curves.csv and table1.md into ``out_dir``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = [out / "results.csv", out / "loss_curves.csv", out / "top_curves.csv", out / "table1.md"]
        write_results_csv(results, paths[0])
        write_curves_csv(results, paths[1])
        write_curves_csv(top_curves(results), paths[2])
        paths[3].write_text(table1(results))
    except OSError as exc:
        raise OSError(f"cannot write report to {out}: {exc}") from exc
    return paths


def write_plan(plan: SweepPlan, path) -> None:
    Path(path).write_text(json.dumps(plan.to_dict(), indent=2))
