"""``mulnet`` command line."""
from __future__ import annotations

import csv
import functools
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import click

from . import datagen, sweep
from .datagen import TEST_RANGE, TRAIN_RANGE, Dataset, TargetFunction
from .errors import ConfigError
from .metrics import evaluate
from .network import Network


def _common_options(f):
    """Seed, training and size flags shared by the data, train and sweep commands."""
    options = [
        click.option("--seed-data", type=int, default=None, help="Base seed for dataset generation."),
        click.option("--seed-init", type=int, default=None, help="Base seed for weight initialisation."),
        click.option("--seed-shuffle", type=int, default=None, help="Base seed for mini-batch shuffling."),
        click.option("--epochs", type=int, default=None),
        click.option("--batch", type=int, default=None, help="Mini-batch size."),
        click.option("--lr", type=float, default=None, help="Adam learning rate."),
        click.option("--h1", type=int, default=None, help="Width of the first hidden layer."),
        click.option("--h2", type=int, default=None, help="Width of the second hidden layer."),
        click.option("--samples", type=int, default=None, help="Samples per train and test set."),
    ]
    for opt in reversed(options):
        f = opt(f)
    return f


def _apply_overrides(plan: sweep.SweepPlan, kw: dict) -> sweep.SweepPlan:
    cfg = plan.train_config
    cfg_kw = {k: v for k, v in (("epochs", kw["epochs"]), ("batch_size", kw["batch"]), ("learning_rate", kw["lr"])) if v is not None}
    if cfg_kw:
        cfg = replace(cfg, **cfg_kw)
    plan_kw = {
        "data_seed": kw["seed_data"],
        "init_seed": kw["seed_init"],
        "shuffle_seed": kw["seed_shuffle"],
        "hidden1_width": kw["h1"],
        "hidden2_width": kw["h2"],
        "train_samples": kw["samples"],
        "test_samples": kw["samples"],
    }
    plan_kw = {k: v for k, v in plan_kw.items() if v is not None}
    return replace(plan, train_config=cfg, **plan_kw)


def _target(ctx, param, value):
    if value is None:
        return None
    try:
        return TargetFunction.parse(value)
    except ConfigError as exc:
        raise click.BadParameter(str(exc)) from exc


def _config_errors(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except (ConfigError, KeyError) as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log every trial.")
def main(verbose):
    """Symmetric log/exp activation pair experiments."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING, format="%(message)s")


@main.command("gen-data")
@click.option("--target", "target", required=True, callback=_target, help="e.g. product:n=2,N=10 or complex")
@click.option("--split", type=click.Choice(["train", "test"]), default="train", help="Input range preset.")
@click.option("--low", type=float, default=None)
@click.option("--high", type=float, default=None)
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="CSV path; a .json sidecar is written next to it.")
@click.option("--hist-bins", type=int, default=None, help="Also write <out>.hist.csv with this many bins.")
@_common_options
@_config_errors
def gen_data(target, split, low, high, out, hist_bins, **kw):
    """Write a synthetic dataset as CSV plus JSON metadata."""
    default_low, default_high = TRAIN_RANGE if split == "train" else TEST_RANGE
    low = default_low if low is None else low
    high = default_high if high is None else high
    samples = kw["samples"] or datagen.DEFAULT_SAMPLES
    seed = sweep.derive_seed(kw["seed_data"] or 0, target.label, split)
    data = datagen.generate(target, (low, high), samples, seed)
    meta_path = data.save(out)
    click.echo(f"wrote {out} and {meta_path}")
    if hist_bins:
        hist_path = Path(out).with_suffix(".hist.csv")
        datagen.write_histogram_csv(data, hist_path, hist_bins)
        click.echo(f"wrote {hist_path}")


@main.command()
@click.option("--a1", required=True, help="First hidden-layer activation.")
@click.option("--a2", required=True, help="Second hidden-layer activation.")
@click.option("--target", "target", required=True, callback=_target)
@click.option("--save", type=click.Path(dir_okay=False), default=None, help="Write the trained network as JSON.")
@click.option("--curve", type=click.Path(dir_okay=False), default=None, help="Write pair,target,epoch,loss CSV here.")
@_common_options
@_config_errors
def train(a1, a2, target, save, curve, **kw):
    """Train one activation pair on one target and score it on the test range.

    Seeds are derived exactly as in ``sweep``, so this reproduces a sweep trial.
    """
    plan = _apply_overrides(sweep.SweepPlan(pairs=[(a1, a2)], targets=[target]), kw)
    result, net = sweep.run_trial(plan, (a1, a2), target, keep_network=True)
    out = open(curve, "w", newline="") if curve else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["pair", "target", "epoch", "loss"])
        for epoch, loss in enumerate(result.history.losses, start=1):
            w.writerow([result.name, target.label, epoch, repr(loss)])
    finally:
        if curve:
            out.close()
    summary = {
        "pair": result.name,
        "target": target.label,
        "final_train_loss": result.final_train_loss,
        "test_mae": result.test_mae,
        "test_pct_err": result.test_pct_err,
        "diverged": result.diverged,
    }
    click.echo(json.dumps(summary), err=bool(not curve))
    if save:
        net.save(save)
        click.echo(f"saved {save}", err=True)


@main.command("eval")
@click.option("--model", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--data", type=click.Path(exists=True, dir_okay=False), required=True)
@_config_errors
def eval_cmd(model, data):
    """Score a saved network on a dataset CSV."""
    net = Network.load(model)
    dataset = Dataset.load(data)
    rep = evaluate(net, dataset)
    click.echo(json.dumps({
        "pair": "_".join(rep.pair),
        "target": rep.target.label,
        "test_mae": rep.test_mae,
        "test_pct_err": rep.test_pct_err,
        "diverged": rep.diverged,
    }))


@main.command("sweep")
@click.option("--smoke", is_flag=True, help="Proposed pair plus 4 baselines, 20 epochs, 2,000 samples.")
@click.option("--jobs", type=int, default=1, show_default=True, help="Worker processes.")
@click.option("--out", type=click.Path(file_okay=False), default="runs/sweep", show_default=True)
@click.option("--plan", "plan_path", type=click.Path(exists=True, dir_okay=False), default=None, help="JSON plan file.")
@_common_options
@_config_errors
def sweep_cmd(smoke, jobs, out, plan_path, **kw):
    """Run every activation pair on every target and write the report."""
    if plan_path:
        plan = sweep.SweepPlan.from_dict(json.loads(Path(plan_path).read_text()))
    elif smoke:
        plan = sweep.SweepPlan.smoke()
    else:
        plan = sweep.SweepPlan()
    plan = replace(_apply_overrides(plan, kw), jobs=jobs)
    total = len(plan.pairs) * len(plan.targets)
    start = time.perf_counter()
    with click.progressbar(length=total, label=f"{total} trials", file=sys.stderr) as bar:
        results = sweep.run_sweep(plan, progress=bar.update)
    elapsed = time.perf_counter() - start
    paths = sweep.report(results, out)
    sweep.write_plan(plan, Path(out) / "plan.json")
    (Path(out) / "sweep_meta.json").write_text(json.dumps({"trials": len(results), "wall_s": elapsed}, indent=2))
    for p in paths:
        click.echo(f"wrote {p}")
    click.echo(f"{len(results)} trials in {elapsed:.1f}s")


@main.command("report")
@click.option("--in", "in_dir", type=click.Path(exists=True, file_okay=False), required=True)
def report_cmd(in_dir):
    """Regenerate table1.md and top_curves.csv from a sweep directory."""
    results = sweep.load_results(in_dir)
    table = sweep.table1(results)
    Path(in_dir, "table1.md").write_text(table)
    sweep.write_curves_csv(sweep.top_curves(results), Path(in_dir, "top_curves.csv"))
    click.echo(table, nl=False)


if __name__ == "__main__":
    main()
