"""Classifier head training on frozen pretrained features."""

import csv
import json
import os
from dataclasses import replace
from typing import Optional

import click

from chewing_ssl.cli.context import HEADS_DIR, PRETRAIN_DIR, RunContext, pass_run
from chewing_ssl.core import train
from chewing_ssl.core.constants import SSL_VARIANTS, VARIANT_LABELS
from chewing_ssl.core.dataset import pick_validation
from chewing_ssl.core.model import build_h, save_weights
from chewing_ssl.utils.file_utils import require_artifacts
from chewing_ssl.utils.formatter import display_metric_rows
from chewing_ssl.utils.logger import get_logger

logger = get_logger(__name__)


def head_name(variant: str, tau: float) -> str:
    return f"{variant}_tau{tau:g}"


def write_head_losses(path: str, fit: train.HeadFitResult) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "train_loss", "val_loss"])
        for epoch, (tr, va) in enumerate(zip(fit.train_losses, fit.val_losses), start=1):
            writer.writerow([epoch, repr(float(tr)), repr(float(va))])


@click.command("train-head")
@click.option("--variant", type=click.Choice(SSL_VARIANTS), help="Head variant, overrides head.variant")
@click.option("--tau", type=float, help="Temperature of the pretrained weights, defaults to pretrain.tau")
@click.option("--folds/--no-folds", default=True, help="Also run leave-one-subject-out folds")
@click.option("--format", "-f", "output_format", type=click.Choice(["table", "json"]), default="table")
@pass_run
def train_head(run: RunContext, variant: Optional[str], tau: Optional[float], folds: bool, output_format: str) -> None:
    """Train the classifier head h for one variant.

    Needs the weights written by `pretrain` for the variant's head kind and
    temperature. Writes h.weights and the frozen feature stack, the loss
    curves and, with --folds, one FoldResult per development subject.
    """
    variant = variant or run.run.head_variant
    tau = run.run.pretrain.tau if tau is None else tau
    head_kind, retain = train.VARIANT_HEADS[variant]
    pretrained = train.pretrain_directory(run.path(PRETRAIN_DIR), head_kind, tau)
    require_artifacts([os.path.join(pretrained, name) for name in ("f.weights", "g.weights")], "pretrain")

    recordings = run.development()
    store = run.pretrain_store(recordings)
    directory = run.start(HEADS_DIR, head_name(variant, tau))
    pre = store.get(head_kind, tau)

    head_cfg = replace(run.run.head, retain_gNL1=retain)
    stack = train.feature_stack(pre.f, pre.g, retain)
    windows = run.training_windows(recordings)
    train_ids, val_ids = pick_validation([r.subject_id for r in recordings], run.run.split.n_validation, run.run.seed)
    train_set = windows.subset(train.subject_mask(windows, sorted(train_ids)))
    val_set = windows.subset(train.subject_mask(windows, sorted(val_ids)))
    h = build_h(run.run.seed + 1, in_dim=stack.output_shape[0], dtype=run.run.pretrain.dtype)
    fit = train.train_head(stack, h, train_set, val_set, head_cfg)

    save_weights(stack, os.path.join(directory, "stack.weights"))
    save_weights(fit.model, os.path.join(directory, "h.weights"))
    write_head_losses(os.path.join(directory, "head_losses.csv"), fit)
    meta = {
        "variant": variant,
        "model": VARIANT_LABELS[variant],
        "tau": tau,
        "train_subjects": sorted(train_ids),
        "validation_subjects": sorted(val_ids),
        "selected_epoch": fit.best_epoch,
        "best_val_loss": fit.best_val_loss,
    }
    with open(os.path.join(directory, "head.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
    logger.info(f"{VARIANT_LABELS[variant]}: selected epoch {fit.best_epoch}, weights in {directory}")

    if folds:
        rows = train.run_loso_sweep(recordings, [tau], [variant], run.run.evaluation(), store)
        with open(os.path.join(directory, "folds.json"), "w", encoding="utf-8") as fh:
            json.dump(rows[0].to_dict(), fh, indent=2, sort_keys=True)
        display_metric_rows(rows, ["model", "tau"], output_format, os.path.join(directory, "folds.txt"))
    else:
        click.echo(json.dumps(meta, indent=2, sort_keys=True))
