"""Self-supervised pretraining command."""

import json
import os
from dataclasses import replace
from typing import Optional

import click

from chewing_ssl.cli.context import PRETRAIN_DIR, RunContext, pass_run
from chewing_ssl.core import train
from chewing_ssl.utils.formatter import display_mapping
from chewing_ssl.utils.logger import get_logger

logger = get_logger(__name__)


@click.command()
@click.option("--tau", type=float, help="Temperature, overrides pretrain.tau")
@click.option("--head-kind", type=click.Choice(["linear", "nonlinear"]), help="Projection head, overrides pretrain.head_kind")
@click.option("--format", "-f", "output_format", type=click.Choice(["table", "json"]), default="table")
@pass_run
def pretrain(run: RunContext, tau: Optional[float], head_kind: Optional[str], output_format: str) -> None:
    """Pretrain f and the projection head on the development subjects.

    Writes f.weights, g.weights, loss_curve.csv, pretrain.json and a model
    summary under pretrain/<head_kind>_tau<tau>/, replacing earlier weights.
    """
    cfg = run.run.pretrain
    cfg = replace(cfg, tau=cfg.tau if tau is None else tau, head_kind=head_kind or cfg.head_kind)
    recordings = run.development()
    windows = run.training_windows(recordings)
    directory = run.start(PRETRAIN_DIR, train.pretrain_name(cfg.head_kind, cfg.tau))

    result = train.pretrain(windows.windows, cfg)
    meta = {"config": cfg.signature(), "subjects": sorted(r.subject_id for r in recordings)}
    train.save_pretrained(result, directory, meta)

    summary = {"f": result.f.summary(), "g": result.g.summary()}
    with open(os.path.join(directory, "model_summary.json"), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)

    display_mapping(
        {
            "head_kind": cfg.head_kind,
            "tau": cfg.tau,
            "windows": len(windows),
            "epochs": cfg.epochs,
            "final_loss": result.epoch_losses[-1],
            "f_parameters": result.f.num_parameters(),
            "g_parameters": result.g.num_parameters(),
            "directory": directory,
        },
        output_format,
    )
