"""Temperature sweep over the development subjects."""

import json
import os
from typing import Dict, List

import click

from chewing_ssl.cli.context import SWEEP_DIR, RunContext, pass_run
from chewing_ssl.core.train import SweepRow, run_loso_sweep
from chewing_ssl.utils.formatter import display_metric_rows
from chewing_ssl.utils.logger import get_logger

logger = get_logger(__name__)

SELECTIONS_NAME = "selections.json"


def select_temperatures(rows: List[SweepRow]) -> Dict[str, float]:
    """Temperature with the highest pooled F1 per variant; ties keep the smaller tau."""
    best: Dict[str, SweepRow] = {}
    for row in rows:
        current = best.get(row.variant)
        if current is None or (row.report.f1, -row.tau) > (current.report.f1, -current.tau):
            best[row.variant] = row
    return {variant: row.tau for variant, row in best.items()}


@click.command()
@click.option("--format", "-f", "output_format", type=click.Choice(["table", "json"]), default="table")
@pass_run
def sweep(run: RunContext, output_format: str) -> None:
    """LOSO evaluation of every variant at every temperature in sweep.taus.

    Pretrained weights under pretrain/ are reused when their settings match.
    Writes sweep.json, sweep.txt and the per-variant best temperatures to
    selections.json, which `holdout --from-sweep` reads.
    """
    recordings = run.development()
    store = run.pretrain_store(recordings)
    directory = run.start(SWEEP_DIR)

    rows = run_loso_sweep(recordings, run.run.taus, run.run.variants, run.run.evaluation(), store)
    with open(os.path.join(directory, "sweep.json"), "w", encoding="utf-8") as fh:
        json.dump([row.to_dict() for row in rows], fh, indent=2, sort_keys=True)
    selections = select_temperatures(rows)
    with open(os.path.join(directory, SELECTIONS_NAME), "w", encoding="utf-8") as fh:
        json.dump(selections, fh, indent=2, sort_keys=True)
    logger.info(f"Selected temperatures: {selections}")

    display_metric_rows(rows, ["model", "tau"], output_format, os.path.join(directory, "sweep.txt"))
