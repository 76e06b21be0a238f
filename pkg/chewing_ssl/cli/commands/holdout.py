"""Final evaluation on the holdout subjects."""

import json
import os
from typing import Dict

import click

from chewing_ssl.cli.commands.sweep import SELECTIONS_NAME
from chewing_ssl.cli.context import HOLDOUT_DIR, SWEEP_DIR, RunContext, pass_run
from chewing_ssl.core.model import save_weights
from chewing_ssl.core.train import run_holdout
from chewing_ssl.utils.file_utils import require_artifact
from chewing_ssl.utils.formatter import display_metric_rows
from chewing_ssl.utils.logger import get_logger

logger = get_logger(__name__)


def _selections(run: RunContext, from_sweep: bool) -> Dict[str, float]:
    if not from_sweep:
        return dict(run.run.selections)
    path = require_artifact(run.path(SWEEP_DIR, SELECTIONS_NAME), "sweep")
    with open(path, "r", encoding="utf-8") as fh:
        return {variant: float(tau) for variant, tau in json.load(fh).items()}


@click.command()
@click.option("--from-sweep", is_flag=True, help="Use the temperatures selected by `sweep`")
@click.option("--format", "-f", "output_format", type=click.Choice(["table", "json"]), default="table")
@pass_run
def holdout(run: RunContext, from_sweep: bool, output_format: str) -> None:
    """Train the selected variants and the supervised baseline, test on the holdout subjects.

    Writes holdout.json, holdout.txt and one predictor weight file per row
    under models/.
    """
    selections = _selections(run, from_sweep)
    development = run.development()
    holdout_recordings = run.holdout()
    store = run.pretrain_store(development)
    directory = run.start(HOLDOUT_DIR)

    rows = run_holdout(development, holdout_recordings, selections, run.run.evaluation(), store)
    for row in rows:
        save_weights(row.predictor, os.path.join(directory, "models", f"{row.variant}.weights"))
    with open(os.path.join(directory, "holdout.json"), "w", encoding="utf-8") as fh:
        json.dump([row.to_dict() for row in rows], fh, indent=2, sort_keys=True)

    display_metric_rows(rows, ["model", "tau"], output_format, os.path.join(directory, "holdout.txt"))
