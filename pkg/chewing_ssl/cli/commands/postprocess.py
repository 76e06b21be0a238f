"""Chew, bout and meal extraction from window scores."""

import glob
import os
from typing import Optional, Tuple

import click
from tabulate import tabulate

from chewing_ssl.cli.context import POSTPROCESS_DIR, PREDICT_DIR, RunContext, pass_run
from chewing_ssl.core.errors import ArtifactMissingError
from chewing_ssl.core.postprocess import pipeline, read_scores_csv, write_intervals_csv
from chewing_ssl.utils.formatter import format_duration, to_json
from chewing_ssl.utils.logger import get_logger

logger = get_logger(__name__)


@click.command()
@click.argument("scores", nargs=-1, type=click.Path(exists=True, dir_okay=False))
@click.option("--window-s", type=float, help="Window duration in seconds, defaults to window_len / target rate")
@click.option("--format", "-f", "output_format", type=click.Choice(["table", "json"]), default="table")
@pass_run
def postprocess(run: RunContext, scores: Tuple[str, ...], window_s: Optional[float], output_format: str) -> None:
    """Turn window scores into chews, bouts and meals.

    SCORES are CSV files written by `predict`; without arguments every score
    file under predict/ is processed. Each input gets a directory with
    chews.csv, bouts.csv and meals.csv.
    """
    paths = list(scores) or sorted(glob.glob(os.path.join(run.path(PREDICT_DIR), "*", "*.csv")))
    if not paths:
        raise ArtifactMissingError(run.path(PREDICT_DIR), "predict")
    w = run.run.windows
    window_s = window_s or w.window_len / w.target_rate_hz
    settings = run.run.postprocess
    directory = run.start(POSTPROCESS_DIR)

    summary = []
    for path in paths:
        track = read_scores_csv(path, window_s, settings.threshold)
        result = pipeline(track, settings)
        stem = os.path.splitext(os.path.basename(path))[0]
        parent = os.path.basename(os.path.dirname(os.path.abspath(path)))
        target = os.path.join(directory, parent, stem)
        os.makedirs(target, exist_ok=True)
        write_intervals_csv(result.chews, os.path.join(target, "chews.csv"))
        write_intervals_csv(result.bouts, os.path.join(target, "bouts.csv"))
        write_intervals_csv(result.meals, os.path.join(target, "meals.csv"), with_ratio=True)
        summary.append({
            "scores": path,
            "chews": len(result.chews),
            "bouts": len(result.bouts),
            "meals": len(result.meals),
            "meal_time": format_duration(sum(m.duration_s for m in result.meals)),
        })
        logger.info(f"{path}: {len(result.chews)} chews, {len(result.bouts)} bouts, {len(result.meals)} meals")

    if output_format == "json":
        click.echo(to_json(summary))
    else:
        click.echo(tabulate([list(s.values()) for s in summary], headers=list(summary[0]), tablefmt="grid"))
