"""Window scores for preprocessed subjects."""

import os
from typing import Optional, Tuple

import click
import numpy as np
from tabulate import tabulate

from chewing_ssl.cli.commands.train_head import head_name
from chewing_ssl.cli.context import HEADS_DIR, PREDICT_DIR, RunContext, pass_run
from chewing_ssl.core.constants import SSL_VARIANTS
from chewing_ssl.core.model import load_weights
from chewing_ssl.core.postprocess import write_scores_csv
from chewing_ssl.core.train import predict_recording, predictor
from chewing_ssl.utils.file_utils import require_artifacts, sanitize_filename
from chewing_ssl.utils.formatter import to_json
from chewing_ssl.utils.logger import get_logger

logger = get_logger(__name__)


@click.command()
@click.option("--variant", type=click.Choice(SSL_VARIANTS), help="Head variant, overrides head.variant")
@click.option("--tau", type=float, help="Temperature of the trained head, defaults to pretrain.tau")
@click.option("--subject", "subjects", multiple=True, help="Subject to score, defaults to the holdout subjects")
@click.option("--format", "-f", "output_format", type=click.Choice(["table", "json"]), default="table")
@pass_run
def predict(
    run: RunContext, variant: Optional[str], tau: Optional[float], subjects: Tuple[str, ...], output_format: str
) -> None:
    """Score every window at the inference stride with a head from `train-head`.

    Writes predict/<variant>_tau<tau>/<subject>.csv with columns
    window_start_s,score, the input of `postprocess`.
    """
    variant = variant or run.run.head_variant
    tau = run.run.pretrain.tau if tau is None else tau
    name = head_name(variant, tau)
    stack_path, h_path = require_artifacts(
        [run.path(HEADS_DIR, name, "stack.weights"), run.path(HEADS_DIR, name, "h.weights")], "train-head"
    )
    recordings = run.recordings(list(subjects)) if subjects else run.holdout()
    directory = run.start(PREDICT_DIR, name)
    model = predictor(load_weights(stack_path), load_weights(h_path))

    w = run.run.windows
    head = run.run.head
    summary = []
    for rec in recordings:
        track = predict_recording(
            model, rec, w.inference_stride, w.window_len, run.run.postprocess.threshold, head.chunk_size, head.workers
        )
        path = os.path.join(directory, f"{sanitize_filename(rec.subject_id)}.csv")
        write_scores_csv(track, path)
        summary.append({
            "subject_id": rec.subject_id,
            "windows": len(track),
            "positive_fraction": round(float(np.mean(track.scores >= track.threshold)) if len(track) else 0.0, 4),
            "scores": path,
        })
        logger.info(f"Scored {len(track)} windows of {rec.subject_id}")

    if output_format == "json":
        click.echo(to_json(summary))
    elif summary:
        click.echo(tabulate([list(s.values()) for s in summary], headers=list(summary[0]), tablefmt="grid"))
