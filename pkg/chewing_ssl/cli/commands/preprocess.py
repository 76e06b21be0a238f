"""WAV ingestion into the window store."""

import click
from tabulate import tabulate

from chewing_ssl.cli.context import STORE_DIR, RunContext, pass_run
from chewing_ssl.core.dataset import label_windows, load_manifest, load_recording, make_holdout_split, save_store
from chewing_ssl.utils.formatter import to_json
from chewing_ssl.utils.logger import get_logger

logger = get_logger(__name__)


@click.command()
@click.option("--format", "-f", "output_format", type=click.Choice(["table", "json"]), default="table")
@pass_run
def preprocess(run: RunContext, output_format: str) -> None:
    """Decimate and high-pass every manifest recording, and split the subjects.

    The development/holdout split is drawn once here and recorded in the
    store so every later command sees the same subjects.
    """
    manifest = run.manifest_path
    entries = load_manifest(manifest)
    directory = run.start(STORE_DIR)
    w = run.run.windows
    recordings = [load_recording(entry, w.target_rate_hz) for entry in entries]

    split = make_holdout_split([r.subject_id for r in recordings], run.run.split.n_holdout, run.run.seed)
    save_store(
        recordings,
        directory,
        {
            "manifest": manifest,
            "target_rate_hz": w.target_rate_hz,
            "split": {"development": sorted(split.development), "holdout": sorted(split.holdout)},
        },
    )

    summary = []
    for rec in recordings:
        labeled = label_windows(rec, w.window_len, w.train_stride, w.coverage_threshold)
        positives = sum(lw.label for lw in labeled)
        summary.append({
            "subject_id": rec.subject_id,
            "set": "holdout" if rec.subject_id in split.holdout else "development",
            "duration_s": round(rec.audio.duration_s, 3),
            "windows": len(labeled),
            "chewing_windows": positives,
        })
    if output_format == "json":
        click.echo(to_json(summary))
    else:
        click.echo(tabulate([list(s.values()) for s in summary], headers=list(summary[0]), tablefmt="grid"))
