"""Synthetic corpus generation."""

import os

import click

from chewing_ssl.cli.context import MANIFEST_NAME, SYNTH_DIR, RunContext, pass_run
from chewing_ssl.core.dataset import save_annotations, save_manifest, save_wav, synthesize_corpus
from chewing_ssl.utils.file_utils import sanitize_filename
from chewing_ssl.utils.formatter import display_mapping, format_duration
from chewing_ssl.utils.logger import get_logger

logger = get_logger(__name__)


@click.command()
@click.option("--format", "-f", "output_format", type=click.Choice(["table", "json"]), default="table")
@pass_run
def synth(run: RunContext, output_format: str) -> None:
    """Generate synthetic recordings with meal annotations and a manifest."""
    settings = run.run.synth
    directory = run.start(SYNTH_DIR)
    recordings = synthesize_corpus(
        settings.n_subjects,
        settings.duration_s,
        run.run.seed,
        sample_rate_hz=settings.sample_rate_hz,
        chew_rate_hz=settings.chew_rate_hz,
        chew_amplitude=settings.chew_amplitude,
        burst_decay_s=settings.burst_decay_s,
        background_noise_std=settings.background_noise_std,
    )

    entries = []
    for rec in recordings:
        stem = sanitize_filename(rec.subject_id)
        save_wav(rec.audio, os.path.join(directory, f"{stem}.wav"), settings.encoding)
        save_annotations(rec.chewing, os.path.join(directory, f"{stem}.csv"))
        entries.append({"subject_id": rec.subject_id, "wav_path": f"{stem}.wav", "annotation_path": f"{stem}.csv"})
    manifest = os.path.join(directory, MANIFEST_NAME)
    save_manifest(entries, manifest)
    logger.info(f"Wrote {len(entries)} recordings and {manifest}")

    display_mapping(
        {
            "subjects": len(entries),
            "duration": format_duration(settings.duration_s),
            "meals": sum(len(r.chewing) for r in recordings),
            "manifest": manifest,
        },
        output_format,
    )
