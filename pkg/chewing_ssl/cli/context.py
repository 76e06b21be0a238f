"""Shared state of one CLI invocation: resolved config, run directories and inputs."""

import os
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple

import click

from chewing_ssl.core.dataset import Recording, WindowSet, load_store, load_store_index, window_set
from chewing_ssl.core.train import PretrainStore
from chewing_ssl.utils.config import RESOLVED_CONFIG_NAME, RunConfig, save_config
from chewing_ssl.utils.logger import add_file_handler, get_logger

logger = get_logger(__name__)

# Artifact directories under the output root
SYNTH_DIR = "synth"
STORE_DIR = "store"
PRETRAIN_DIR = "pretrain"
HEADS_DIR = "heads"
SWEEP_DIR = "sweep"
HOLDOUT_DIR = "holdout"
PREDICT_DIR = "predict"
POSTPROCESS_DIR = "postprocess"

MANIFEST_NAME = "manifest.json"
RUN_LOG_NAME = "run.log"


@dataclass
class RunContext:
    config: Dict[str, Any]
    run: RunConfig
    quiet: bool = False

    @property
    def output_dir(self) -> str:
        return self.run.output_dir

    def path(self, *parts: str) -> str:
        return os.path.join(self.output_dir, *parts)

    def start(self, *parts: str) -> str:
        """Create a run directory and record the resolved config and log there."""
        directory = self.path(*parts)
        os.makedirs(directory, exist_ok=True)
        save_config(self.config, os.path.join(directory, RESOLVED_CONFIG_NAME))
        add_file_handler(os.path.join(directory, RUN_LOG_NAME))
        logger.info(f"Run directory: {directory}")
        return directory

    @property
    def manifest_path(self) -> str:
        return self.run.manifest or self.path(SYNTH_DIR, MANIFEST_NAME)

    @property
    def store_dir(self) -> str:
        return self.path(STORE_DIR)

    def split(self) -> Tuple[List[str], List[str]]:
        """Development and holdout subject ids recorded by `preprocess`."""
        split = load_store_index(self.store_dir)["split"]
        return sorted(split["development"]), sorted(split["holdout"])

    def development(self) -> List[Recording]:
        return load_store(self.store_dir, self.split()[0])

    def holdout(self) -> List[Recording]:
        return load_store(self.store_dir, self.split()[1])

    def recordings(self, subject_ids: List[str]) -> List[Recording]:
        recordings = load_store(self.store_dir, subject_ids)
        missing = set(subject_ids) - {r.subject_id for r in recordings}
        if missing:
            raise click.BadParameter(f"subjects not in the window store: {sorted(missing)}", param_hint="--subject")
        return recordings

    def pretrain_store(self, recordings: List[Recording]) -> PretrainStore:
        """Pretrained weights under `<output>/pretrain`, reused when settings match."""
        windows = self.training_windows(recordings)
        return PretrainStore(
            windows.windows, [r.subject_id for r in recordings], self.run.pretrain, root=self.path(PRETRAIN_DIR)
        )

    def training_windows(self, recordings: List[Recording]) -> WindowSet:
        w = self.run.windows
        return window_set(recordings, w.window_len, w.train_stride, w.coverage_threshold)


pass_run = click.make_pass_decorator(RunContext)
