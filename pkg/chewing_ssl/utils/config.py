"""Run configuration for Chewing SSL.

A run is driven by one nested JSON document. It is resolved from, in order:
the defaults, a named preset, a config file, and `section.key=value`
overrides. Unknown keys and values of the wrong type are rejected before
any work starts, and the resolved document is saved next to the outputs.
"""

import copy
import json
import os
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Mapping, Optional

from chewing_ssl.core.augment import AugmentConfig
from chewing_ssl.core.constants import (
    BOUT_MERGE_GAP_S,
    CHEW_MERGE_GAP_S,
    COVERAGE_THRESHOLD,
    INFERENCE_STRIDE,
    MIN_BOUT_RATIO,
    MIN_BOUT_S,
    SCORE_THRESHOLD,
    SSL_VARIANTS,
    TARGET_RATE_HZ,
    TAU_SWEEP,
    TRAIN_STRIDE,
    VARIANT_NONLINEAR_RETAIN,
    WINDOW_LEN,
)
from chewing_ssl.core.errors import ChewingError, ConfigError
from chewing_ssl.core.optim import AdamConfig, LarsConfig, ScheduleConfig
from chewing_ssl.core.postprocess import PostprocessSettings
from chewing_ssl.core.train import PRECISIONS, EvaluationConfig, HeadTrainConfig, PretrainConfig
from chewing_ssl.utils.env import get_default_config_path, get_output_root
from chewing_ssl.utils.logger import get_logger

logger = get_logger(__name__)

RESOLVED_CONFIG_NAME = "resolved_config.json"
SELECTIONS_KEY = "holdout.selections"

DEFAULT_CONFIG: Dict[str, Any] = {
    "seed": 0,
    "workers": 4,
    "precision": "double",
    "paths": {
        "output_dir": "",
        "manifest": "",
    },
    "synth": {
        "n_subjects": 6,
        "duration_s": 600.0,
        "sample_rate_hz": TARGET_RATE_HZ,
        "chew_rate_hz": 1.5,
        "chew_amplitude": 0.2,
        "burst_decay_s": 0.05,
        "background_noise_std": 0.01,
        "encoding": "float32",
    },
    "split": {
        "n_holdout": 2,
        "n_validation": 2,
    },
    "windows": {
        "window_len": WINDOW_LEN,
        "train_stride": TRAIN_STRIDE,
        "inference_stride": INFERENCE_STRIDE,
        "coverage_threshold": COVERAGE_THRESHOLD,
        "target_rate_hz": TARGET_RATE_HZ,
    },
    "augment": {
        "amp_low": 0.5,
        "amp_high": 2.0,
        "noise_bound": 0.005,
    },
    "pretrain": {
        "batch_size": 256,
        "epochs": 100,
        "tau": 0.5,
        "head_kind": "nonlinear",
    },
    "lars": {
        "momentum": 0.9,
        "weight_decay": 1e-6,
        "eta": 1e-3,
    },
    "schedule": {
        "warmup_fraction": 0.1,
        "max_lr": 0.3,
    },
    "head": {
        "variant": VARIANT_NONLINEAR_RETAIN,
        "batch_size": 64,
        "epochs": 100,
        "lr": 1e-3,
        "beta1": 0.9,
        "beta2": 0.999,
        "epsilon": 1e-8,
        "cache_features": True,
        "chunk_size": 128,
    },
    "supervised": {
        "batch_size": 64,
        "epochs": 100,
        "lr": 1e-3,
    },
    "sweep": {
        "taus": list(TAU_SWEEP),
        "variants": list(SSL_VARIANTS),
    },
    "holdout": {
        "selections": {variant: 0.5 for variant in SSL_VARIANTS},
    },
    "postprocess": {
        "threshold": SCORE_THRESHOLD,
        "chew_gap_s": CHEW_MERGE_GAP_S,
        "min_bout_s": MIN_BOUT_S,
        "meal_gap_s": BOUT_MERGE_GAP_S,
        "min_ratio": MIN_BOUT_RATIO,
    },
}

PRESETS: Dict[str, Dict[str, Any]] = {
    "full": {},
    "small": {
        "synth": {"n_subjects": 6, "duration_s": 600.0},
        "pretrain": {"batch_size": 64, "epochs": 20},
        "head": {"epochs": 30},
        "supervised": {"epochs": 30},
        "sweep": {"taus": [0.5]},
    },
}

CHOICES: Dict[str, Iterable[Any]] = {
    "precision": PRECISIONS,
    "pretrain.head_kind": ("linear", "nonlinear"),
    "head.variant": SSL_VARIANTS,
    "synth.encoding": ("float32", "pcm16"),
}

_TYPE_NAMES = {bool: "boolean", int: "integer", float: "number", str: "string", list: "array", dict: "object"}


def _schema_of(value: Any, dotted: str = "") -> Dict[str, Any]:
    if dotted == SELECTIONS_KEY:
        return {"type": "object", "additionalProperties": {"type": "number"}, "default": value}
    if isinstance(value, dict):
        return {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: _schema_of(v, f"{dotted}.{k}" if dotted else k) for k, v in value.items()},
        }
    schema: Dict[str, Any] = {"type": _TYPE_NAMES[type(value)], "default": value}
    if isinstance(value, list) and value:
        schema["items"] = {"type": _TYPE_NAMES[type(value[0])]}
    return schema


def config_schema() -> Dict[str, Any]:
    """JSON schema of the run configuration, derived from the defaults."""
    schema = _schema_of(DEFAULT_CONFIG)
    for dotted, options in CHOICES.items():
        node = schema
        for part in dotted.split("."):
            node = node["properties"][part]
        node["enum"] = list(options)
    return schema


CONFIG_SCHEMA = config_schema()


def _type_ok(expected: Any, value: Any) -> bool:
    if isinstance(expected, bool):
        return isinstance(value, bool)
    if isinstance(expected, int):
        return isinstance(value, int) and not isinstance(value, bool)
    if isinstance(expected, float):
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    return isinstance(value, type(expected))


def _merge(base: Dict[str, Any], update: Mapping[str, Any], path: str = "") -> None:
    """Merge `update` into `base` in place, validating keys and types against `base`."""
    if not isinstance(update, Mapping):
        raise ConfigError(f"{path or 'config'} must be an object, got {type(update).__name__}")
    for key, value in update.items():
        dotted = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key: {dotted}", {"key": dotted})
        expected = base[key]
        if isinstance(expected, dict) and dotted != SELECTIONS_KEY:
            _merge(expected, value, dotted)
            continue
        if not _type_ok(expected, value):
            raise ConfigError(
                f"{dotted} must be {_TYPE_NAMES[type(expected)]}, got {value!r}",
                {"key": dotted, "value": value},
            )
        if isinstance(expected, float):
            value = float(value)
        base[key] = copy.deepcopy(value)


def coerce_value(text: str, expected: Any) -> Any:
    """Parse a command-line override into the type of its default."""
    try:
        if isinstance(expected, bool):
            lowered = text.strip().lower()
            if lowered in ("true", "1", "yes", "on"):
                return True
            if lowered in ("false", "0", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {text}")
        if isinstance(expected, int):
            return int(text)
        if isinstance(expected, float):
            return float(text)
        if isinstance(expected, list):
            if text.strip().startswith("["):
                return json.loads(text)
            item = expected[0] if expected else ""
            return [coerce_value(part, item) for part in text.split(",") if part.strip()]
        if isinstance(expected, dict):
            return json.loads(text)
        return text
    except (ValueError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot parse {text!r}: {e}") from e


def parse_override(override: str, config: Mapping[str, Any]) -> Dict[str, Any]:
    """Turn `section.key=value` into a nested update."""
    if "=" not in override:
        raise ConfigError(f"override must look like section.key=value, got {override!r}")
    dotted, text = override.split("=", 1)
    parts = dotted.strip().split(".")
    node: Any = config
    for part in parts:
        if not isinstance(node, Mapping) or part not in node:
            raise ConfigError(f"unknown config key: {dotted}", {"key": dotted})
        node = node[part]
    value = coerce_value(text, node)
    if ".".join(parts[:-1]) == SELECTIONS_KEY:
        # one variant of the selection mapping; the others stay
        parts, value = parts[:-1], {**config["holdout"]["selections"], parts[-1]: value}
    update: Dict[str, Any] = {parts[-1]: value}
    for part in reversed(parts[:-1]):
        update = {part: update}
    return update


def _validate(config: Dict[str, Any]) -> None:
    for dotted, options in CHOICES.items():
        node: Any = config
        for part in dotted.split("."):
            node = node[part]
        if node not in options:
            raise ConfigError(f"{dotted} must be one of {list(options)}, got {node!r}", {"key": dotted})
    bad = set(config["sweep"]["variants"]) - set(SSL_VARIANTS)
    if bad:
        raise ConfigError(f"sweep.variants contains unknown variants {sorted(bad)}")
    selections = config["holdout"]["selections"]
    bad = set(selections) - set(SSL_VARIANTS)
    if bad:
        raise ConfigError(f"holdout.selections contains unknown variants {sorted(bad)}")
    for variant, tau in selections.items():
        if isinstance(tau, bool) or not isinstance(tau, (int, float)) or tau <= 0:
            raise ConfigError(f"holdout.selections.{variant} must be a positive number, got {tau!r}")
    if not all(isinstance(t, (int, float)) and not isinstance(t, bool) and t > 0 for t in config["sweep"]["taus"]):
        raise ConfigError(f"sweep.taus must be positive numbers, got {config['sweep']['taus']}")


def load_config(
    path: Optional[str] = None,
    preset: Optional[str] = None,
    overrides: Iterable[str] = (),
    output_dir: Optional[str] = None,
) -> Dict[str, Any]:
    """Resolve the run configuration.

    Args:
        path: JSON config file, defaults to $CHEWING_SSL_CONFIG when set
        preset: Name of a preset applied before the file
        overrides: `section.key=value` strings applied last
        output_dir: Output directory, overrides the config value

    Returns:
        The resolved configuration

    Raises:
        ConfigError: On unknown keys, wrong types or invalid choices
    """
    config = copy.deepcopy(DEFAULT_CONFIG)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}, choose from {sorted(PRESETS)}")
        _merge(config, PRESETS[preset])

    path = path or get_default_config_path()
    if path:
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}", {"path": path})
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}", {"path": path}) from e
        _merge(config, data)
        logger.debug(f"Loaded configuration from {path}")

    for override in overrides:
        _merge(config, parse_override(override, config))

    if output_dir:
        config["paths"]["output_dir"] = output_dir
    config["paths"]["output_dir"] = os.path.abspath(config["paths"]["output_dir"] or get_output_root())
    _validate(config)
    return config


def save_config(config: Mapping[str, Any], path: str) -> str:
    """Write the resolved configuration snapshot."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(config, f, indent=2, sort_keys=True, ensure_ascii=False)
    logger.debug(f"Configuration saved to {path}")
    return path


@dataclass(frozen=True)
class SynthSettings:
    n_subjects: int
    duration_s: float
    sample_rate_hz: float
    chew_rate_hz: float
    chew_amplitude: float
    burst_decay_s: float
    background_noise_std: float
    encoding: str


@dataclass(frozen=True)
class SplitSettings:
    n_holdout: int
    n_validation: int


@dataclass(frozen=True)
class WindowSettings:
    window_len: int
    train_stride: int
    inference_stride: int
    coverage_threshold: float
    target_rate_hz: float


@dataclass(frozen=True)
class RunConfig:
    """Typed view of a resolved configuration."""

    seed: int
    workers: int
    precision: str
    output_dir: str
    manifest: str
    synth: SynthSettings
    split: SplitSettings
    windows: WindowSettings
    augment: AugmentConfig
    pretrain: PretrainConfig
    head: HeadTrainConfig
    head_variant: str
    supervised: HeadTrainConfig
    taus: List[float]
    variants: List[str]
    selections: Dict[str, float]
    postprocess: PostprocessSettings

    def evaluation(self) -> EvaluationConfig:
        return EvaluationConfig(
            pretrain=self.pretrain,
            head=self.head,
            supervised=self.supervised,
            n_validation=self.split.n_validation,
            window_len=self.windows.window_len,
            train_stride=self.windows.train_stride,
            coverage_threshold=self.windows.coverage_threshold,
            seed=self.seed,
        )


def build_run_config(config: Mapping[str, Any], show_progress: bool = True) -> RunConfig:
    """Build the typed run configuration.

    Raises:
        ConfigError: If a value is rejected by the component it configures
    """
    try:
        seed = config["seed"]
        workers = max(1, config["workers"])
        augment = AugmentConfig(seed=seed, **config["augment"])
        schedule = ScheduleConfig(total_epochs=config["pretrain"]["epochs"], **config["schedule"])
        lars = LarsConfig(base_lr=schedule.max_lr, **config["lars"])
        pretrain = PretrainConfig(
            augment=augment,
            lars=lars,
            schedule=schedule,
            seed=seed,
            precision=config["precision"],
            show_progress=show_progress,
            **config["pretrain"],
        )
        head_raw = dict(config["head"])
        variant = head_raw.pop("variant")
        adam = AdamConfig(**{k: head_raw.pop(k) for k in ("lr", "beta1", "beta2", "epsilon")})
        head = HeadTrainConfig(
            adam=adam,
            retain_gNL1=variant == VARIANT_NONLINEAR_RETAIN,
            seed=seed,
            workers=workers,
            threshold=config["postprocess"]["threshold"],
            show_progress=show_progress,
            **head_raw,
        )
        supervised_raw = config["supervised"]
        supervised = HeadTrainConfig(
            batch_size=supervised_raw["batch_size"],
            epochs=supervised_raw["epochs"],
            adam=AdamConfig(lr=supervised_raw["lr"], beta1=adam.beta1, beta2=adam.beta2, epsilon=adam.epsilon),
            seed=seed,
            workers=workers,
            chunk_size=head.chunk_size,
            threshold=head.threshold,
            show_progress=show_progress,
        )
        return RunConfig(
            seed=seed,
            workers=workers,
            precision=config["precision"],
            output_dir=config["paths"]["output_dir"],
            manifest=config["paths"]["manifest"],
            synth=SynthSettings(**config["synth"]),
            split=SplitSettings(**config["split"]),
            windows=WindowSettings(**config["windows"]),
            augment=augment,
            pretrain=pretrain,
            head=head,
            head_variant=variant,
            supervised=supervised,
            taus=[float(t) for t in config["sweep"]["taus"]],
            variants=list(config["sweep"]["variants"]),
            selections={k: float(v) for k, v in config["holdout"]["selections"].items()},
            postprocess=PostprocessSettings(**config["postprocess"]),
        )
    except ConfigError:
        raise
    except ChewingError as e:
        raise ConfigError(e.message, e.details) from e
