"""Training pipelines and evaluation harnesses.

`pretrain` learns f and a projection head g from unlabeled windows with the
contrastive objective. `train_head` fits the classifier h on features of a
frozen stack and keeps the epoch with the lowest validation loss.
`run_loso_sweep` and `run_holdout` wire both into the two evaluation
protocols.
"""

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from chewing_ssl.core.augment import AugmentConfig, double_batch
from chewing_ssl.core.constants import (
    COVERAGE_THRESHOLD,
    INFERENCE_STRIDE,
    SCORE_THRESHOLD,
    SSL_VARIANTS,
    TRAIN_STRIDE,
    VARIANT_LABELS,
    VARIANT_LINEAR,
    VARIANT_NONLINEAR,
    VARIANT_NONLINEAR_RETAIN,
    VARIANT_SUPERVISED,
    WINDOW_LEN,
)
from chewing_ssl.core.dataset import Fold, Recording, WindowSet, make_loso_folds, pick_validation, window_set
from chewing_ssl.core.errors import TrainingError
from chewing_ssl.core.metrics import Confusion, MetricsReport, confusion, pool_confusions, report
from chewing_ssl.core.model import (
    ModelGraph,
    as_model_input,
    build_f,
    build_h,
    build_projection,
    build_supervised,
    compose,
    freeze,
    load_weights,
    save_weights,
    split_gNL,
)
from chewing_ssl.core.objective import bce_batch, ntxent_batch
from chewing_ssl.core.optim import Adam, AdamConfig, Lars, LarsConfig, ScheduleConfig, lr_at_epoch
from chewing_ssl.core.postprocess import PredictionTrack
from chewing_ssl.core.signal import extract_windows
from chewing_ssl.utils.logger import get_logger

logger = get_logger(__name__)

PRECISIONS = {"double": np.float64, "single": np.float32}

# variant -> (projection head kind, retain g^NL_1)
VARIANT_HEADS = {
    VARIANT_LINEAR: ("linear", False),
    VARIANT_NONLINEAR: ("nonlinear", False),
    VARIANT_NONLINEAR_RETAIN: ("nonlinear", True),
}


@dataclass(frozen=True)
class PretrainConfig:
    batch_size: int = 256
    epochs: int = 100
    tau: float = 0.5
    head_kind: str = "nonlinear"
    augment: AugmentConfig = field(default_factory=AugmentConfig)
    lars: LarsConfig = field(default_factory=LarsConfig)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    seed: int = 0
    precision: str = "double"
    show_progress: bool = True

    def __post_init__(self) -> None:
        if self.batch_size < 2:
            raise TrainingError(f"batch_size must be at least 2, got {self.batch_size}")
        if self.epochs < 1:
            raise TrainingError(f"epochs must be positive, got {self.epochs}")
        if not self.tau > 0:
            raise TrainingError(f"tau must be positive, got {self.tau}")
        if self.head_kind not in ("linear", "nonlinear"):
            raise TrainingError(f"head_kind must be 'linear' or 'nonlinear', got {self.head_kind}")
        if self.precision not in PRECISIONS:
            raise TrainingError(f"precision must be one of {sorted(PRECISIONS)}, got {self.precision}")
        if self.schedule.total_epochs != self.epochs:
            object.__setattr__(self, "schedule", replace(self.schedule, total_epochs=self.epochs))

    @property
    def dtype(self) -> Any:
        return PRECISIONS[self.precision]

    def signature(self) -> Dict[str, Any]:
        """Values that determine the pretrained weights."""
        return {
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "tau": self.tau,
            "head_kind": self.head_kind,
            "augment": asdict(self.augment),
            "lars": {k: v for k, v in asdict(self.lars).items() if k != "exempt"},
            "schedule": asdict(self.schedule),
            "seed": self.seed,
            "precision": self.precision,
        }


@dataclass(frozen=True)
class HeadTrainConfig:
    batch_size: int = 64
    epochs: int = 100
    adam: AdamConfig = field(default_factory=AdamConfig)
    retain_gNL1: bool = False
    seed: int = 0
    cache_features: bool = True
    workers: int = 1
    chunk_size: int = 128
    threshold: float = SCORE_THRESHOLD
    show_progress: bool = True

    def __post_init__(self) -> None:
        for name in ("batch_size", "epochs", "workers", "chunk_size"):
            if getattr(self, name) < 1:
                raise TrainingError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class EvaluationConfig:
    """Settings shared by the LOSO sweep and the holdout evaluation."""

    pretrain: PretrainConfig = field(default_factory=PretrainConfig)
    head: HeadTrainConfig = field(default_factory=HeadTrainConfig)
    supervised: HeadTrainConfig = field(default_factory=HeadTrainConfig)
    n_validation: int = 2
    window_len: int = WINDOW_LEN
    train_stride: int = TRAIN_STRIDE
    coverage_threshold: float = COVERAGE_THRESHOLD
    seed: int = 0


@dataclass
class PretrainResult:
    f: ModelGraph
    g: ModelGraph
    epoch_losses: List[float]
    step_losses: List[float]
    learning_rates: List[float]


@dataclass
class HeadFitResult:
    """Best validation snapshot of a trained model with its loss curves."""

    model: ModelGraph
    train_losses: List[float]
    val_losses: List[float]
    best_epoch: int

    @property
    def best_val_loss(self) -> float:
        return self.val_losses[self.best_epoch - 1]


@dataclass
class FoldResult:
    fold: int
    test_subject: str
    selected_epoch: int
    val_losses: List[float]
    confusion: Confusion
    report: MetricsReport


@dataclass
class SweepRow:
    variant: str
    tau: float
    report: MetricsReport
    folds: List[FoldResult]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "variant": self.variant,
            "model": VARIANT_LABELS[self.variant],
            "tau": self.tau,
            "metrics": self.report.to_dict(),
            "folds": [
                {
                    "fold": r.fold,
                    "test_subject": r.test_subject,
                    "selected_epoch": r.selected_epoch,
                    "val_losses": r.val_losses,
                    "metrics": r.report.to_dict(),
                }
                for r in self.folds
            ],
        }


@dataclass
class HoldoutRow:
    variant: str
    tau: Optional[float]
    report: MetricsReport
    fit: HeadFitResult
    predictor: ModelGraph

    def to_dict(self) -> Dict[str, Any]:
        return {
            "variant": self.variant,
            "model": VARIANT_LABELS[self.variant],
            "tau": self.tau,
            "selected_epoch": self.fit.best_epoch,
            "val_losses": self.fit.val_losses,
            "metrics": self.report.to_dict(),
        }


# ---------------------------------------------------------------------------
# Pretraining
# ---------------------------------------------------------------------------


def pretrain(windows: np.ndarray, cfg: PretrainConfig) -> PretrainResult:
    """Contrastive pretraining of g∘f on unlabeled windows.

    Each epoch shuffles the windows with a generator seeded by (seed, epoch)
    and drops the trailing partial batch.

    Args:
        windows: Unlabeled windows of shape [N, window_len]
        cfg: Pretraining configuration

    Raises:
        TrainingError: If there are fewer windows than one batch
    """
    windows = np.asarray(windows)
    if windows.ndim != 2:
        raise TrainingError(f"pretraining expects windows of shape [N, L], got {windows.shape}")
    n_windows = windows.shape[0]
    if n_windows < cfg.batch_size:
        raise TrainingError(f"{n_windows} windows are fewer than one batch of {cfg.batch_size}")

    dtype = cfg.dtype
    f = build_f(cfg.seed, dtype)
    g = build_projection(cfg.head_kind, cfg.seed + 1, dtype)
    model = compose(f, g, trainable_names={"f", g.segments[0].name})
    optimizer = Lars(replace(cfg.lars, base_lr=cfg.schedule.max_lr))
    n_batches = n_windows // cfg.batch_size

    epoch_losses: List[float] = []
    step_losses: List[float] = []
    rates: List[float] = []
    logger.info(
        f"Pretraining f with {cfg.head_kind} head, tau={cfg.tau}: {n_windows} windows, "
        f"{n_batches} batches of {cfg.batch_size} per epoch, {cfg.epochs} epochs"
    )

    progress = tqdm(range(1, cfg.epochs + 1), desc=f"Pretrain tau={cfg.tau}", disable=not cfg.show_progress)
    for epoch in progress:
        lr = lr_at_epoch(epoch, cfg.schedule)
        order = np.random.default_rng([cfg.seed, epoch]).permutation(n_windows)
        losses = []
        for b in range(n_batches):
            idx = order[b * cfg.batch_size : (b + 1) * cfg.batch_size]
            batch = double_batch(windows[idx], cfg.augment, epoch, idx)
            z, cache = model.forward(as_model_input(batch.samples.astype(dtype)))
            loss, grad = ntxent_batch(z, cfg.tau)
            _, grads = model.backward(cache, grad.astype(dtype), trainable_only=True, need_input_grad=False)
            model.set_parameters(optimizer.step(model.parameters(trainable_only=True), grads, lr))
            losses.append(loss)
        step_losses.extend(losses)
        epoch_losses.append(float(np.mean(losses)))
        rates.append(lr)
        progress.set_postfix(loss=f"{epoch_losses[-1]:.4f}", lr=f"{lr:.4f}")
        logger.info(f"Epoch {epoch}/{cfg.epochs}: loss={epoch_losses[-1]:.6f} lr={lr:.6f}")

    return PretrainResult(f, g, epoch_losses, step_losses, rates)


def write_loss_curve(path: str, losses: Sequence[float], learning_rates: Sequence[float]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "loss", "lr"])
        for epoch, (loss, lr) in enumerate(zip(losses, learning_rates), start=1):
            writer.writerow([epoch, repr(float(loss)), repr(float(lr))])


def read_loss_curve(path: str) -> Tuple[List[float], List[float]]:
    losses, rates = [], []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            losses.append(float(row["loss"]))
            rates.append(float(row["lr"]))
    return losses, rates


class PretrainStore:
    """Pretrained (f, g) pairs, persisted under `<root>/<head_kind>_tau<tau>/`.

    A stored pair is reused only when its recorded configuration and
    training subjects match the request. Without a root every request
    pretrains from scratch.
    """

    def __init__(
        self, windows: np.ndarray, subjects: Sequence[str], base: PretrainConfig, root: Optional[str] = None
    ) -> None:
        self.windows = windows
        self.subjects = sorted(set(subjects))
        self.base = base
        self.root = root

    def directory(self, head_kind: str, tau: float) -> str:
        if self.root is None:
            raise TrainingError("this pretrain store does not persist weights")
        return pretrain_directory(self.root, head_kind, tau)

    def get(self, head_kind: str, tau: float) -> PretrainResult:
        cfg = replace(self.base, head_kind=head_kind, tau=tau)
        if self.root is None:
            return pretrain(self.windows, cfg)
        directory = self.directory(head_kind, tau)
        meta_path = os.path.join(directory, "pretrain.json")
        meta = {"config": cfg.signature(), "subjects": self.subjects}

        if os.path.exists(meta_path):
            with open(meta_path, "r", encoding="utf-8") as fh:
                stored = json.load(fh)
            if stored == meta:
                logger.info(f"Reusing pretrained weights from {directory}")
                losses, rates = read_loss_curve(os.path.join(directory, "loss_curve.csv"))
                return PretrainResult(
                    load_weights(os.path.join(directory, "f.weights")),
                    load_weights(os.path.join(directory, "g.weights")),
                    losses,
                    [],
                    rates,
                )
            logger.info(f"Stored weights in {directory} were trained with other settings, retraining")

        result = pretrain(self.windows, cfg)
        save_pretrained(result, directory, meta)
        return result


def pretrain_name(head_kind: str, tau: float) -> str:
    return f"{head_kind}_tau{tau:g}"


def pretrain_directory(root: str, head_kind: str, tau: float) -> str:
    return os.path.join(root, pretrain_name(head_kind, tau))


def save_pretrained(result: PretrainResult, directory: str, meta: Mapping[str, Any]) -> None:
    os.makedirs(directory, exist_ok=True)
    save_weights(result.f, os.path.join(directory, "f.weights"))
    save_weights(result.g, os.path.join(directory, "g.weights"))
    write_loss_curve(os.path.join(directory, "loss_curve.csv"), result.epoch_losses, result.learning_rates)
    with open(os.path.join(directory, "pretrain.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# Feature extraction and head training
# ---------------------------------------------------------------------------


def feature_stack(f: ModelGraph, g: Optional[ModelGraph] = None, retain_gNL1: bool = False) -> ModelGraph:
    """Frozen f, or g^NL_1∘f when the first projection layer is retained."""
    if not retain_gNL1:
        return freeze(f)
    if g is None:
        raise TrainingError("retaining g^NL_1 needs the pretrained projection head")
    g1, _ = split_gNL(g)
    return freeze(f, g1)


def extract_features(model: ModelGraph, windows: np.ndarray, chunk_size: int = 128, workers: int = 1) -> np.ndarray:
    """Run `model` over windows in fixed chunks, optionally on a thread pool.

    Chunk boundaries do not depend on `workers`, so neither do the results.
    Raw windows [N, L] are given the channel axis when the model expects one.
    """
    windows = np.asarray(windows)
    if len(model.input_shape) == 2 and windows.ndim == 2:
        windows = as_model_input(windows)
    dtype = next(iter(model.parameters().values())).dtype
    n = windows.shape[0]
    if n == 0:
        return np.zeros((0,) + model.output_shape, dtype=dtype)

    def run(start: int) -> np.ndarray:
        return model.predict(windows[start : start + chunk_size].astype(dtype, copy=False), chunk_size=chunk_size)

    starts = list(range(0, n, chunk_size))
    if workers <= 1 or len(starts) == 1:
        outputs = [run(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            outputs = list(executor.map(run, starts))
    return np.concatenate(outputs, axis=0)


def _fit(
    model: ModelGraph,
    train_inputs: Callable[[int], np.ndarray],
    train_labels: np.ndarray,
    val_inputs: Callable[[int], np.ndarray],
    val_labels: np.ndarray,
    cfg: HeadTrainConfig,
    desc: str,
) -> HeadFitResult:
    if len(val_labels) == 0:
        raise TrainingError("validation set is empty")
    if len(train_labels) == 0:
        raise TrainingError("training set is empty")

    optimizer = Adam(cfg.adam)
    n = len(train_labels)
    best: Optional[ModelGraph] = None
    best_epoch = 0
    train_losses: List[float] = []
    val_losses: List[float] = []

    progress = tqdm(range(1, cfg.epochs + 1), desc=desc, disable=not cfg.show_progress, leave=False)
    for epoch in progress:
        inputs = train_inputs(epoch)
        order = np.random.default_rng([cfg.seed, epoch]).permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            y_hat, cache = model.forward(inputs[idx])
            loss, grad = bce_batch(y_hat, train_labels[idx])
            _, grads = model.backward(cache, grad, trainable_only=True, need_input_grad=False)
            model.set_parameters(optimizer.step(model.parameters(trainable_only=True), grads))
            total += loss * len(idx)
        train_losses.append(total / n)

        val_scores = model.predict(val_inputs(epoch), chunk_size=cfg.chunk_size)
        val_loss, _ = bce_batch(val_scores, val_labels)
        val_losses.append(val_loss)
        if best is None or val_loss < val_losses[best_epoch - 1]:
            best, best_epoch = model.copy(), epoch
        progress.set_postfix(train=f"{train_losses[-1]:.4f}", val=f"{val_loss:.4f}")
        logger.debug(f"{desc} epoch {epoch}: train={train_losses[-1]:.6f} val={val_loss:.6f}")

    assert best is not None
    logger.info(f"{desc}: selected epoch {best_epoch} with validation loss {val_losses[best_epoch - 1]:.6f}")
    return HeadFitResult(best, train_losses, val_losses, best_epoch)


def fit_head(
    h: ModelGraph,
    train_features: np.ndarray,
    train_labels: np.ndarray,
    val_features: np.ndarray,
    val_labels: np.ndarray,
    cfg: HeadTrainConfig,
) -> HeadFitResult:
    """Adam/BCE training of h on precomputed features.

    Returns the snapshot with the lowest validation loss over all epochs.

    Raises:
        TrainingError: If the validation set is empty
    """
    dtype = next(iter(h.parameters().values())).dtype
    train_x = np.asarray(train_features, dtype=dtype)
    val_x = np.asarray(val_features, dtype=dtype)
    return _fit(
        h,
        lambda epoch: train_x,
        np.asarray(train_labels),
        lambda epoch: val_x,
        np.asarray(val_labels),
        cfg,
        "Head",
    )


def train_head(
    frozen_stack: ModelGraph, h: ModelGraph, train: WindowSet, val: WindowSet, cfg: HeadTrainConfig
) -> HeadFitResult:
    """Train h on features of a frozen stack.

    With `cfg.cache_features` the features are computed once; otherwise they
    are recomputed every epoch, which gives the same result.
    """
    if len(val) == 0:
        raise TrainingError("validation set is empty")
    if any(seg.trainable for seg in frozen_stack.segments):
        raise TrainingError("the feature stack must be frozen")

    def features(windows: np.ndarray) -> np.ndarray:
        return extract_features(frozen_stack, windows, cfg.chunk_size, cfg.workers)

    if cfg.cache_features:
        train_x, val_x = features(train.windows), features(val.windows)
        return fit_head(h, train_x, train.labels, val_x, val.labels, cfg)
    return _fit(
        h,
        lambda epoch: features(train.windows),
        train.labels,
        lambda epoch: features(val.windows),
        val.labels,
        cfg,
        "Head",
    )


def train_supervised(train: WindowSet, val: WindowSet, cfg: HeadTrainConfig, dtype: Any = np.float64) -> HeadFitResult:
    """Supervised baseline: h∘f trained end to end on labeled windows."""
    model = build_supervised(cfg.seed, dtype)
    train_x = as_model_input(train.windows.astype(dtype))
    val_x = as_model_input(val.windows.astype(dtype))
    return _fit(model, lambda epoch: train_x, train.labels, lambda epoch: val_x, val.labels, cfg, "Supervised")


def predictor(stack: ModelGraph, h: ModelGraph) -> ModelGraph:
    """Full window-to-score model with only h marked trainable."""
    return compose(stack, h, trainable_names={h.segments[-1].name})


def evaluate(
    model: ModelGraph,
    windows: WindowSet,
    threshold: float = SCORE_THRESHOLD,
    chunk_size: int = 128,
    workers: int = 1,
) -> Confusion:
    """Confusion of thresholded window scores against window labels."""
    scores = extract_features(model, windows.windows, chunk_size, workers).reshape(-1)
    return confusion(scores >= threshold, windows.labels)


def predict_recording(
    model: ModelGraph,
    rec: Recording,
    stride: int = INFERENCE_STRIDE,
    window_len: int = WINDOW_LEN,
    threshold: float = SCORE_THRESHOLD,
    chunk_size: int = 128,
    workers: int = 1,
) -> PredictionTrack:
    """Score every window of a recording at the inference stride."""
    matrix = extract_windows(rec.audio, window_len, stride)
    scores = extract_features(model, matrix.windows, chunk_size, workers).reshape(-1)
    return PredictionTrack(
        np.clip(scores, 0.0, 1.0), matrix.origin_times_s, window_len / rec.audio.sample_rate_hz, threshold
    )


# ---------------------------------------------------------------------------
# Evaluation protocols
# ---------------------------------------------------------------------------


def _windows(recordings: Sequence[Recording], cfg: EvaluationConfig) -> WindowSet:
    return window_set(recordings, cfg.window_len, cfg.train_stride, cfg.coverage_threshold)


def subject_mask(windows: WindowSet, subjects: Sequence[str]) -> np.ndarray:
    return np.isin(windows.subject_ids, list(subjects))


def run_loso_sweep(
    dev_recordings: Sequence[Recording],
    taus: Sequence[float],
    variants: Sequence[str],
    cfg: EvaluationConfig,
    store: Optional[PretrainStore] = None,
) -> List[SweepRow]:
    """Temperature sweep with leave-one-subject-out head training.

    Pretraining runs once per (head kind, tau) on all development windows and
    is shared by the variants that use the same head kind. Confusions are
    pooled across folds before metrics are computed.

    Raises:
        TrainingError: On an unknown variant or degenerate folds
    """
    unknown = set(variants) - set(SSL_VARIANTS)
    if unknown:
        raise TrainingError(f"unknown variants: {sorted(unknown)}")
    windows = _windows(dev_recordings, cfg)
    subjects = sorted({r.subject_id for r in dev_recordings})
    folds = make_loso_folds(subjects, cfg.n_validation, cfg.seed)
    store = store or PretrainStore(windows.windows, subjects, cfg.pretrain)

    results: Dict[Tuple[str, float], SweepRow] = {}
    head_kinds = sorted({VARIANT_HEADS[v][0] for v in variants})
    for head_kind in head_kinds:
        for tau in taus:
            pre = store.get(head_kind, tau)
            for variant in variants:
                kind, retain = VARIANT_HEADS[variant]
                if kind != head_kind:
                    continue
                stack = feature_stack(pre.f, pre.g, retain)
                head_cfg = replace(cfg.head, retain_gNL1=retain)
                features = (
                    extract_features(stack, windows.windows, head_cfg.chunk_size, head_cfg.workers)
                    if head_cfg.cache_features
                    else None
                )
                fold_results = []
                for fold in tqdm(folds, desc=f"LOSO {variant} tau={tau:g}", disable=not head_cfg.show_progress):
                    fold_results.append(_run_fold(fold, stack, windows, features, head_cfg, cfg.seed))
                pooled = pool_confusions(r.confusion for r in fold_results)
                results[(variant, tau)] = SweepRow(variant, tau, report(pooled), fold_results)
                logger.info(f"{VARIANT_LABELS[variant]} tau={tau:g}: F1={results[(variant, tau)].report.f1:.3f}")

    return [results[(v, t)] for v in variants for t in taus]


def _run_fold(
    fold: Fold,
    stack: ModelGraph,
    windows: WindowSet,
    features: Optional[np.ndarray],
    head_cfg: HeadTrainConfig,
    seed: int,
) -> FoldResult:
    train_mask = subject_mask(windows, fold.train)
    val_mask = subject_mask(windows, fold.validation)
    test_mask = subject_mask(windows, [fold.test])
    dtype = stack.segments[0].params["0.weight"].dtype
    h = build_h(seed + 100 + fold.index, in_dim=stack.output_shape[0], dtype=dtype)
    fold_cfg = replace(head_cfg, seed=seed + fold.index)

    if features is not None:
        fit = fit_head(
            h, features[train_mask], windows.labels[train_mask], features[val_mask], windows.labels[val_mask], fold_cfg
        )
        scores = fit.model.predict(features[test_mask]).reshape(-1)
    else:
        fit = train_head(stack, h, windows.subset(train_mask), windows.subset(val_mask), fold_cfg)
        test_features = extract_features(stack, windows.windows[test_mask], head_cfg.chunk_size, head_cfg.workers)
        scores = fit.model.predict(test_features).reshape(-1)

    fold_confusion = confusion(scores >= head_cfg.threshold, windows.labels[test_mask])
    return FoldResult(
        fold=fold.index,
        test_subject=fold.test,
        selected_epoch=fit.best_epoch,
        val_losses=fit.val_losses,
        confusion=fold_confusion,
        report=report(fold_confusion),
    )


def run_holdout(
    dev_recordings: Sequence[Recording],
    holdout_recordings: Sequence[Recording],
    selections: Mapping[str, float],
    cfg: EvaluationConfig,
    store: Optional[PretrainStore] = None,
) -> List[HoldoutRow]:
    """Train the selected variants and the supervised baseline on S1, evaluate on S2.

    Args:
        dev_recordings: Development subjects (S1)
        holdout_recordings: Holdout subjects (S2)
        selections: Temperature chosen for each self-supervised variant
        cfg: Evaluation settings
        store: Optional cache of pretrained weights

    Raises:
        TrainingError: If a subject appears in both sets
    """
    dev_ids = {r.subject_id for r in dev_recordings}
    holdout_ids = {r.subject_id for r in holdout_recordings}
    overlap = dev_ids & holdout_ids
    if overlap:
        raise TrainingError(f"subjects in both development and holdout sets: {sorted(overlap)}")
    if not holdout_ids:
        raise TrainingError("holdout set is empty")
    unknown = set(selections) - set(SSL_VARIANTS)
    if unknown:
        raise TrainingError(f"unknown variants: {sorted(unknown)}")

    dev = _windows(dev_recordings, cfg)
    test = _windows(holdout_recordings, cfg)
    train_ids, val_ids = pick_validation(dev_ids, cfg.n_validation, cfg.seed)
    train = dev.subset(subject_mask(dev, sorted(train_ids)))
    val = dev.subset(subject_mask(dev, sorted(val_ids)))
    store = store or PretrainStore(dev.windows, sorted(dev_ids), cfg.pretrain)
    logger.info(
        f"Holdout: train on {sorted(train_ids)}, validate on {sorted(val_ids)}, test on {sorted(holdout_ids)}"
    )

    rows: List[HoldoutRow] = []
    for variant in [v for v in SSL_VARIANTS if v in selections]:
        tau = float(selections[variant])
        head_kind, retain = VARIANT_HEADS[variant]
        pre = store.get(head_kind, tau)
        stack = feature_stack(pre.f, pre.g, retain)
        h = build_h(cfg.seed + 1, in_dim=stack.output_shape[0], dtype=cfg.pretrain.dtype)
        fit = train_head(stack, h, train, val, replace(cfg.head, retain_gNL1=retain))
        model = predictor(stack, fit.model)
        result = report(evaluate(model, test, cfg.head.threshold, cfg.head.chunk_size, cfg.head.workers))
        rows.append(HoldoutRow(variant, tau, result, fit, model))
        logger.info(f"{VARIANT_LABELS[variant]} on holdout: F1={result.f1:.3f}")

    fit = train_supervised(train, val, cfg.supervised, cfg.pretrain.dtype)
    supervised = cfg.supervised
    result = report(evaluate(fit.model, test, supervised.threshold, supervised.chunk_size, supervised.workers))
    rows.append(HoldoutRow(VARIANT_SUPERVISED, None, result, fit, fit.model))
    logger.info(f"{VARIANT_LABELS[VARIANT_SUPERVISED]} on holdout: F1={result.f1:.3f}")
    return rows
