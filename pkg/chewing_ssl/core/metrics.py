"""Sample-level binary classification metrics.

Weighted accuracy is balanced accuracy, the mean of the per-class recalls.
Ratios with a zero denominator are reported as 0 and flagged.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Sequence, Tuple

import numpy as np
from tabulate import tabulate

from chewing_ssl.core.errors import MetricsError

METRIC_COLUMNS = (
    ("precision", "prec."),
    ("recall", "rec."),
    ("f1", "F1-score"),
    ("accuracy", "acc."),
    ("weighted_accuracy", "w. acc."),
)


@dataclass(frozen=True)
class Confusion:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "fn", "tn"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise MetricsError(f"{name} must be a non-negative integer, got {value}")
            object.__setattr__(self, name, int(value))

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def __add__(self, other: "Confusion") -> "Confusion":
        return Confusion(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn)

    def to_dict(self) -> Dict[str, int]:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}


@dataclass(frozen=True)
class MetricsReport:
    precision: float
    recall: float
    f1: float
    accuracy: float
    weighted_accuracy: float
    confusion: Confusion
    flags: Tuple[str, ...] = field(default=())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "accuracy": self.accuracy,
            "weighted_accuracy": self.weighted_accuracy,
            "confusion": self.confusion.to_dict(),
            "flags": list(self.flags),
        }


def _as_binary(values: Iterable[Any], what: str) -> np.ndarray:
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values).reshape(-1)
    if not np.all((arr == 0) | (arr == 1)):
        raise MetricsError(f"{what} must be 0 or 1")
    return arr.astype(bool)


def confusion(predictions: Iterable[Any], labels: Iterable[Any]) -> Confusion:
    """Count outcomes with chewing (1) as the positive class.

    Raises:
        MetricsError: If lengths differ, inputs are empty or not binary
    """
    pred = _as_binary(predictions, "predictions")
    true = _as_binary(labels, "labels")
    if pred.shape != true.shape:
        raise MetricsError(f"{pred.size} predictions for {true.size} labels")
    if pred.size == 0:
        raise MetricsError("cannot build a confusion matrix from empty inputs")
    return Confusion(
        tp=int(np.sum(pred & true)),
        fp=int(np.sum(pred & ~true)),
        fn=int(np.sum(~pred & true)),
        tn=int(np.sum(~pred & ~true)),
    )


def pool_confusions(confusions: Iterable[Confusion]) -> Confusion:
    """Sum confusion counts, e.g. over cross-validation folds."""
    pooled = Confusion()
    for c in confusions:
        pooled = pooled + c
    return pooled


def _ratio(num: int, den: int, flag: str, flags: List[str]) -> float:
    if den == 0:
        flags.append(flag)
        return 0.0
    return num / den


def report(c: Confusion) -> MetricsReport:
    """Precision, recall, F1, accuracy and weighted accuracy.

    Raises:
        MetricsError: If the confusion matrix is empty
    """
    if c.total == 0:
        raise MetricsError("cannot report metrics of an empty confusion matrix")
    flags: List[str] = []
    precision = _ratio(c.tp, c.tp + c.fp, "precision_undefined", flags)
    recall = _ratio(c.tp, c.tp + c.fn, "recall_undefined", flags)
    specificity = _ratio(c.tn, c.tn + c.fp, "specificity_undefined", flags)
    if precision + recall == 0:
        flags.append("f1_undefined")
        f1 = 0.0
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return MetricsReport(
        precision=precision,
        recall=recall,
        f1=f1,
        accuracy=(c.tp + c.tn) / c.total,
        weighted_accuracy=(recall + specificity) / 2,
        confusion=c,
        flags=tuple(flags),
    )


def format_table(
    rows: Sequence[Mapping[str, Any]], key_columns: Sequence[str], tablefmt: str = "grid"
) -> str:
    """Aligned text table, one row per report.

    Each row maps the `key_columns` to their values and `"report"` to a
    MetricsReport. Values derived from an undefined ratio are marked with `*`.
    """
    headers = list(key_columns) + [title for _, title in METRIC_COLUMNS]
    table = []
    for row in rows:
        rep: MetricsReport = row["report"]
        undefined = {flag.replace("_undefined", "") for flag in rep.flags}
        cells = [row[k] for k in key_columns]
        for attr, _ in METRIC_COLUMNS:
            value = f"{getattr(rep, attr):.2f}"
            if attr in undefined or (attr == "weighted_accuracy" and undefined & {"recall", "specificity"}):
                value += "*"
            cells.append(value)
        table.append(cells)
    text = tabulate(table, headers=headers, tablefmt=tablefmt)
    return text + "\nw. acc. = balanced accuracy (mean of per-class recalls); * = undefined ratio reported as 0"
