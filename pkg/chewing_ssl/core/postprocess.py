"""Aggregation of window predictions into chews, chewing bouts and meals.

Rules, applied in order:
  1. chews no more than 2 s apart form a bout
  2. bouts shorter than 5 s are discarded
  3. bouts no more than 60 s apart form a meal
  4. meals whose bout time is less than 25% of their span are discarded

Gaps are measured end to start and are inclusive; discard thresholds are strict.
"""

import csv
import os
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from chewing_ssl.core.constants import (
    BOUT_MERGE_GAP_S,
    CHEW_MERGE_GAP_S,
    MIN_BOUT_RATIO,
    MIN_BOUT_S,
    SCORE_THRESHOLD,
)
from chewing_ssl.core.dataset import Interval
from chewing_ssl.core.errors import PostprocessError


@dataclass(frozen=True, order=True)
class Bout(Interval):
    constituents: Tuple[Interval, ...] = field(default=(), compare=False)


@dataclass(frozen=True, order=True)
class Meal(Interval):
    constituents: Tuple[Interval, ...] = field(default=(), compare=False)

    @property
    def bout_ratio(self) -> float:
        """Total constituent duration over the meal span."""
        return sum(b.duration_s for b in self.constituents) / self.duration_s


@dataclass(frozen=True)
class PostprocessSettings:
    threshold: float = SCORE_THRESHOLD
    chew_gap_s: float = CHEW_MERGE_GAP_S
    min_bout_s: float = MIN_BOUT_S
    meal_gap_s: float = BOUT_MERGE_GAP_S
    min_ratio: float = MIN_BOUT_RATIO

    def __post_init__(self) -> None:
        if not 0 <= self.threshold <= 1:
            raise PostprocessError(f"threshold must lie in [0, 1], got {self.threshold}")
        for name in ("chew_gap_s", "min_bout_s", "meal_gap_s", "min_ratio"):
            if getattr(self, name) < 0:
                raise PostprocessError(f"{name} must be non-negative, got {getattr(self, name)}")


@dataclass(eq=False)
class PredictionTrack:
    """Window scores with their start times, all windows of equal duration."""

    scores: np.ndarray
    start_times_s: np.ndarray
    window_duration_s: float
    threshold: float = SCORE_THRESHOLD

    def __post_init__(self) -> None:
        self.scores = np.asarray(self.scores, dtype=np.float64).reshape(-1)
        self.start_times_s = np.asarray(self.start_times_s, dtype=np.float64).reshape(-1)
        if self.scores.shape != self.start_times_s.shape:
            raise PostprocessError(f"{self.scores.size} scores for {self.start_times_s.size} start times")
        if np.any((self.scores < 0) | (self.scores > 1)) or not np.all(np.isfinite(self.scores)):
            raise PostprocessError("scores must lie in [0, 1]")
        if np.any(np.diff(self.start_times_s) <= 0):
            raise PostprocessError("window start times must be strictly increasing")
        if self.start_times_s.size and self.start_times_s[0] < 0:
            raise PostprocessError("window start times must be non-negative")
        if not self.window_duration_s > 0:
            raise PostprocessError(f"window duration must be positive, got {self.window_duration_s}")

    def __len__(self) -> int:
        return int(self.scores.size)

    @property
    def span(self) -> Tuple[float, float]:
        if not len(self):
            return (0.0, 0.0)
        return float(self.start_times_s[0]), float(self.start_times_s[-1] + self.window_duration_s)


@dataclass
class PostprocessResult:
    chews: List[Interval]
    bouts: List[Bout]
    meals: List[Meal]


def _check_sorted(intervals: Sequence[Interval], what: str) -> None:
    for k in range(1, len(intervals)):
        if intervals[k].start_s < intervals[k - 1].start_s:
            raise PostprocessError(f"{what} must be sorted by start time (item {k} starts before item {k - 1})")


def track_to_pulses(track: PredictionTrack) -> List[Interval]:
    """Maximal runs of windows scoring at least the threshold, as intervals.

    Runs whose spans overlap in time are united.
    """
    positive = track.scores >= track.threshold
    pulses: List[Interval] = []
    k = 0
    n = len(track)
    while k < n:
        if not positive[k]:
            k += 1
            continue
        first = k
        while k + 1 < n and positive[k + 1]:
            k += 1
        start = float(track.start_times_s[first])
        end = float(track.start_times_s[k] + track.window_duration_s)
        if pulses and start < pulses[-1].end_s:
            pulses[-1] = Interval(pulses[-1].start_s, max(end, pulses[-1].end_s))
        else:
            pulses.append(Interval(start, end))
        k += 1
    return pulses


def _merge(intervals: Sequence[Interval], max_gap: float) -> List[List[Interval]]:
    groups: List[List[Interval]] = []
    end = -np.inf
    for interval in intervals:
        if groups and interval.start_s - end <= max_gap:
            groups[-1].append(interval)
            end = max(end, interval.end_s)
        else:
            groups.append([interval])
            end = interval.end_s
    return groups


def chews_to_bouts(chews: Sequence[Interval], max_gap_s: float = CHEW_MERGE_GAP_S) -> List[Bout]:
    """Merge chews separated by at most `max_gap_s`.

    Raises:
        PostprocessError: If the chews are not sorted by start time
    """
    _check_sorted(chews, "chews")
    return [
        Bout(group[0].start_s, max(c.end_s for c in group), tuple(group)) for group in _merge(chews, max_gap_s)
    ]


def drop_short_bouts(bouts: Iterable[Bout], min_duration_s: float = MIN_BOUT_S) -> List[Bout]:
    """Discard bouts lasting less than `min_duration_s`."""
    return [b for b in bouts if b.duration_s >= min_duration_s]


def bouts_to_meals(bouts: Sequence[Interval], max_gap_s: float = BOUT_MERGE_GAP_S) -> List[Meal]:
    """Merge bouts separated by at most `max_gap_s`, recording the bouts of each meal."""
    _check_sorted(bouts, "bouts")
    return [
        Meal(group[0].start_s, max(b.end_s for b in group), tuple(group)) for group in _merge(bouts, max_gap_s)
    ]


def filter_meals(meals: Iterable[Meal], min_ratio: float = MIN_BOUT_RATIO) -> List[Meal]:
    """Discard meals whose bout time covers less than `min_ratio` of their span."""
    return [m for m in meals if m.bout_ratio >= min_ratio]


def pipeline(track: PredictionTrack, settings: PostprocessSettings = PostprocessSettings()) -> PostprocessResult:
    """Run all four rules; every intermediate stage is kept for inspection.

    Windows are thresholded at `track.threshold`.
    """
    chews = track_to_pulses(track)
    bouts = drop_short_bouts(chews_to_bouts(chews, settings.chew_gap_s), settings.min_bout_s)
    meals = filter_meals(bouts_to_meals(bouts, settings.meal_gap_s), settings.min_ratio)
    return PostprocessResult(chews=chews, bouts=bouts, meals=meals)


# ---------------------------------------------------------------------------
# CSV files
# ---------------------------------------------------------------------------


def read_scores_csv(path: str, window_duration_s: float, threshold: float = SCORE_THRESHOLD) -> PredictionTrack:
    """Read a `window_start_s,score` CSV.

    Raises:
        PostprocessError: On a malformed header or row
    """
    if not os.path.exists(path):
        raise PostprocessError(f"scores file not found: {path}")
    starts, scores = [], []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["window_start_s", "score"]:
            raise PostprocessError(f"{path}: expected header 'window_start_s,score', got {header}")
        for row_number, row in enumerate(reader, start=1):
            if not row:
                continue
            try:
                starts.append(float(row[0]))
                scores.append(float(row[1]))
            except (ValueError, IndexError) as e:
                raise PostprocessError(f"{path}: row {row_number}: {e}", {"row": row_number}) from e
    return PredictionTrack(np.array(scores), np.array(starts), window_duration_s, threshold)


def write_scores_csv(track: PredictionTrack, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["window_start_s", "score"])
        for start, score in zip(track.start_times_s, track.scores):
            writer.writerow([repr(float(start)), repr(float(score))])


def write_intervals_csv(intervals: Iterable[Interval], path: str, with_ratio: bool = False) -> None:
    """Write `start_s,end_s`, plus the bout `ratio` column for meals."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["start_s", "end_s", "ratio"] if with_ratio else ["start_s", "end_s"])
        for interval in intervals:
            row = [repr(float(interval.start_s)), repr(float(interval.end_s))]
            if with_ratio:
                row.append(repr(float(interval.bout_ratio)))
            writer.writerow(row)
