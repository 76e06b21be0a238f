"""Recording ingestion, window labeling, subject splits and synthetic recordings.

Recordings arrive as mono WAV files with a CSV of chewing intervals, listed in
a JSON manifest. For desk-scale runs, `synthesize_recording` produces
recordings with a known chewing ground truth.
"""

import csv
import json
import os
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import signal as sps
from scipy.io import wavfile

from chewing_ssl.core.constants import COVERAGE_THRESHOLD, TARGET_RATE_HZ, TRAIN_STRIDE, WINDOW_LEN
from chewing_ssl.core.errors import AnnotationError, ArtifactMissingError, DatasetError
from chewing_ssl.core.signal import TimeSeries, extract_windows, preprocess
from chewing_ssl.utils.file_utils import sanitize_filename
from chewing_ssl.utils.logger import get_logger

logger = get_logger(__name__)

PCM16_SCALE = 32768.0
STORE_INDEX = "store.json"


@dataclass(frozen=True, order=True)
class Interval:
    """Half-open time span [start_s, end_s) in seconds."""

    start_s: float
    end_s: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.start_s) and np.isfinite(self.end_s)):
            raise DatasetError(f"interval bounds must be finite, got ({self.start_s}, {self.end_s})")
        if self.start_s < 0:
            raise DatasetError(f"interval start must be non-negative, got {self.start_s}")
        if not self.start_s < self.end_s:
            raise DatasetError(f"interval start must precede end, got ({self.start_s}, {self.end_s})")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s

    def overlap(self, start_s: float, end_s: float) -> float:
        """Length of the intersection with [start_s, end_s)."""
        return max(0.0, min(self.end_s, end_s) - max(self.start_s, start_s))


def validate_intervals(intervals: Sequence[Interval], duration_s: Optional[float] = None) -> None:
    """Check that intervals are sorted, pairwise disjoint and inside [0, duration_s].

    Raises:
        DatasetError: On the first violation found
    """
    for prev, cur in zip(intervals, intervals[1:]):
        if cur.start_s < prev.start_s:
            raise DatasetError(f"intervals not sorted: {cur} after {prev}")
        if cur.start_s < prev.end_s:
            raise DatasetError(f"intervals overlap: {prev} and {cur}")
    if duration_s is not None and intervals and intervals[-1].end_s > duration_s + 1e-9:
        raise DatasetError(f"interval {intervals[-1]} extends past the recording end ({duration_s} s)")


@dataclass(eq=False)
class Recording:
    """One subject's audio with its chewing ground truth."""

    subject_id: str
    audio: TimeSeries
    chewing: List[Interval] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.chewing = list(self.chewing)
        validate_intervals(self.chewing, self.audio.duration_s)


@dataclass(eq=False)
class LabeledWindow:
    """A model-input window with its binary chewing label."""

    window: np.ndarray
    label: int
    subject_id: str
    start_s: float

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise DatasetError(f"label must be 0 or 1, got {self.label}")


@dataclass(eq=False)
class WindowSet:
    """Array form of a list of labeled windows, as consumed by training."""

    windows: np.ndarray
    labels: np.ndarray
    subject_ids: np.ndarray
    start_s: np.ndarray

    def __len__(self) -> int:
        return int(self.windows.shape[0])

    def subset(self, mask: np.ndarray) -> "WindowSet":
        return WindowSet(self.windows[mask], self.labels[mask], self.subject_ids[mask], self.start_s[mask])


@dataclass(frozen=True)
class SubjectSplit:
    """Disjoint development (S1) and holdout (S2) subject sets."""

    development: FrozenSet[str]
    holdout: FrozenSet[str]


@dataclass(frozen=True)
class Fold:
    """One leave-one-subject-out fold of the development subjects."""

    index: int
    train: FrozenSet[str]
    validation: FrozenSet[str]
    test: str


@dataclass(frozen=True)
class SynthParams:
    """Parameters of a synthetic chewing recording.

    Chews are exponentially decaying bursts of band-passed noise repeated at
    `chew_rate_hz` inside every meal span, on top of Gaussian background noise.
    """

    duration_s: float = 600.0
    chew_rate_hz: float = 1.5
    burst_band_hz: Tuple[float, float] = (20.0, 250.0)
    burst_decay_s: float = 0.05
    meal_spans: Tuple[Interval, ...] = ()
    background_noise_std: float = 0.01
    chew_amplitude: float = 0.2
    onset_jitter: float = 0.1
    sample_rate_hz: float = TARGET_RATE_HZ
    seed: int = 0

    def __post_init__(self) -> None:
        positive = {
            "duration_s": self.duration_s,
            "chew_rate_hz": self.chew_rate_hz,
            "burst_decay_s": self.burst_decay_s,
            "background_noise_std": self.background_noise_std,
            "chew_amplitude": self.chew_amplitude,
            "sample_rate_hz": self.sample_rate_hz,
        }
        for name, value in positive.items():
            if not value > 0:
                raise DatasetError(f"{name} must be positive, got {value}")
        low, high = self.burst_band_hz
        if not 0 < low < high < self.sample_rate_hz / 2:
            raise DatasetError(f"burst band {self.burst_band_hz} must lie inside (0, Nyquist)")
        if not 0 <= self.onset_jitter < 0.5:
            raise DatasetError(f"onset_jitter must be in [0, 0.5), got {self.onset_jitter}")
        spans = sorted(self.meal_spans)
        object.__setattr__(self, "meal_spans", tuple(spans))
        validate_intervals(spans, self.duration_s)


# ---------------------------------------------------------------------------
# File ingestion
# ---------------------------------------------------------------------------


def load_wav(path: str) -> TimeSeries:
    """Read a mono PCM16 or float32 WAV file.

    PCM16 samples are divided by 32768 so the result lies in [-1, 1).

    Raises:
        DatasetError: If the file is multichannel or uses another encoding
    """
    if not os.path.exists(path):
        raise DatasetError(f"WAV file not found: {path}")
    rate, data = wavfile.read(path)
    if data.ndim > 1:
        raise DatasetError(f"multichannel unsupported: {path} has {data.shape[1]} channels")
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / PCM16_SCALE
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise DatasetError(f"unsupported WAV encoding {data.dtype} in {path} (expected PCM16 or float32)")
    return TimeSeries(samples, float(rate))


def save_wav(x: TimeSeries, path: str, encoding: str = "float32") -> None:
    """Write a TimeSeries as a mono WAV file.

    Args:
        x: Signal to write, the sample rate must be an integer number of Hz
        path: Output path
        encoding: "float32" or "pcm16"
    """
    rate = int(round(x.sample_rate_hz))
    if encoding == "float32":
        data = x.samples.astype(np.float32)
    elif encoding == "pcm16":
        data = np.clip(np.round(x.samples * PCM16_SCALE), -32768, 32767).astype(np.int16)
    else:
        raise DatasetError(f"unsupported WAV encoding: {encoding}")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    wavfile.write(path, rate, data)


def load_annotations(path: str) -> List[Interval]:
    """Read a `start_s,end_s` CSV into sorted, disjoint intervals.

    Rows are numbered from 1, not counting the header.

    Raises:
        AnnotationError: On a malformed, inverted or overlapping row
    """
    if not os.path.exists(path):
        raise DatasetError(f"annotation file not found: {path}")

    rows: List[Tuple[Interval, int]] = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["start_s", "end_s"]:
            raise AnnotationError(f"expected header 'start_s,end_s', got {header}", row=0, path=path)
        for row_number, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise AnnotationError(f"expected 2 columns, got {len(row)}", row=row_number, path=path)
            try:
                interval = Interval(float(row[0]), float(row[1]))
            except ValueError as e:
                message = e.message if isinstance(e, DatasetError) else str(e)
                raise AnnotationError(message, row=row_number, path=path) from e
            rows.append((interval, row_number))

    rows.sort(key=lambda item: item[0])
    for (prev, _), (cur, row_number) in zip(rows, rows[1:]):
        if cur.start_s < prev.end_s:
            raise AnnotationError(f"interval {cur} overlaps {prev}", row=row_number, path=path)
    return [interval for interval, _ in rows]


def save_annotations(intervals: Iterable[Interval], path: str) -> None:
    """Write intervals as a `start_s,end_s` CSV with LF line endings."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["start_s", "end_s"])
        for interval in intervals:
            writer.writerow([repr(float(interval.start_s)), repr(float(interval.end_s))])


def load_manifest(path: str) -> List[Dict[str, str]]:
    """Read a recording manifest, resolving paths relative to the manifest.

    Raises:
        DatasetError: If an entry misses a key or subject ids repeat
    """
    if not os.path.exists(path):
        raise ArtifactMissingError(path, "synth")
    with open(path, "r", encoding="utf-8") as f:
        entries = json.load(f)
    if not isinstance(entries, list):
        raise DatasetError(f"manifest {path} must be a JSON list")

    base = os.path.dirname(os.path.abspath(path))
    resolved = []
    seen = set()
    for i, entry in enumerate(entries):
        missing = {"subject_id", "wav_path", "annotation_path"} - set(entry)
        if missing:
            raise DatasetError(f"manifest entry {i} misses {sorted(missing)}")
        if entry["subject_id"] in seen:
            raise DatasetError(f"duplicate subject_id in manifest: {entry['subject_id']}")
        seen.add(entry["subject_id"])
        resolved.append({
            "subject_id": str(entry["subject_id"]),
            "wav_path": os.path.join(base, entry["wav_path"]),
            "annotation_path": os.path.join(base, entry["annotation_path"]),
        })
    return resolved


def save_manifest(entries: List[Dict[str, str]], path: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(entries, f, indent=2, ensure_ascii=False)


def load_recording(entry: Dict[str, str], target_rate_hz: float = TARGET_RATE_HZ) -> Recording:
    """Load one manifest entry and bring its audio to the model's input domain."""
    raw = load_wav(entry["wav_path"])
    audio = preprocess(raw, target_rate_hz=target_rate_hz)
    chewing = load_annotations(entry["annotation_path"])
    logger.info(
        f"Loaded {entry['subject_id']}: {raw.duration_s:.1f} s at {raw.sample_rate_hz:.0f} Hz, "
        f"{len(chewing)} chewing intervals"
    )
    return Recording(entry["subject_id"], audio, chewing)


# ---------------------------------------------------------------------------
# Window store: preprocessed audio per subject
# ---------------------------------------------------------------------------


def save_store(recordings: Sequence[Recording], directory: str, extra: Optional[Dict[str, Any]] = None) -> str:
    """Persist preprocessed recordings, one `.npz` per subject plus an index.

    Returns:
        Path of the store index file
    """
    os.makedirs(directory, exist_ok=True)
    subjects = []
    for rec in recordings:
        filename = f"{sanitize_filename(rec.subject_id)}.npz"
        chewing = np.array([[i.start_s, i.end_s] for i in rec.chewing], dtype=np.float64).reshape(-1, 2)
        np.savez(
            os.path.join(directory, filename),
            samples=rec.audio.samples,
            sample_rate_hz=np.float64(rec.audio.sample_rate_hz),
            chewing=chewing,
        )
        subjects.append({"subject_id": rec.subject_id, "file": filename})

    index_path = os.path.join(directory, STORE_INDEX)
    with open(index_path, "w", encoding="utf-8") as f:
        json.dump({"subjects": subjects, **(extra or {})}, f, indent=2, ensure_ascii=False)
    logger.info(f"Wrote window store with {len(subjects)} subjects to {directory}")
    return index_path


def load_store_index(directory: str) -> Dict[str, Any]:
    """Read `store.json`, the subject list and metadata of a window store.

    Raises:
        ArtifactMissingError: If the store does not exist yet
    """
    index_path = os.path.join(directory, STORE_INDEX)
    if not os.path.exists(index_path):
        raise ArtifactMissingError(index_path, "preprocess")
    with open(index_path, "r", encoding="utf-8") as f:
        return json.load(f)


def load_store(directory: str, subject_ids: Optional[Iterable[str]] = None) -> List[Recording]:
    """Load preprocessed recordings written by `save_store`.

    Raises:
        ArtifactMissingError: If the store does not exist yet
    """
    index = load_store_index(directory)

    wanted = set(subject_ids) if subject_ids is not None else None
    recordings = []
    for item in index["subjects"]:
        if wanted is not None and item["subject_id"] not in wanted:
            continue
        with np.load(os.path.join(directory, item["file"])) as data:
            audio = TimeSeries(data["samples"], float(data["sample_rate_hz"]))
            chewing = [Interval(float(s), float(e)) for s, e in data["chewing"]]
        recordings.append(Recording(item["subject_id"], audio, chewing))
    return recordings


# ---------------------------------------------------------------------------
# Labeling and splits
# ---------------------------------------------------------------------------


def label_windows(
    rec: Recording,
    window_len: int = WINDOW_LEN,
    stride: int = TRAIN_STRIDE,
    coverage_threshold: float = COVERAGE_THRESHOLD,
) -> List[LabeledWindow]:
    """Cut a recording into windows labeled 1 when chewing covers enough of them.

    A window is positive iff the chewing time inside it divided by the window
    duration is at least `coverage_threshold`.

    Raises:
        DatasetError: If the threshold is outside (0, 1]
    """
    if not 0 < coverage_threshold <= 1:
        raise DatasetError(f"coverage_threshold must be in (0, 1], got {coverage_threshold}")

    matrix = extract_windows(rec.audio, window_len, stride)
    window_s = window_len / rec.audio.sample_rate_hz
    starts = matrix.origin_times_s
    ends = starts + window_s
    covered = np.zeros(len(starts))
    for interval in rec.chewing:
        covered += np.clip(np.minimum(ends, interval.end_s) - np.maximum(starts, interval.start_s), 0.0, None)
    coverage = covered / window_s

    return [
        LabeledWindow(matrix.windows[k], int(coverage[k] >= coverage_threshold), rec.subject_id, float(starts[k]))
        for k in range(len(matrix))
    ]


def stack_windows(labeled: Sequence[LabeledWindow], window_len: int = WINDOW_LEN) -> WindowSet:
    """Stack labeled windows into contiguous arrays."""
    if not labeled:
        return WindowSet(
            np.zeros((0, window_len)), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=object), np.zeros(0)
        )
    return WindowSet(
        windows=np.stack([w.window for w in labeled]),
        labels=np.array([w.label for w in labeled], dtype=np.int64),
        subject_ids=np.array([w.subject_id for w in labeled], dtype=object),
        start_s=np.array([w.start_s for w in labeled], dtype=np.float64),
    )


def window_set(
    recordings: Sequence[Recording],
    window_len: int = WINDOW_LEN,
    stride: int = TRAIN_STRIDE,
    coverage_threshold: float = COVERAGE_THRESHOLD,
) -> WindowSet:
    """Label and stack the windows of several recordings."""
    labeled: List[LabeledWindow] = []
    for rec in recordings:
        labeled.extend(label_windows(rec, window_len, stride, coverage_threshold))
    return stack_windows(labeled, window_len)


def make_holdout_split(subject_ids: Iterable[str], n_holdout: int, seed: int) -> SubjectSplit:
    """Draw `n_holdout` subjects for final evaluation, the rest form the development set.

    Raises:
        DatasetError: If n_holdout is negative or not smaller than the number of subjects
    """
    ids = sorted(set(subject_ids))
    if not 0 <= n_holdout < len(ids):
        raise DatasetError(f"n_holdout must be in [0, {len(ids)}), got {n_holdout}")
    order = np.random.default_rng(seed).permutation(len(ids))
    holdout = frozenset(ids[i] for i in order[:n_holdout])
    return SubjectSplit(development=frozenset(ids) - holdout, holdout=holdout)


def make_loso_folds(dev_subjects: Iterable[str], n_validation: int, seed: int) -> List[Fold]:
    """One fold per development subject: it is tested, `n_validation` others validate.

    The validation subjects of fold k are drawn from the remaining subjects
    with a generator seeded by (seed, k).

    Raises:
        DatasetError: If the sizes leave no training subject
    """
    ids = sorted(set(dev_subjects))
    if len(ids) < 3:
        raise DatasetError(f"LOSO needs at least 3 development subjects, got {len(ids)}")
    if not 1 <= n_validation < len(ids) - 1:
        raise DatasetError(f"n_validation must be in [1, {len(ids) - 1}), got {n_validation}")

    folds = []
    for k, test in enumerate(ids):
        rest = [s for s in ids if s != test]
        picks = np.random.default_rng([seed, k]).choice(len(rest), size=n_validation, replace=False)
        validation = frozenset(rest[i] for i in picks)
        folds.append(Fold(index=k, train=frozenset(rest) - validation, validation=validation, test=test))
    return folds


def pick_validation(subjects: Iterable[str], n_validation: int, seed: int) -> Tuple[FrozenSet[str], FrozenSet[str]]:
    """Split training subjects into (train, validation) for a single model-selection run."""
    ids = sorted(set(subjects))
    if not 1 <= n_validation < len(ids):
        raise DatasetError(f"n_validation must be in [1, {len(ids)}), got {n_validation}")
    picks = np.random.default_rng([seed, len(ids)]).choice(len(ids), size=n_validation, replace=False)
    validation = frozenset(ids[i] for i in picks)
    return frozenset(ids) - validation, validation


# ---------------------------------------------------------------------------
# Synthetic recordings
# ---------------------------------------------------------------------------


def _chew_burst(rng: np.random.Generator, params: SynthParams, n: int, band_sos: np.ndarray) -> np.ndarray:
    noise = sps.sosfilt(band_sos, rng.standard_normal(n))
    std = noise.std()
    if std > 0:
        noise = noise / std
    t = np.arange(n) / params.sample_rate_hz
    return params.chew_amplitude * noise * np.exp(-t / params.burst_decay_s)


def synthesize_recording(params: SynthParams, subject_id: str = "synth") -> Recording:
    """Generate a recording whose chewing annotations are exactly its meal spans.

    Deterministic given `params.seed`.
    """
    rng = np.random.default_rng(params.seed)
    fs = params.sample_rate_hz
    n = int(round(params.duration_s * fs))
    audio = rng.normal(0.0, params.background_noise_std, n)

    band_sos = sps.butter(2, params.burst_band_hz, btype="bandpass", fs=fs, output="sos")
    burst_len = int(round(5 * params.burst_decay_s * fs))
    period_s = 1.0 / params.chew_rate_hz

    for span in params.meal_spans:
        onset_s = span.start_s
        span_end = min(int(round(span.end_s * fs)), n)
        while onset_s < span.end_s:
            jitter = rng.uniform(-params.onset_jitter, params.onset_jitter) * period_s
            start = int(round(max(span.start_s, onset_s + jitter) * fs))
            stop = min(start + burst_len, span_end)
            if stop > start:
                audio[start:stop] += _chew_burst(rng, params, stop - start, band_sos)
            onset_s += period_s

    return Recording(subject_id, TimeSeries(audio, fs), list(params.meal_spans))


def synthesize_corpus(
    n_subjects: int,
    duration_s: float,
    seed: int,
    meals_per_subject: int = 2,
    **overrides: Any,
) -> List[Recording]:
    """Generate one synthetic recording per subject.

    The recording is divided into `meals_per_subject` equal slots and one meal
    lasting 10-25% of the recording is placed at a random offset in each slot.
    """
    if n_subjects < 1:
        raise DatasetError(f"n_subjects must be positive, got {n_subjects}")
    slot = duration_s / meals_per_subject
    recordings = []
    for s, child in enumerate(np.random.SeedSequence(seed).spawn(n_subjects)):
        rng = np.random.default_rng(child)
        spans = []
        for m in range(meals_per_subject):
            length = rng.uniform(0.10, 0.25) * duration_s
            length = min(length, 0.9 * slot)
            start = m * slot + rng.uniform(0.0, slot - length)
            spans.append(Interval(round(start, 3), round(start + length, 3)))
        params = SynthParams(
            duration_s=duration_s,
            meal_spans=tuple(spans),
            seed=int(rng.integers(2**31 - 1)),
            **overrides,
        )
        recordings.append(synthesize_recording(params, subject_id=f"S{s + 1:02d}"))
    logger.info(f"Synthesized {n_subjects} recordings of {duration_s:.0f} s")
    return recordings
