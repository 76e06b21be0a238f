"""Augmentations for contrastive pretraining.

T1 scales a window by a random global amplification level, T2 adds bounded
uniform noise. Each source window draws from its own generator seeded by
(seed, epoch, window index), so a batch does not depend on which other
windows it contains.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from chewing_ssl.core.errors import TrainingError


@dataclass(frozen=True)
class AugmentConfig:
    amp_low: float = 0.5
    amp_high: float = 2.0
    noise_bound: float = 0.005
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0 < self.amp_low <= self.amp_high:
            raise TrainingError(f"need 0 < amp_low <= amp_high, got ({self.amp_low}, {self.amp_high})")
        if self.noise_bound < 0:
            raise TrainingError(f"noise_bound must be non-negative, got {self.noise_bound}")


@dataclass(eq=False)
class ContrastiveBatch:
    """2n views ordered [T1(x_1)..T1(x_n), T2(x_1)..T2(x_n)]; view i pairs with i + n."""

    samples: np.ndarray
    n: int

    def __post_init__(self) -> None:
        if self.samples.shape[0] != 2 * self.n:
            raise TrainingError(f"contrastive batch must hold {2 * self.n} views, got {self.samples.shape[0]}")

    def pairs(self) -> Sequence[Tuple[int, int]]:
        return [(i, i + self.n) for i in range(self.n)]


def amplify(x: np.ndarray, rng: np.random.Generator, config: AugmentConfig = AugmentConfig()) -> np.ndarray:
    """T1: alpha * x with alpha ~ U[amp_low, amp_high], one alpha per call."""
    alpha = rng.uniform(config.amp_low, config.amp_high)
    return alpha * x


def add_noise(x: np.ndarray, rng: np.random.Generator, config: AugmentConfig = AugmentConfig()) -> np.ndarray:
    """T2: x + v with v i.i.d. ~ U[-noise_bound, noise_bound] per sample."""
    if config.noise_bound == 0:
        return np.array(x, copy=True)
    return x + rng.uniform(-config.noise_bound, config.noise_bound, size=np.shape(x))


def augment_views(x: np.ndarray, config: AugmentConfig, epoch: int, index: int) -> Tuple[np.ndarray, np.ndarray]:
    """Both views of one window, drawn from the window's own stream."""
    rng = np.random.default_rng([config.seed, epoch, index])
    return amplify(x, rng, config), add_noise(x, rng, config)


def double_batch(
    windows: np.ndarray,
    config: AugmentConfig,
    epoch: int = 0,
    indices: Optional[Sequence[int]] = None,
) -> ContrastiveBatch:
    """Build the 2n-view batch for n source windows.

    Args:
        windows: Source windows, shape [n, L]
        config: Augmentation ranges and seed
        epoch: Epoch number mixed into every window's seed
        indices: Dataset index of each window, defaults to 0..n-1

    Raises:
        TrainingError: If fewer than 2 windows are given
    """
    windows = np.asarray(windows)
    n = windows.shape[0]
    if n < 2:
        raise TrainingError(f"a contrastive batch needs at least 2 windows, got {n}")
    if indices is None:
        indices = range(n)
    elif len(indices) != n:
        raise TrainingError(f"got {len(indices)} indices for {n} windows")

    samples = np.empty((2 * n,) + windows.shape[1:], dtype=np.result_type(windows, np.float64))
    for i, index in enumerate(indices):
        samples[i], samples[i + n] = augment_views(windows[i], config, epoch, int(index))
    return ContrastiveBatch(samples, n)
