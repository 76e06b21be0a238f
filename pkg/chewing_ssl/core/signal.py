"""Deterministic DSP preprocessing for in-ear audio.

Anti-aliased integer decimation, causal high-pass Butterworth filtering as a
cascade of biquads, and fixed-length windowing. All functions are pure.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import signal as sps

from chewing_ssl.core.constants import (
    ANTIALIAS_CUTOFF_RATIO,
    ANTIALIAS_TAPS_PER_FACTOR,
    HIGHPASS_CUTOFF_HZ,
    HIGHPASS_ORDER,
    TARGET_RATE_HZ,
)
from chewing_ssl.core.errors import SignalError
from chewing_ssl.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(eq=False)
class TimeSeries:
    """A sampled audio signal with an explicit sample rate."""

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise SignalError(f"samples must be one-dimensional, got shape {self.samples.shape}")
        if not self.sample_rate_hz > 0:
            raise SignalError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")
        if not np.all(np.isfinite(self.samples)):
            raise SignalError("samples contain NaN or Inf")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz


@dataclass(eq=False)
class IIRFilterSpec:
    """A cascade of second-order sections with a0 normalized to 1.

    `sections` uses the scipy layout, one row `[b0, b1, b2, 1, a1, a2]` per
    biquad.
    """

    sections: np.ndarray
    kind: str
    cutoff_hz: float
    order: int
    sample_rate_hz: float
    design: Dict[str, Union[str, float, int]] = field(init=False)

    def __post_init__(self) -> None:
        self.design = {
            "kind": self.kind,
            "cutoff_hz": self.cutoff_hz,
            "order": self.order,
            "sample_rate_hz": self.sample_rate_hz,
        }

    def poles(self) -> np.ndarray:
        """Return the poles of every section, shape [n_sections, 2]."""
        return np.array([np.roots(section[3:]) for section in self.sections])

    def is_stable(self) -> bool:
        return bool(np.all(np.abs(self.poles()) < 1.0))

    def response(self, freqs_hz: np.ndarray) -> np.ndarray:
        """Evaluate the complex frequency response H(e^{jω}) at the given frequencies.

        Evaluated section by section so that the double zero at z=1 of each
        high-pass biquad gives an exact null at DC.
        """
        freqs_hz = np.atleast_1d(np.asarray(freqs_hz, dtype=np.float64))
        z_inv = np.exp(-2j * np.pi * freqs_hz / self.sample_rate_hz)
        h = np.ones_like(z_inv)
        for b0, b1, b2, _, a1, a2 in self.sections:
            h = h * (b0 + b1 * z_inv + b2 * z_inv**2) / (1.0 + a1 * z_inv + a2 * z_inv**2)
        return h

    def magnitude_db(self, freqs_hz: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return 20.0 * np.log10(np.abs(self.response(freqs_hz)))


@dataclass(eq=False)
class WindowMatrix:
    """Fixed-length windows cut from a TimeSeries."""

    windows: np.ndarray
    window_len: int
    stride: int
    origin_times_s: np.ndarray
    sample_rate_hz: float

    def __len__(self) -> int:
        return self.windows.shape[0]


def design_highpass_butterworth(
    cutoff_hz: float = HIGHPASS_CUTOFF_HZ,
    sample_rate_hz: float = TARGET_RATE_HZ,
    order: int = HIGHPASS_ORDER,
) -> IIRFilterSpec:
    """Design a high-pass Butterworth filter as a cascade of biquads.

    Uses the bilinear transform with frequency prewarping, so the magnitude at
    `cutoff_hz` is exactly -3.01 dB.

    Args:
        cutoff_hz: -3 dB frequency in Hz
        sample_rate_hz: Sample rate the filter will run at
        order: Filter order, must be even

    Returns:
        Stable second-order-section cascade

    Raises:
        SignalError: If the cutoff is outside (0, Nyquist) or the order is odd
    """
    nyquist = sample_rate_hz / 2.0
    if sample_rate_hz <= 0:
        raise SignalError(f"sample_rate_hz must be positive, got {sample_rate_hz}")
    if not 0 < cutoff_hz < nyquist:
        raise SignalError(
            f"cutoff {cutoff_hz} Hz must lie strictly between 0 and Nyquist ({nyquist} Hz)",
            {"cutoff_hz": cutoff_hz, "nyquist_hz": nyquist},
        )
    if order <= 0 or order % 2:
        raise SignalError(f"order must be a positive even number (cascade of biquads), got {order}")

    sos = sps.butter(order, cutoff_hz, btype="highpass", fs=sample_rate_hz, output="sos")
    spec = IIRFilterSpec(
        sections=sos,
        kind="highpass_butterworth",
        cutoff_hz=float(cutoff_hz),
        order=int(order),
        sample_rate_hz=float(sample_rate_hz),
    )
    if not spec.is_stable():
        raise SignalError("designed filter is unstable", spec.design)
    logger.debug(f"Designed order-{order} high-pass at {cutoff_hz} Hz ({len(sos)} sections)")
    return spec


def filter_forward(filt: IIRFilterSpec, x: TimeSeries) -> TimeSeries:
    """Run the filter causally over `x` from zero initial conditions.

    The output has the same length as the input. Being causal, the filter adds
    phase delay (group delay of a few milliseconds above the cutoff).

    Raises:
        SignalError: If the filter and signal sample rates differ
    """
    if not math.isclose(filt.sample_rate_hz, x.sample_rate_hz, rel_tol=1e-12):
        raise SignalError(
            f"sample-rate mismatch: filter designed for {filt.sample_rate_hz} Hz, "
            f"signal is {x.sample_rate_hz} Hz"
        )
    if len(x) == 0:
        return TimeSeries(x.samples.copy(), x.sample_rate_hz)
    return TimeSeries(sps.sosfilt(filt.sections, x.samples), x.sample_rate_hz)


def antialias_taps(factor: int, sample_rate_hz: float) -> np.ndarray:
    """Hamming-windowed sinc low-pass used ahead of decimation by `factor`."""
    numtaps = ANTIALIAS_TAPS_PER_FACTOR * factor + 1
    cutoff_hz = ANTIALIAS_CUTOFF_RATIO * (sample_rate_hz / factor) / 2.0
    return sps.firwin(numtaps, cutoff_hz, window="hamming", fs=sample_rate_hz)


def decimate(x: TimeSeries, factor: int) -> TimeSeries:
    """Low-pass filter and keep every `factor`-th sample.

    The anti-aliasing FIR is applied centered (linear phase, zero delay) with
    zero padding, so the first and last few output samples carry an edge
    transient.

    Args:
        x: Input signal
        factor: Integer decimation factor

    Returns:
        Signal at `x.sample_rate_hz / factor` with floor(len(x) / factor) samples

    Raises:
        SignalError: If factor is smaller than 1
    """
    if int(factor) != factor or factor < 1:
        raise SignalError(f"decimation factor must be a positive integer, got {factor}")
    factor = int(factor)
    if factor == 1:
        return TimeSeries(x.samples.copy(), x.sample_rate_hz)

    taps = antialias_taps(factor, x.sample_rate_hz)
    n = len(x)
    out_len = n // factor
    if out_len == 0:
        return TimeSeries(np.zeros(0), x.sample_rate_hz / factor)

    delay = (len(taps) - 1) // 2
    filtered = np.convolve(x.samples, taps, mode="full")[delay:delay + n]
    return TimeSeries(filtered[::factor][:out_len], x.sample_rate_hz / factor)


def extract_windows(x: TimeSeries, window_len: int, stride: int) -> WindowMatrix:
    """Cut consecutive fixed-length windows out of `x`.

    Window k is x[k*stride : k*stride + window_len]; a trailing partial window
    is dropped and a signal shorter than one window yields no windows.

    Raises:
        SignalError: If stride or window_len is not positive
    """
    if stride <= 0:
        raise SignalError(f"stride must be positive, got {stride}")
    if window_len <= 0:
        raise SignalError(f"window_len must be positive, got {window_len}")

    if window_len > len(x):
        windows = np.zeros((0, window_len), dtype=np.float64)
    else:
        windows = sliding_window_view(x.samples, window_len)[::stride]
    origin_times_s = np.arange(windows.shape[0]) * stride / x.sample_rate_hz
    return WindowMatrix(
        windows=windows,
        window_len=int(window_len),
        stride=int(stride),
        origin_times_s=origin_times_s,
        sample_rate_hz=x.sample_rate_hz,
    )


def decimation_factor(source_rate_hz: float, target_rate_hz: float = TARGET_RATE_HZ) -> int:
    """Return the integer factor mapping `source_rate_hz` onto `target_rate_hz`.

    Raises:
        SignalError: If the ratio is not an integer
    """
    ratio = source_rate_hz / target_rate_hz
    factor = int(round(ratio))
    if factor < 1 or not math.isclose(ratio, factor, rel_tol=1e-9):
        raise SignalError(
            f"cannot reach {target_rate_hz} Hz from {source_rate_hz} Hz by integer decimation",
            {"source_rate_hz": source_rate_hz, "target_rate_hz": target_rate_hz},
        )
    return factor


def preprocess(
    x: TimeSeries,
    target_rate_hz: float = TARGET_RATE_HZ,
    cutoff_hz: float = HIGHPASS_CUTOFF_HZ,
    order: int = HIGHPASS_ORDER,
) -> TimeSeries:
    """Bring a raw recording to the model's input domain: decimate, then high-pass."""
    factor = decimation_factor(x.sample_rate_hz, target_rate_hz)
    down = decimate(x, factor)
    logger.debug(f"Decimated {x.sample_rate_hz} Hz -> {down.sample_rate_hz} Hz (factor {factor})")
    return filter_forward(design_highpass_butterworth(cutoff_hz, down.sample_rate_hz, order), down)
