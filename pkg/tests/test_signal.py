import numpy as np
import pytest

from chewing_ssl.core.errors import SignalError
from chewing_ssl.core.signal import (
    TimeSeries,
    decimate,
    decimation_factor,
    design_highpass_butterworth,
    extract_windows,
    filter_forward,
    preprocess,
)


def _fit_amplitude(x: np.ndarray, freq_hz: float, rate_hz: float) -> float:
    """Least-squares amplitude of a sinusoid of known frequency."""
    t = np.arange(len(x)) / rate_hz
    basis = np.column_stack([np.sin(2 * np.pi * freq_hz * t), np.cos(2 * np.pi * freq_hz * t)])
    coef, *_ = np.linalg.lstsq(basis, x, rcond=None)
    return float(np.hypot(*coef))


class TestTimeSeries:
    """Test TimeSeries validation"""

    def test_rejects_non_finite(self):
        with pytest.raises(SignalError):
            TimeSeries(np.array([0.0, np.nan]), 2000.0)

    def test_rejects_bad_rate(self):
        with pytest.raises(SignalError):
            TimeSeries(np.zeros(4), 0.0)

    def test_rejects_2d(self):
        with pytest.raises(SignalError):
            TimeSeries(np.zeros((2, 2)), 2000.0)

    def test_duration(self):
        assert TimeSeries(np.zeros(5000), 2000.0).duration_s == 2.5


class TestHighpassDesign:
    """Test the Butterworth high-pass"""

    @pytest.fixture
    def filt(self):
        return design_highpass_butterworth(20.0, 2000.0, 4)

    def test_cutoff_is_minus_3db(self, filt):
        assert filt.magnitude_db(np.array([20.0]))[0] == pytest.approx(-3.01, abs=0.1)

    def test_stopband_attenuation(self, filt):
        assert filt.magnitude_db(np.array([2.0]))[0] <= -40.0

    def test_exact_dc_null(self, filt):
        assert np.abs(filt.response(np.array([0.0])))[0] == 0.0

    def test_passband_is_flat(self, filt):
        assert filt.magnitude_db(np.array([500.0]))[0] == pytest.approx(0.0, abs=0.01)

    def test_stable_with_sections(self, filt):
        assert filt.is_stable()
        assert filt.sections.shape == (2, 6)
        np.testing.assert_allclose(filt.sections[:, 3], 1.0)
        assert np.all(np.abs(filt.poles()) < 1.0)

    def test_design_record(self, filt):
        assert filt.design == {
            "kind": "highpass_butterworth",
            "cutoff_hz": 20.0,
            "order": 4,
            "sample_rate_hz": 2000.0,
        }

    @pytest.mark.parametrize("cutoff", [0.0, -5.0, 1000.0, 1500.0])
    def test_cutoff_outside_band(self, cutoff):
        with pytest.raises(SignalError):
            design_highpass_butterworth(cutoff, 2000.0, 4)

    def test_odd_order(self):
        with pytest.raises(SignalError):
            design_highpass_butterworth(20.0, 2000.0, 3)


class TestFilterForward:
    """Test causal filtering"""

    def test_length_preserved(self, rng):
        filt = design_highpass_butterworth()
        x = TimeSeries(rng.standard_normal(3001), 2000.0)
        assert len(filter_forward(filt, x)) == 3001

    def test_removes_dc(self):
        filt = design_highpass_butterworth()
        y = filter_forward(filt, TimeSeries(np.ones(20000), 2000.0))
        assert abs(y.samples[-1]) < 1e-6

    def test_causal_zero_state(self):
        filt = design_highpass_butterworth()
        x = np.zeros(100)
        x[50] = 1.0
        y = filter_forward(filt, TimeSeries(x, 2000.0))
        assert np.all(y.samples[:50] == 0.0)

    def test_rate_mismatch(self):
        filt = design_highpass_butterworth(20.0, 2000.0, 4)
        with pytest.raises(SignalError):
            filter_forward(filt, TimeSeries(np.zeros(10), 48000.0))

    def test_empty(self):
        y = filter_forward(design_highpass_butterworth(), TimeSeries(np.zeros(0), 2000.0))
        assert len(y) == 0


class TestDecimate:
    """Test anti-aliased decimation"""

    def test_passband_sine_keeps_amplitude(self):
        fs = 48000.0
        t = np.arange(int(2 * fs)) / fs
        x = TimeSeries(np.sin(2 * np.pi * 100.0 * t), fs)
        y = decimate(x, 24)
        assert y.sample_rate_hz == 2000.0
        assert len(y) == len(x) // 24
        # edge transients of the zero-padded FIR excluded
        amp = _fit_amplitude(y.samples[200:-200], 100.0, 2000.0)
        assert amp == pytest.approx(1.0, rel=0.01)

    def test_out_of_band_sine_is_suppressed(self):
        fs = 48000.0
        t = np.arange(int(fs)) / fs
        x = TimeSeries(np.sin(2 * np.pi * 5000.0 * t), fs)
        y = decimate(x, 24)
        assert np.max(np.abs(y.samples[100:-100])) < 0.01

    def test_output_length_floor(self, rng):
        y = decimate(TimeSeries(rng.standard_normal(1000), 48000.0), 24)
        assert len(y) == 41

    def test_factor_one_copies(self, rng):
        x = TimeSeries(rng.standard_normal(10), 2000.0)
        y = decimate(x, 1)
        np.testing.assert_array_equal(x.samples, y.samples)
        assert y.samples is not x.samples

    @pytest.mark.parametrize("factor", [0, -2, 1.5])
    def test_bad_factor(self, factor):
        with pytest.raises(SignalError):
            decimate(TimeSeries(np.zeros(100), 48000.0), factor)

    def test_shorter_than_factor(self):
        y = decimate(TimeSeries(np.zeros(10), 48000.0), 24)
        assert len(y) == 0
        assert y.sample_rate_hz == 2000.0


class TestDecimationFactor:
    def test_integer_ratio(self):
        assert decimation_factor(48000.0) == 24
        assert decimation_factor(2000.0) == 1

    @pytest.mark.parametrize("rate", [44100.0, 1000.0])
    def test_non_integer_ratio(self, rate):
        with pytest.raises(SignalError):
            decimation_factor(rate)


class TestExtractWindows:
    """Test fixed-length windowing"""

    def test_window_contents(self):
        x = TimeSeries(np.arange(25, dtype=float), 2000.0)
        wm = extract_windows(x, 10, 5)
        assert len(wm) == 4
        np.testing.assert_array_equal(wm.windows[1], np.arange(5, 15))
        np.testing.assert_allclose(wm.origin_times_s, np.arange(4) * 5 / 2000.0)

    def test_trailing_partial_dropped(self):
        wm = extract_windows(TimeSeries(np.zeros(29999), 2000.0), 10000, 10000)
        assert len(wm) == 2

    def test_shorter_than_window(self):
        wm = extract_windows(TimeSeries(np.zeros(9999), 2000.0), 10000, 2000)
        assert wm.windows.shape == (0, 10000)
        assert len(wm.origin_times_s) == 0

    @pytest.mark.parametrize("window_len,stride", [(10, 0), (0, 5), (10, -1)])
    def test_bad_arguments(self, window_len, stride):
        with pytest.raises(SignalError):
            extract_windows(TimeSeries(np.zeros(100), 2000.0), window_len, stride)


class TestPreprocess:
    def test_chain_output_domain(self, rng):
        x = TimeSeries(rng.standard_normal(48000), 48000.0)
        y = preprocess(x)
        assert y.sample_rate_hz == 2000.0
        assert len(y) == 2000

    def test_unreachable_rate(self):
        with pytest.raises(SignalError):
            preprocess(TimeSeries(np.zeros(4410), 44100.0))
