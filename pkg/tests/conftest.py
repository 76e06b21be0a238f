import os
import tempfile

import numpy as np
import pytest

from chewing_ssl.core.dataset import Interval, Recording, SynthParams, synthesize_corpus, synthesize_recording
from chewing_ssl.core.model import ArchitectureSpec, LayerSpec, build

"""
Pytest configuration and shared fixtures
"""


@pytest.fixture(scope="session", autouse=True)
def setup_environment():
    """Keep tests independent of the caller's environment"""
    saved = {key: os.environ.pop(key, None) for key in ("CHEWING_SSL_OUTPUT_ROOT", "CHEWING_SSL_CONFIG")}
    yield
    for key, value in saved.items():
        if value is not None:
            os.environ[key] = value


@pytest.fixture
def temp_directory():
    """Temporary directory for files written by a test"""
    with tempfile.TemporaryDirectory() as tmpdirname:
        yield tmpdirname


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def short_recording():
    """60 s synthetic recording with one meal from 10 s to 40 s"""
    params = SynthParams(duration_s=60.0, meal_spans=(Interval(10.0, 40.0),), seed=7)
    return synthesize_recording(params, subject_id="S01")


@pytest.fixture
def small_corpus():
    """Four 60 s subjects with two meals each"""
    return synthesize_corpus(4, 60.0, seed=3)


@pytest.fixture
def flat_recording():
    """20 s of silence with hand-placed chewing intervals"""
    from chewing_ssl.core.signal import TimeSeries

    audio = TimeSeries(np.zeros(40000), 2000.0)
    return Recording("S09", audio, [Interval(2.5, 7.5), Interval(15.0, 17.4)])


@pytest.fixture
def tiny_spec():
    """Conv/pool/dense chain small enough for exhaustive gradient checks"""
    return ArchitectureSpec(
        "tiny",
        (2, 23),
        (
            LayerSpec.conv(3, 4),
            LayerSpec.pool(),
            LayerSpec.conv(4, 3),
            LayerSpec.adaptive_pool(3),
            LayerSpec.flatten(),
            LayerSpec.dense(5, "relu"),
            LayerSpec.dense(1, "sigmoid"),
        ),
    )


@pytest.fixture
def tiny_model(tiny_spec):
    return build(tiny_spec, seed=11)
