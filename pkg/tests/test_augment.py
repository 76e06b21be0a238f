import numpy as np
import pytest

from chewing_ssl.core.augment import AugmentConfig, add_noise, amplify, augment_views, double_batch
from chewing_ssl.core.errors import TrainingError


class TestTransforms:
    """Test the two augmentations"""

    def test_amplify_is_global_scale(self, rng):
        x = rng.standard_normal(1000) + 3.0
        y = amplify(x, np.random.default_rng(0), AugmentConfig())
        ratio = y / x
        assert np.allclose(ratio, ratio[0])
        assert 0.5 <= ratio[0] <= 2.0

    def test_noise_is_bounded(self, rng):
        x = rng.standard_normal(10000)
        y = add_noise(x, np.random.default_rng(0), AugmentConfig(noise_bound=0.005))
        diff = y - x
        assert np.max(np.abs(diff)) <= 0.005
        assert np.std(diff) > 0.002

    def test_zero_noise_copies(self, rng):
        x = rng.standard_normal(10)
        y = add_noise(x, np.random.default_rng(0), AugmentConfig(noise_bound=0.0))
        np.testing.assert_array_equal(x, y)
        assert y is not x

    @pytest.mark.parametrize("kwargs", [{"amp_low": 0.0}, {"amp_low": 3.0, "amp_high": 2.0}, {"noise_bound": -1.0}])
    def test_invalid_config(self, kwargs):
        with pytest.raises(TrainingError):
            AugmentConfig(**kwargs)


class TestViews:
    """Test per-window seeding"""

    def test_views_reproducible(self, rng):
        x = rng.standard_normal(100)
        cfg = AugmentConfig(seed=9)
        a1, b1 = augment_views(x, cfg, epoch=3, index=17)
        a2, b2 = augment_views(x, cfg, epoch=3, index=17)
        np.testing.assert_array_equal(a1, a2)
        np.testing.assert_array_equal(b1, b2)

    def test_views_differ_across_epochs(self, rng):
        x = rng.standard_normal(100)
        cfg = AugmentConfig(seed=9)
        a1, _ = augment_views(x, cfg, epoch=1, index=0)
        a2, _ = augment_views(x, cfg, epoch=2, index=0)
        assert not np.array_equal(a1, a2)

    def test_batch_layout(self, rng):
        windows = rng.standard_normal((4, 50))
        batch = double_batch(windows, AugmentConfig(noise_bound=0.0), epoch=1)
        assert batch.samples.shape == (8, 50)
        assert batch.pairs() == [(0, 4), (1, 5), (2, 6), (3, 7)]
        # second view is the unchanged window when noise is off
        np.testing.assert_array_equal(batch.samples[4:], windows)

    def test_batch_independent_of_neighbours(self, rng):
        windows = rng.standard_normal((4, 50))
        cfg = AugmentConfig(seed=2)
        full = double_batch(windows, cfg, epoch=5, indices=[10, 11, 12, 13])
        part = double_batch(windows[2:], cfg, epoch=5, indices=[12, 13])
        np.testing.assert_array_equal(full.samples[2], part.samples[0])
        np.testing.assert_array_equal(full.samples[7], part.samples[3])

    def test_batch_needs_two_windows(self, rng):
        with pytest.raises(TrainingError):
            double_batch(rng.standard_normal((1, 50)), AugmentConfig())

    def test_index_count_mismatch(self, rng):
        with pytest.raises(TrainingError):
            double_batch(rng.standard_normal((3, 50)), AugmentConfig(), indices=[0, 1])
