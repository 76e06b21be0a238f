import numpy as np
import pytest

from chewing_ssl.core.errors import OptimizerError
from chewing_ssl.core.optim import (
    Adam,
    AdamConfig,
    Lars,
    LarsConfig,
    ScheduleConfig,
    adam_step,
    is_bias,
    lars_step,
    lr_at_epoch,
)


class TestSchedule:
    """Test warmup followed by cosine decay"""

    @pytest.mark.parametrize("epoch,expected", [(1, 0.03), (10, 0.3), (55, 0.15), (100, 0.0)])
    def test_reference_values(self, epoch, expected):
        assert lr_at_epoch(epoch, ScheduleConfig(100, 0.1, 0.3)) == pytest.approx(expected, abs=1e-12)

    def test_monotone_after_warmup(self):
        cfg = ScheduleConfig(100, 0.1, 0.3)
        rates = [lr_at_epoch(e, cfg) for e in range(10, 101)]
        assert all(a >= b for a, b in zip(rates, rates[1:]))

    def test_no_warmup(self):
        cfg = ScheduleConfig(20, 0.0, 1.0)
        assert lr_at_epoch(1, cfg) < 1.0
        assert lr_at_epoch(20, cfg) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("epoch", [0, 101])
    def test_epoch_out_of_range(self, epoch):
        with pytest.raises(OptimizerError):
            lr_at_epoch(epoch, ScheduleConfig(100))

    def test_invalid_config(self):
        with pytest.raises(OptimizerError):
            ScheduleConfig(0)
        with pytest.raises(OptimizerError):
            ScheduleConfig(10, 1.0)


class TestLars:
    """Test layer-wise adaptive rate scaling"""

    def test_reduces_to_sgd_for_exempt_tensors(self, rng):
        params = {"a.bias": rng.standard_normal(5)}
        grads = {"a.bias": rng.standard_normal(5)}
        cfg = LarsConfig(momentum=0.0, weight_decay=0.0)
        new, _ = lars_step(params, grads, {}, 0.1, cfg)
        np.testing.assert_allclose(new["a.bias"], params["a.bias"] - 0.1 * grads["a.bias"])

    def test_reduces_to_sgd_with_unit_ratio(self, rng):
        w = rng.standard_normal((3, 4))
        g = rng.standard_normal((3, 4))
        eta = float(np.linalg.norm(g) / np.linalg.norm(w))
        cfg = LarsConfig(momentum=0.0, weight_decay=0.0, eta=eta)
        new, _ = lars_step({"a.weight": w}, {"a.weight": g}, {}, 0.2, cfg)
        np.testing.assert_allclose(new["a.weight"], w - 0.2 * g)

    def test_trust_ratio(self, rng):
        w = rng.standard_normal(10)
        g = rng.standard_normal(10)
        cfg = LarsConfig(momentum=0.0, weight_decay=0.0, eta=1e-3)
        new, _ = lars_step({"x.weight": w}, {"x.weight": g}, {}, 1.0, cfg)
        step = np.linalg.norm(w - new["x.weight"])
        assert step == pytest.approx(1e-3 * np.linalg.norm(w))

    def test_momentum_accumulates(self):
        params = {"b.bias": np.zeros(2)}
        grads = {"b.bias": np.ones(2)}
        opt = Lars(LarsConfig(momentum=0.9))
        params = opt.step(params, grads, 1.0)
        params = opt.step(params, grads, 1.0)
        np.testing.assert_allclose(params["b.bias"], [-2.9, -2.9])

    def test_zero_weight_uses_unit_ratio(self):
        new, _ = lars_step({"z.weight": np.zeros(3)}, {"z.weight": np.ones(3)}, {}, 0.5, LarsConfig(momentum=0.0))
        np.testing.assert_allclose(new["z.weight"], [-0.5, -0.5, -0.5])

    def test_inputs_untouched(self, rng):
        w = rng.standard_normal(4)
        before = w.copy()
        lars_step({"a.weight": w}, {"a.weight": np.ones(4)}, {}, 0.1, LarsConfig())
        np.testing.assert_array_equal(w, before)

    def test_mismatched_grads(self):
        with pytest.raises(OptimizerError):
            lars_step({"a.weight": np.zeros(2)}, {"b.weight": np.zeros(2)}, {}, 0.1, LarsConfig())
        with pytest.raises(OptimizerError):
            lars_step({"a.weight": np.zeros(2)}, {"a.weight": np.zeros(3)}, {}, 0.1, LarsConfig())

    def test_is_bias(self):
        assert is_bias("f.0.bias")
        assert not is_bias("f.0.weight")


class TestAdam:
    """Test Adam"""

    def test_first_step_magnitude(self, rng):
        params = {"w": rng.standard_normal(20)}
        grads = {"w": rng.standard_normal(20) * 100}
        new, state = adam_step(params, grads, {}, AdamConfig(lr=1e-3), 1)
        assert np.all(np.abs(new["w"] - params["w"]) <= 1e-3 + 1e-12)
        assert set(state) == {"w.m", "w.v"}

    def test_first_step_is_sign_step(self):
        new, _ = adam_step({"w": np.zeros(3)}, {"w": np.array([2.0, -0.5, 0.0])}, {}, AdamConfig(lr=0.1), 1)
        np.testing.assert_allclose(new["w"], [-0.1, 0.1, 0.0], atol=1e-6)

    def test_minimizes_quadratic(self):
        params = {"w": np.array([3.0, -2.0])}
        opt = Adam(AdamConfig(lr=0.05))
        for _ in range(2000):
            params = opt.step(params, {"w": 2 * params["w"]})
        assert np.linalg.norm(params["w"]) < 0.05
        assert opt.t == 2000

    def test_step_count_starts_at_one(self):
        with pytest.raises(OptimizerError):
            adam_step({"w": np.zeros(1)}, {"w": np.zeros(1)}, {}, AdamConfig(), 0)

    @pytest.mark.parametrize("kwargs", [{"lr": 0.0}, {"beta1": 1.0}, {"epsilon": -1.0}])
    def test_invalid_config(self, kwargs):
        with pytest.raises(OptimizerError):
            AdamConfig(**kwargs)
