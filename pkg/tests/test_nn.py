import numpy as np
import pytest

from chewing_ssl.core import nn
from chewing_ssl.core.errors import ShapeError
from chewing_ssl.core.model import ArchitectureSpec, LayerSpec, build

GRAD_TOL = 1e-5
ABS_TOL = 1e-8


class _Kernel:
    """Wrap one kernel as a grad_check fragment"""

    def __init__(self, kind, params, **kwargs):
        self.kind = kind
        self._params = params
        self.kwargs = kwargs

    @property
    def params(self):
        return self._params

    def forward(self, x):
        if self.kind == "conv":
            return nn.conv1d_forward(x, self._params["weight"], self._params["bias"]), x
        if self.kind == "dense":
            return nn.dense_forward(x, self._params["weight"], self._params["bias"]), x
        if self.kind == "pool":
            y, idx = nn.maxpool2_forward(x)
            return y, (x, idx)
        if self.kind == "adaptive_pool":
            y, idx = nn.adaptive_maxpool_forward(x, self.kwargs["target_len"])
            return y, (x, idx)
        if self.kind == "sigmoid":
            y = nn.sigmoid_forward(x)
            return y, y
        raise AssertionError(self.kind)

    def backward(self, cache, upstream):
        if self.kind == "conv":
            gx, gk, gb = nn.conv1d_backward(cache, self._params["weight"], upstream)
            return gx, {"weight": gk, "bias": gb}
        if self.kind == "dense":
            gx, gw, gb = nn.dense_backward(cache, self._params["weight"], upstream)
            return gx, {"weight": gw, "bias": gb}
        if self.kind == "pool":
            x, idx = cache
            return nn.maxpool2_backward(idx, upstream, x.shape[-1]), {}
        if self.kind == "adaptive_pool":
            x, idx = cache
            return nn.adaptive_maxpool_backward(idx, upstream, x.shape[-1]), {}
        return nn.sigmoid_backward(cache, upstream), {}


class TestConv1d:
    """Test valid cross-correlation"""

    def test_matches_reference(self, rng):
        x = rng.standard_normal((3, 40))
        kernel = rng.standard_normal((4, 3, 7))
        bias = rng.standard_normal(4)
        y = nn.conv1d_forward(x, kernel, bias)
        assert y.shape == (4, 34)
        for c in range(4):
            expected = bias[c] + sum(np.correlate(x[i], kernel[c, i], mode="valid") for i in range(3))
            np.testing.assert_allclose(y[c], expected, atol=1e-12)

    def test_batch_equals_singles(self, rng):
        x = rng.standard_normal((5, 2, 20))
        kernel = rng.standard_normal((3, 2, 4))
        bias = rng.standard_normal(3)
        batched = nn.conv1d_forward(x, kernel, bias)
        for n in range(5):
            np.testing.assert_allclose(batched[n], nn.conv1d_forward(x[n], kernel, bias))

    def test_length_equals_kernel(self, rng):
        y = nn.conv1d_forward(rng.standard_normal((1, 5)), rng.standard_normal((2, 1, 5)), np.zeros(2))
        assert y.shape == (2, 1)

    def test_shorter_than_kernel(self, rng):
        with pytest.raises(ShapeError):
            nn.conv1d_forward(rng.standard_normal((1, 4)), rng.standard_normal((2, 1, 5)), np.zeros(2))

    def test_channel_mismatch(self, rng):
        with pytest.raises(ShapeError):
            nn.conv1d_forward(rng.standard_normal((2, 10)), rng.standard_normal((2, 3, 5)), np.zeros(2))

    def test_gradients(self, rng):
        frag = _Kernel("conv", {"weight": rng.standard_normal((3, 2, 5)), "bias": rng.standard_normal(3)})
        assert nn.grad_check(frag, rng.standard_normal((4, 2, 17)), abs_tol=ABS_TOL) < GRAD_TOL


class TestMaxPool:
    """Test width-2 max-pooling"""

    def test_ties_pick_first_index(self):
        x = np.array([[1.0, 1.0, 3.0, 3.0]])
        y, idx = nn.maxpool2_forward(x)
        np.testing.assert_array_equal(y, [[1.0, 3.0]])
        np.testing.assert_array_equal(idx, [[0, 2]])

    def test_odd_length_drops_last(self):
        x = np.array([[0.0, 1.0, 5.0, 2.0, 9.0]])
        y, idx = nn.maxpool2_forward(x)
        np.testing.assert_array_equal(y, [[1.0, 5.0]])
        np.testing.assert_array_equal(idx, [[1, 2]])

    def test_backward_routes_to_winner(self):
        x = np.array([[0.0, 1.0, 5.0, 2.0, 9.0]])
        _, idx = nn.maxpool2_forward(x)
        g = nn.maxpool2_backward(idx, np.array([[10.0, 20.0]]), input_len=5)
        np.testing.assert_array_equal(g, [[0.0, 10.0, 20.0, 0.0, 0.0]])

    def test_too_short(self):
        with pytest.raises(ShapeError):
            nn.maxpool2_forward(np.zeros((1, 1)))

    def test_gradients(self, rng):
        frag = _Kernel("pool", {})
        assert nn.grad_check(frag, rng.standard_normal((3, 2, 11)), abs_tol=ABS_TOL) < GRAD_TOL


class TestAdaptiveMaxPool:
    """Test adaptive max-pooling"""

    def test_bins_tile_input(self):
        np.testing.assert_array_equal(nn.adaptive_bins(10, 3), [0, 3, 6, 10])
        np.testing.assert_array_equal(nn.adaptive_bins(286, 8)[[0, -1]], [0, 286])

    def test_bin_edges_round_down(self):
        # 286 / 8 = 35.75 per bin
        np.testing.assert_array_equal(nn.adaptive_bins(286, 8), [0, 35, 71, 107, 143, 178, 214, 250, 286])

    def test_bin_maxima(self):
        x = np.arange(10, dtype=float)[None, :]
        y, idx = nn.adaptive_maxpool_forward(x, 3)
        np.testing.assert_array_equal(y, [[2.0, 5.0, 9.0]])
        np.testing.assert_array_equal(idx, [[2, 5, 9]])

    def test_identity_when_lengths_match(self, rng):
        x = rng.standard_normal((2, 8))
        y, _ = nn.adaptive_maxpool_forward(x, 8)
        np.testing.assert_array_equal(y, x)

    def test_shorter_than_target(self):
        with pytest.raises(ShapeError):
            nn.adaptive_maxpool_forward(np.zeros((1, 5)), 8)

    def test_gradients(self, rng):
        frag = _Kernel("adaptive_pool", {}, target_len=4)
        assert nn.grad_check(frag, rng.standard_normal((2, 3, 13)), abs_tol=ABS_TOL) < GRAD_TOL


class TestDenseAndActivations:
    def test_dense_values(self):
        w = np.array([[1.0, 2.0], [0.0, -1.0]])
        np.testing.assert_allclose(nn.dense_forward(np.array([3.0, 4.0]), w, np.array([1.0, 0.0])), [12.0, -4.0])

    def test_dense_dim_mismatch(self):
        with pytest.raises(ShapeError):
            nn.dense_forward(np.zeros(3), np.zeros((2, 4)), np.zeros(2))

    def test_dense_gradients(self, rng):
        frag = _Kernel("dense", {"weight": rng.standard_normal((4, 6)), "bias": rng.standard_normal(4)})
        assert nn.grad_check(frag, rng.standard_normal((5, 6)), abs_tol=ABS_TOL) < GRAD_TOL

    def test_relu_subgradient_at_zero(self):
        g = nn.relu_backward(np.array([-1.0, 0.0, 2.0]), np.ones(3))
        np.testing.assert_array_equal(g, [0.0, 0.0, 1.0])

    def test_sigmoid_saturates_without_overflow(self):
        with np.errstate(over="raise"):
            y = nn.sigmoid_forward(np.array([-1000.0, 0.0, 1000.0]))
        np.testing.assert_allclose(y, [0.0, 0.5, 1.0])

    def test_sigmoid_gradients(self, rng):
        assert nn.grad_check(_Kernel("sigmoid", {}), rng.standard_normal((3, 4)), abs_tol=ABS_TOL) < GRAD_TOL


class TestGradCheck:
    """Test the gradient checker itself"""

    def test_rejects_float32(self, tiny_spec):
        model = build(tiny_spec, seed=0, dtype=np.float32)
        with pytest.raises(ShapeError):
            nn.grad_check(model, np.zeros((2, 23)))

    def test_detects_wrong_gradient(self, rng):
        class Broken(_Kernel):
            def backward(self, cache, upstream):
                gx, grads = super().backward(cache, upstream)
                return gx * 2.0, grads

        frag = Broken("dense", {"weight": rng.standard_normal((2, 3)), "bias": np.zeros(2)})
        assert nn.grad_check(frag, rng.standard_normal((2, 3))) > 0.1

    @pytest.mark.parametrize(
        "layers,input_shape",
        [
            ((LayerSpec.conv(3, 4),), (2, 12)),
            ((LayerSpec.conv(3, 4, "linear"), LayerSpec.pool()), (2, 13)),
            ((LayerSpec.conv(2, 3), LayerSpec.adaptive_pool(4), LayerSpec.flatten()), (1, 15)),
            ((LayerSpec.dense(6, "relu"), LayerSpec.dense(3)), (5,)),
            ((LayerSpec.dense(1, "sigmoid"),), (7,)),
        ],
    )
    def test_model_layers(self, rng, layers, input_shape):
        model = build(ArchitectureSpec("fragment", input_shape, layers), seed=3)
        x = rng.standard_normal((3,) + input_shape)
        assert nn.grad_check(model, x, abs_tol=ABS_TOL) < GRAD_TOL

    def test_tiny_chain(self, tiny_model, rng):
        assert nn.grad_check(tiny_model, rng.standard_normal((2, 2, 23)), abs_tol=ABS_TOL) < GRAD_TOL
