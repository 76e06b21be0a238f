import os
import struct

import numpy as np
import pytest

from chewing_ssl.core import nn
from chewing_ssl.core.errors import ArchitectureError, ShapeError, WeightFileError
from chewing_ssl.core.model import (
    F_SPEC,
    WEIGHT_MAGIC,
    ArchitectureSpec,
    LayerSpec,
    as_model_input,
    build,
    build_f,
    build_gL,
    build_gNL,
    build_h,
    build_projection,
    build_supervised,
    compose,
    freeze,
    load_weights,
    save_weights,
    split_gNL,
)
from chewing_ssl.core.objective import bce_batch
from chewing_ssl.core.optim import Adam, AdamConfig


class TestArchitectureSpec:
    """Test shape propagation"""

    def test_f_maps_window_to_features(self):
        assert F_SPEC.input_shape == (1, 10000)
        assert F_SPEC.output_shape == (512,)
        shapes = F_SPEC.layer_shapes()
        assert shapes[-3] == (64, 286)
        assert shapes[-2] == (64, 8)

    def test_incompatible_layers(self):
        with pytest.raises(ArchitectureError):
            ArchitectureSpec("bad", (1, 10), (LayerSpec.conv(2, 11),))
        with pytest.raises(ArchitectureError):
            ArchitectureSpec("bad", (1, 10), (LayerSpec.dense(3),))

    def test_unknown_activation(self):
        with pytest.raises(ArchitectureError):
            LayerSpec.dense(3, "tanh")

    def test_dict_roundtrip(self, tiny_spec):
        assert ArchitectureSpec.from_dict(tiny_spec.to_dict()) == tiny_spec


class TestBuilders:
    """Test the fixed networks"""

    def test_f_output(self, rng):
        f = build_f(seed=0)
        y, _ = f.forward(rng.standard_normal((2, 1, 10000)), keep_cache=False)
        assert y.shape == (2, 512)
        assert np.all(y >= 0)

    def test_single_sample_rank_preserved(self, rng):
        h = build_h(seed=0)
        y, _ = h.forward(rng.standard_normal(512))
        assert y.shape == (1,)

    def test_h_outputs_probabilities(self, rng):
        h = build_h(seed=1)
        y = h.predict(rng.standard_normal((50, 512)) * 10)
        assert y.shape == (50, 1)
        assert np.all((y >= 0) & (y <= 1))

    def test_projection_dims(self, rng):
        x = rng.standard_normal((3, 512))
        assert build_gL(0).predict(x).shape == (3, 128)
        assert build_gNL(0).predict(x).shape == (3, 128)
        assert build_projection("linear", 0).segments[0].spec.name == "gL"
        with pytest.raises(ArchitectureError):
            build_projection("deep", 0)

    def test_seeded_init(self):
        a, b = build_gNL(5), build_gNL(5)
        for name, value in a.params.items():
            np.testing.assert_array_equal(value, b.params[name])
        assert np.all(a.params["gNL.0.bias"] == 0)

    def test_wrong_input_shape(self):
        with pytest.raises(ShapeError):
            build_h(0).forward(np.zeros((2, 100)))

    def test_as_model_input(self):
        assert as_model_input(np.zeros((4, 10000))).shape == (4, 1, 10000)

    def test_summary(self):
        summary = build_supervised(0).summary()
        assert [s["name"] for s in summary["segments"]] == ["f", "h"]
        assert summary["output_shape"] == [1]
        assert summary["total_parameters"] == summary["trainable_parameters"]


class TestSplitGNL:
    def test_split_is_equivalent(self, rng):
        g = build_gNL(2)
        g1, g2 = split_gNL(g)
        x = rng.standard_normal((4, 512))
        np.testing.assert_allclose(g2.predict(g1.predict(x)), g.predict(x), atol=1e-12)
        assert g1.output_shape == (512,)

    def test_split_copies(self):
        g = build_gNL(2)
        g1, _ = split_gNL(g)
        g1.params["gNL1.0.weight"][0, 0] += 1.0
        assert g1.params["gNL1.0.weight"][0, 0] != g.params["gNL.0.weight"][0, 0]

    def test_split_rejects_gL(self):
        with pytest.raises(ArchitectureError):
            split_gNL(build_gL(0))


class TestCompose:
    """Test composition and freezing"""

    def test_compose_shares_params(self):
        g = build_gNL(0)
        h = build_h(1)
        model = compose(g, h, trainable_names={"h"})
        assert model.params["gNL.0.weight"] is g.params["gNL.0.weight"]
        assert set(model.parameters(trainable_only=True)) == {k for k in model.params if k.startswith("h.")}

    def test_compose_errors(self):
        with pytest.raises(ArchitectureError):
            compose(build_gNL(0), build_h(1), trainable_names=set())
        with pytest.raises(ArchitectureError):
            compose(build_gNL(0), build_h(1), trainable_names={"f"})
        with pytest.raises(ArchitectureError):
            compose(build_gL(0), build_h(1), trainable_names={"h"})

    def test_freeze(self):
        model = freeze(build_gNL(0))
        assert model.num_parameters(trainable_only=True) == 0

    def test_frozen_part_unchanged_by_training(self, rng):
        g1, _ = split_gNL(build_gNL(0))
        h = build_h(1)
        model = compose(g1, h, trainable_names={"h"})
        frozen_before = {k: v.copy() for k, v in g1.params.items()}
        h_before = h.params["h.0.weight"].copy()

        x = rng.standard_normal((16, 512))
        y = (rng.uniform(size=(16, 1)) > 0.5).astype(float)
        adam = Adam(AdamConfig(lr=1e-2))
        for _ in range(100):
            out, cache = model.forward(x)
            _, up = bce_batch(out, y)
            _, grads = model.backward(cache, up, trainable_only=True, need_input_grad=False)
            assert not any(k.startswith("gNL1.") for k in grads)
            params = model.parameters(trainable_only=True)
            model.set_parameters(adam.step(params, grads))

        for k, v in frozen_before.items():
            np.testing.assert_array_equal(g1.params[k], v)
        assert not np.array_equal(h.params["h.0.weight"], h_before)

    def test_backward_stops_below_trainable(self, rng):
        model = compose(build_gNL(0), build_h(1), trainable_names={"h"})
        out, cache = model.forward(rng.standard_normal((2, 512)))
        gx, grads = model.backward(cache, np.ones_like(out), trainable_only=True)
        assert gx is None
        assert all(k.startswith("h.") for k in grads)


class TestWeightFiles:
    """Test the weight file format"""

    def test_roundtrip(self, temp_directory, rng):
        g1, g2 = split_gNL(build_gNL(4))
        model = compose(g1, g2, build_h(5), trainable_names={"h"})
        path = os.path.join(temp_directory, "nested", "model.weights")
        save_weights(model, path)
        loaded = load_weights(path)
        assert [s.name for s in loaded.segments] == ["gNL1", "gNL2", "h"]
        assert [s.trainable for s in loaded.segments] == [False, False, True]
        x = rng.standard_normal((3, 512))
        np.testing.assert_array_equal(loaded.predict(x), model.predict(x))

    def test_float32_roundtrip(self, temp_directory):
        model = build_h(0, dtype=np.float32)
        path = os.path.join(temp_directory, "h.weights")
        save_weights(model, path)
        assert load_weights(path).params["h.0.weight"].dtype == np.float32

    def test_bad_magic(self, temp_directory):
        path = os.path.join(temp_directory, "bad.weights")
        with open(path, "wb") as f:
            f.write(b"NOPE" + b"\x00" * 20)
        with pytest.raises(WeightFileError, match="magic"):
            load_weights(path)

    def test_unsupported_version(self, temp_directory):
        path = os.path.join(temp_directory, "v9.weights")
        with open(path, "wb") as f:
            f.write(WEIGHT_MAGIC + struct.pack("<HI", 9, 0))
        with pytest.raises(WeightFileError) as exc_info:
            load_weights(path)
        assert exc_info.value.details["version"] == 9

    def test_truncated(self, temp_directory):
        path = os.path.join(temp_directory, "h.weights")
        save_weights(build_h(0), path)
        with open(path, "rb") as f:
            data = f.read()
        with open(path, "wb") as f:
            f.write(data[:-100])
        with pytest.raises(WeightFileError, match="truncated"):
            load_weights(path)


class TestFullGradients:
    @pytest.mark.slow
    def test_supervised_chain(self, rng):
        model = build_supervised(seed=0)
        x = rng.standard_normal((1, 1, 10000))
        err = nn.grad_check(model, x, samples_per_tensor=4, abs_tol=1e-8)
        assert err < 1e-4

    def test_projection_chain(self, rng):
        model = compose(build_gNL(0), build_h(1), trainable_names={"gNL", "h"})
        err = nn.grad_check(model, rng.standard_normal((2, 512)), samples_per_tensor=20, abs_tol=1e-8)
        assert err < 1e-5

    def test_build_helper_names_segment(self, tiny_spec):
        assert build(tiny_spec, seed=0, name="renamed").segments[0].name == "renamed"
