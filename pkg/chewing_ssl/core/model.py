"""Network assembly: the feature extractor f, projection heads g, classifier h.

A `ModelGraph` is an ordered list of `Segment`s. Each segment owns the
parameters of one architecture and a trainable flag, so composed models such
as h∘g^NL_1∘f^NL can freeze everything except h.
"""

import json
import os
import struct
from dataclasses import asdict, dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from chewing_ssl.core import nn
from chewing_ssl.core.constants import (
    FEATURE_DIM,
    GNL_HIDDEN,
    HEAD_HIDDEN,
    POOLED_LEN,
    PROJECTION_DIM,
    WINDOW_LEN,
)
from chewing_ssl.core.errors import ArchitectureError, ShapeError, WeightFileError
from chewing_ssl.utils.logger import get_logger

logger = get_logger(__name__)

WEIGHT_MAGIC = b"CHWW"
WEIGHT_VERSION = 1
DTYPE_TAGS = {np.dtype(np.float32): 1, np.dtype(np.float64): 2}
TAG_DTYPES = {tag: dtype for dtype, tag in DTYPE_TAGS.items()}

LAYER_KINDS = ("conv", "pool", "adaptive_pool", "flatten", "dense")


@dataclass(frozen=True)
class LayerSpec:
    """One layer of an architecture.

    `activation` applies to conv and dense layers only.
    """

    kind: str
    out_channels: int = 0
    kernel_len: int = 0
    width: int = 0
    target_len: int = 0
    activation: str = "linear"

    def __post_init__(self) -> None:
        if self.kind not in LAYER_KINDS:
            raise ArchitectureError(f"unknown layer kind: {self.kind}")
        if self.activation not in nn.ACTIVATIONS:
            raise ArchitectureError(f"unknown activation: {self.activation}")

    @classmethod
    def conv(cls, out_channels: int, kernel_len: int, activation: str = "relu") -> "LayerSpec":
        return cls("conv", out_channels=out_channels, kernel_len=kernel_len, activation=activation)

    @classmethod
    def pool(cls) -> "LayerSpec":
        return cls("pool")

    @classmethod
    def adaptive_pool(cls, target_len: int) -> "LayerSpec":
        return cls("adaptive_pool", target_len=target_len)

    @classmethod
    def flatten(cls) -> "LayerSpec":
        return cls("flatten")

    @classmethod
    def dense(cls, width: int, activation: str = "linear") -> "LayerSpec":
        return cls("dense", width=width, activation=activation)

    @property
    def has_params(self) -> bool:
        return self.kind in ("conv", "dense")


@dataclass(frozen=True)
class ArchitectureSpec:
    """Ordered layers applied to inputs of `input_shape` (without batch axis).

    Construction fails when consecutive layer shapes are incompatible.
    """

    name: str
    input_shape: Tuple[int, ...]
    layers: Tuple[LayerSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "input_shape", tuple(int(d) for d in self.input_shape))
        object.__setattr__(self, "layers", tuple(self.layers))
        self.layer_shapes()

    def layer_shapes(self) -> List[Tuple[int, ...]]:
        """Output shape after every layer."""
        shape = self.input_shape
        shapes = []
        for i, layer in enumerate(self.layers):
            where = f"{self.name} layer {i} ({layer.kind})"
            if layer.kind == "conv":
                if len(shape) != 2:
                    raise ArchitectureError(f"{where} needs [ch, L] input, got {shape}")
                if shape[1] < layer.kernel_len:
                    raise ArchitectureError(f"{where}: length {shape[1]} shorter than kernel {layer.kernel_len}")
                shape = (layer.out_channels, shape[1] - layer.kernel_len + 1)
            elif layer.kind == "pool":
                if len(shape) != 2 or shape[1] < 2:
                    raise ArchitectureError(f"{where} needs [ch, L>=2] input, got {shape}")
                shape = (shape[0], shape[1] // 2)
            elif layer.kind == "adaptive_pool":
                if len(shape) != 2 or shape[1] < layer.target_len:
                    raise ArchitectureError(f"{where} cannot pool {shape} to {layer.target_len}")
                shape = (shape[0], layer.target_len)
            elif layer.kind == "flatten":
                shape = (int(np.prod(shape)),)
            else:
                if len(shape) != 1:
                    raise ArchitectureError(f"{where} needs a flat input, got {shape}")
                shape = (layer.width,)
            shapes.append(shape)
        return shapes

    @property
    def output_shape(self) -> Tuple[int, ...]:
        shapes = self.layer_shapes()
        return shapes[-1] if shapes else self.input_shape

    def param_shapes(self) -> Dict[str, Tuple[int, ...]]:
        shapes: Dict[str, Tuple[int, ...]] = {}
        shape = self.input_shape
        for i, (layer, out) in enumerate(zip(self.layers, self.layer_shapes())):
            if layer.kind == "conv":
                shapes[f"{i}.weight"] = (layer.out_channels, shape[0], layer.kernel_len)
                shapes[f"{i}.bias"] = (layer.out_channels,)
            elif layer.kind == "dense":
                shapes[f"{i}.weight"] = (layer.width, shape[0])
                shapes[f"{i}.bias"] = (layer.width,)
            shape = out
        return shapes

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "input_shape": list(self.input_shape), "layers": [asdict(l) for l in self.layers]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ArchitectureSpec":
        return cls(data["name"], tuple(data["input_shape"]), tuple(LayerSpec(**l) for l in data["layers"]))


def init_params(spec: ArchitectureSpec, seed: int, dtype: Any = np.float64) -> nn.ParamSet:
    """Uniform fan-in initialization with bound sqrt(6 / fan_in), zero biases."""
    rng = np.random.default_rng(seed)
    params: nn.ParamSet = {}
    for name, shape in spec.param_shapes().items():
        if name.endswith(".bias"):
            params[name] = np.zeros(shape, dtype=dtype)
        else:
            fan_in = int(np.prod(shape[1:]))
            bound = np.sqrt(6.0 / fan_in)
            params[name] = rng.uniform(-bound, bound, size=shape).astype(dtype)
    return params


@dataclass(eq=False)
class Segment:
    """Parameters of one architecture inside a model graph."""

    name: str
    spec: ArchitectureSpec
    params: nn.ParamSet
    trainable: bool = True

    def __post_init__(self) -> None:
        expected = self.spec.param_shapes()
        if set(expected) != set(self.params):
            raise ArchitectureError(
                f"segment {self.name}: parameters {sorted(self.params)} do not match {sorted(expected)}"
            )
        for key, shape in expected.items():
            if self.params[key].shape != shape:
                raise ArchitectureError(f"segment {self.name}: {key} has shape {self.params[key].shape}, expected {shape}")

    def forward(self, x: np.ndarray, keep_cache: bool = True) -> Tuple[np.ndarray, Optional[List[Any]]]:
        """Batched forward pass; x has shape [N, *input_shape]."""
        caches: List[Any] = []
        for i, layer in enumerate(self.spec.layers):
            if layer.kind == "conv":
                z = nn.conv1d_forward(x, self.params[f"{i}.weight"], self.params[f"{i}.bias"])
                y = nn.ACTIVATIONS[layer.activation][0](z)
                aux: Any = y
            elif layer.kind == "dense":
                z = nn.dense_forward(x, self.params[f"{i}.weight"], self.params[f"{i}.bias"])
                y = nn.ACTIVATIONS[layer.activation][0](z)
                aux = y
            elif layer.kind == "pool":
                y, aux = nn.maxpool2_forward(x)
            elif layer.kind == "adaptive_pool":
                y, aux = nn.adaptive_maxpool_forward(x, layer.target_len)
            else:
                y = x.reshape(x.shape[0], -1)
                aux = x.shape
            if keep_cache:
                caches.append((x, aux))
            x = y
        return x, caches if keep_cache else None

    def backward(
        self, caches: List[Any], upstream: np.ndarray, need_input_grad: bool = True
    ) -> Tuple[Optional[np.ndarray], nn.GradSet]:
        grads: nn.GradSet = {}
        g = upstream
        for i in range(len(self.spec.layers) - 1, -1, -1):
            layer = self.spec.layers[i]
            x, aux = caches[i]
            if layer.kind in ("conv", "dense"):
                act_backward = nn.ACTIVATIONS[layer.activation][1]
                if act_backward is not None:
                    g = act_backward(aux, g)
                weight = self.params[f"{i}.weight"]
                if layer.kind == "conv":
                    if i == 0 and not need_input_grad:
                        grads[f"{i}.weight"], grads[f"{i}.bias"] = _conv_param_grads(x, weight, g)
                        g = None
                        continue
                    g, grads[f"{i}.weight"], grads[f"{i}.bias"] = nn.conv1d_backward(x, weight, g)
                else:
                    g, grads[f"{i}.weight"], grads[f"{i}.bias"] = nn.dense_backward(x, weight, g)
            elif layer.kind == "pool":
                g = nn.maxpool2_backward(aux, g, x.shape[-1])
            elif layer.kind == "adaptive_pool":
                g = nn.adaptive_maxpool_backward(aux, g, x.shape[-1])
            else:
                g = g.reshape(aux)
        return g, grads

    def copy(self) -> "Segment":
        return Segment(self.name, self.spec, {k: v.copy() for k, v in self.params.items()}, self.trainable)


def _conv_param_grads(x: np.ndarray, weight: np.ndarray, upstream: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    k = weight.shape[2]
    out_len = x.shape[2] - k + 1
    grad_kernel = np.empty_like(weight)
    for j in range(k):
        grad_kernel[:, :, j] = np.tensordot(upstream, x[:, :, j : j + out_len], axes=([0, 2], [0, 2]))
    return grad_kernel, upstream.sum(axis=(0, 2))


class ModelGraph:
    """Ordered segments evaluated one after another.

    Parameter names are qualified by segment, e.g. `f.0.weight`.
    """

    def __init__(self, segments: Sequence[Segment]) -> None:
        if not segments:
            raise ArchitectureError("a model graph needs at least one segment")
        names = [s.name for s in segments]
        if len(set(names)) != len(names):
            raise ArchitectureError(f"duplicate segment names: {names}")
        for prev, cur in zip(segments, segments[1:]):
            if prev.spec.output_shape != cur.spec.input_shape:
                raise ArchitectureError(
                    f"segment {prev.name} outputs {prev.spec.output_shape} but {cur.name} expects {cur.spec.input_shape}"
                )
        self.segments: List[Segment] = list(segments)

    @property
    def input_shape(self) -> Tuple[int, ...]:
        return self.segments[0].spec.input_shape

    @property
    def output_shape(self) -> Tuple[int, ...]:
        return self.segments[-1].spec.output_shape

    def segment(self, name: str) -> Segment:
        for seg in self.segments:
            if seg.name == name:
                return seg
        raise ArchitectureError(f"no segment named {name}")

    @property
    def params(self) -> nn.ParamSet:
        return self.parameters()

    def parameters(self, trainable_only: bool = False) -> nn.ParamSet:
        """Qualified parameter arrays, shared with the segments (not copies)."""
        return {
            f"{seg.name}.{key}": value
            for seg in self.segments
            if seg.trainable or not trainable_only
            for key, value in seg.params.items()
        }

    def set_parameters(self, params: nn.ParamSet) -> None:
        """Replace parameter arrays by qualified name."""
        for qualified, value in params.items():
            seg_name, key = qualified.split(".", 1)
            seg = self.segment(seg_name)
            if key not in seg.params or seg.params[key].shape != value.shape:
                raise ShapeError(f"cannot assign {qualified} with shape {value.shape}")
            seg.params[key] = value

    def _batch(self, x: np.ndarray) -> Tuple[np.ndarray, bool]:
        x = np.asarray(x)
        if x.shape == self.input_shape:
            return x[None, ...], True
        if x.shape[1:] == self.input_shape:
            return x, False
        raise ShapeError(f"model expects input {self.input_shape} or [N, *{self.input_shape}], got {x.shape}")

    def forward(self, x: np.ndarray, keep_cache: bool = True) -> Tuple[np.ndarray, Any]:
        xb, single = self._batch(x)
        caches = []
        for seg in self.segments:
            xb, cache = seg.forward(xb, keep_cache)
            caches.append(cache)
        return (xb[0] if single else xb), ((caches, single) if keep_cache else None)

    def backward(
        self, cache: Any, upstream: np.ndarray, trainable_only: bool = False, need_input_grad: bool = True
    ) -> Tuple[Optional[np.ndarray], nn.GradSet]:
        """Backpropagate `upstream` through the graph.

        With `trainable_only`, frozen segments get no parameter gradients and
        backpropagation stops below the first trainable segment.
        """
        caches, single = cache
        g = upstream[None, ...] if single else upstream
        grads: nn.GradSet = {}
        first_needed = 0
        if trainable_only:
            trainable = [i for i, s in enumerate(self.segments) if s.trainable]
            first_needed = trainable[0] if trainable else len(self.segments)
        for i in range(len(self.segments) - 1, first_needed - 1, -1):
            seg = self.segments[i]
            input_grad = need_input_grad or i > first_needed
            g, seg_grads = seg.backward(caches[i], g, need_input_grad=input_grad)
            if seg.trainable or not trainable_only:
                grads.update({f"{seg.name}.{k}": v for k, v in seg_grads.items()})
        if g is not None and single and first_needed == 0:
            g = g[0]
        return (g if first_needed == 0 else None), grads

    def predict(self, x: np.ndarray, chunk_size: int = 256) -> np.ndarray:
        """Forward pass in chunks without keeping caches."""
        xb, single = self._batch(x)
        outputs = [
            self.forward(xb[start : start + chunk_size], keep_cache=False)[0]
            for start in range(0, xb.shape[0], chunk_size)
        ]
        if not outputs:
            return np.zeros((0,) + self.output_shape)
        y = np.concatenate(outputs, axis=0)
        return y[0] if single else y

    def copy(self) -> "ModelGraph":
        return ModelGraph([s.copy() for s in self.segments])

    def num_parameters(self, trainable_only: bool = False) -> int:
        return int(sum(p.size for p in self.parameters(trainable_only).values()))

    def summary(self) -> Dict[str, Any]:
        """Per-segment layer table with output shapes and parameter counts."""
        segments = []
        for seg in self.segments:
            layers = []
            for i, (layer, shape) in enumerate(zip(seg.spec.layers, seg.spec.layer_shapes())):
                count = sum(seg.params[k].size for k in (f"{i}.weight", f"{i}.bias") if k in seg.params)
                entry = {"kind": layer.kind, "output_shape": list(shape), "parameters": int(count)}
                if layer.has_params:
                    entry["activation"] = layer.activation
                layers.append(entry)
            segments.append({
                "name": seg.name,
                "trainable": seg.trainable,
                "input_shape": list(seg.spec.input_shape),
                "output_shape": list(seg.spec.output_shape),
                "parameters": int(sum(p.size for p in seg.params.values())),
                "layers": layers,
            })
        return {
            "segments": segments,
            "input_shape": list(self.input_shape),
            "output_shape": list(self.output_shape),
            "total_parameters": self.num_parameters(),
            "trainable_parameters": self.num_parameters(trainable_only=True),
        }


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


F_SPEC = ArchitectureSpec(
    "f",
    (1, WINDOW_LEN),
    (
        LayerSpec.conv(8, 16), LayerSpec.pool(),
        LayerSpec.conv(16, 16), LayerSpec.pool(),
        LayerSpec.conv(32, 16), LayerSpec.pool(),
        LayerSpec.conv(64, 16), LayerSpec.pool(),
        LayerSpec.conv(64, 39), LayerSpec.pool(),
        LayerSpec.adaptive_pool(POOLED_LEN),
        LayerSpec.flatten(),
    ),
)

GL_SPEC = ArchitectureSpec("gL", (FEATURE_DIM,), (LayerSpec.dense(PROJECTION_DIM),))

GNL_SPEC = ArchitectureSpec(
    "gNL",
    (FEATURE_DIM,),
    (
        LayerSpec.dense(GNL_HIDDEN, "relu"),
        LayerSpec.dense(GNL_HIDDEN, "relu"),
        LayerSpec.dense(PROJECTION_DIM),
    ),
)


def h_spec(in_dim: int = FEATURE_DIM) -> ArchitectureSpec:
    return ArchitectureSpec(
        "h",
        (in_dim,),
        (
            LayerSpec.dense(HEAD_HIDDEN, "relu"),
            LayerSpec.dense(HEAD_HIDDEN, "relu"),
            LayerSpec.dense(1, "sigmoid"),
        ),
    )


def build(spec: ArchitectureSpec, seed: int, dtype: Any = np.float64, name: Optional[str] = None) -> ModelGraph:
    """Single-segment graph with freshly initialized parameters."""
    return ModelGraph([Segment(name or spec.name, spec, init_params(spec, seed, dtype))])


def build_f(seed: int, dtype: Any = np.float64) -> ModelGraph:
    """Five conv+pool pairs, adaptive max-pool to 8, flatten: 10000 samples → 512 features."""
    return build(F_SPEC, seed, dtype)


def build_gL(seed: int, dtype: Any = np.float64) -> ModelGraph:
    return build(GL_SPEC, seed, dtype)


def build_gNL(seed: int, dtype: Any = np.float64) -> ModelGraph:
    return build(GNL_SPEC, seed, dtype)


def build_h(seed: int, in_dim: int = FEATURE_DIM, dtype: Any = np.float64) -> ModelGraph:
    return build(h_spec(in_dim), seed, dtype)


def build_projection(head_kind: str, seed: int, dtype: Any = np.float64) -> ModelGraph:
    if head_kind == "linear":
        return build_gL(seed, dtype)
    if head_kind == "nonlinear":
        return build_gNL(seed, dtype)
    raise ArchitectureError(f"unknown projection head kind: {head_kind}")


def split_gNL(g: ModelGraph) -> Tuple[ModelGraph, ModelGraph]:
    """Split g^NL into its first dense+ReLU layer and the remaining two layers.

    Raises:
        ArchitectureError: If `g` is not a single g^NL segment
    """
    if len(g.segments) != 1 or g.segments[0].spec.layers != GNL_SPEC.layers:
        raise ArchitectureError(f"split_gNL needs a g^NL graph, got {[s.spec.name for s in g.segments]}")
    seg = g.segments[0]
    first = ArchitectureSpec("gNL1", GNL_SPEC.input_shape, GNL_SPEC.layers[:1])
    rest = ArchitectureSpec("gNL2", (GNL_HIDDEN,), GNL_SPEC.layers[1:])
    g1 = Segment("gNL1", first, {"0.weight": seg.params["0.weight"].copy(), "0.bias": seg.params["0.bias"].copy()})
    g2 = Segment(
        "gNL2",
        rest,
        {
            "0.weight": seg.params["1.weight"].copy(),
            "0.bias": seg.params["1.bias"].copy(),
            "1.weight": seg.params["2.weight"].copy(),
            "1.bias": seg.params["2.bias"].copy(),
        },
    )
    return ModelGraph([g1]), ModelGraph([g2])


def compose(*parts: Union[ModelGraph, Segment], trainable_names: Iterable[str]) -> ModelGraph:
    """Chain graphs or segments, training only the segments named.

    The composed graph shares parameter arrays with its parts.

    Raises:
        ArchitectureError: If the trainable set is empty or names an absent segment
    """
    trainable: Set[str] = set(trainable_names)
    if not trainable:
        raise ArchitectureError("compose needs at least one trainable segment")
    segments: List[Segment] = []
    for part in parts:
        segments.extend(part.segments if isinstance(part, ModelGraph) else [part])
    unknown = trainable - {s.name for s in segments}
    if unknown:
        raise ArchitectureError(f"trainable names {sorted(unknown)} match no segment")
    return ModelGraph([Segment(s.name, s.spec, s.params, s.name in trainable) for s in segments])


def freeze(*parts: Union[ModelGraph, Segment]) -> ModelGraph:
    """Chain graphs or segments with every segment frozen, for feature extraction."""
    segments: List[Segment] = []
    for part in parts:
        segments.extend(part.segments if isinstance(part, ModelGraph) else [part])
    return ModelGraph([Segment(s.name, s.spec, s.params, False) for s in segments])


def build_supervised(seed: int, dtype: Any = np.float64) -> ModelGraph:
    """Fully trainable h∘f for the supervised baseline."""
    return compose(build_f(seed, dtype), build_h(seed + 1, dtype=dtype), trainable_names={"f", "h"})


def as_model_input(windows: np.ndarray) -> np.ndarray:
    """Add the channel axis f expects: [N, L] → [N, 1, L]."""
    windows = np.asarray(windows)
    return windows[..., None, :]


# ---------------------------------------------------------------------------
# Weight files
# ---------------------------------------------------------------------------


def save_weights(model: ModelGraph, path: str) -> None:
    """Write a self-describing little-endian weight file.

    Layout: magic, uint16 version, uint32 header length, JSON header with the
    segment architectures, uint32 tensor count, then per tensor: uint16 name
    length, name, uint8 dtype tag, uint8 rank, uint32 dims, raw data.
    """
    header = json.dumps(
        {"segments": [{"name": s.name, "trainable": s.trainable, "spec": s.spec.to_dict()} for s in model.segments]},
        sort_keys=True,
    ).encode("utf-8")
    params = model.parameters()

    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "wb") as f:
        f.write(WEIGHT_MAGIC)
        f.write(struct.pack("<HI", WEIGHT_VERSION, len(header)))
        f.write(header)
        f.write(struct.pack("<I", len(params)))
        for name, value in params.items():
            if value.dtype not in DTYPE_TAGS:
                raise WeightFileError(f"cannot store {name} with dtype {value.dtype}")
            encoded = name.encode("utf-8")
            f.write(struct.pack("<H", len(encoded)))
            f.write(encoded)
            f.write(struct.pack("<BB", DTYPE_TAGS[value.dtype], value.ndim))
            f.write(struct.pack(f"<{value.ndim}I", *value.shape))
            f.write(np.ascontiguousarray(value, dtype=value.dtype.newbyteorder("<")).tobytes())
    logger.debug(f"Saved {len(params)} tensors to {path}")


class _Reader:
    def __init__(self, data: bytes, path: str) -> None:
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise WeightFileError(f"weight file {self.path} is truncated")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str) -> Tuple[Any, ...]:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_weights(path: str) -> ModelGraph:
    """Read a weight file written by `save_weights`.

    Raises:
        WeightFileError: On bad magic, unsupported version or truncated data
    """
    with open(path, "rb") as f:
        reader = _Reader(f.read(), path)

    if reader.take(len(WEIGHT_MAGIC)) != WEIGHT_MAGIC:
        raise WeightFileError(f"{path} is not a weight file (bad magic)")
    version, header_len = reader.unpack("<HI")
    if version != WEIGHT_VERSION:
        raise WeightFileError(
            f"{path} has weight format version {version}, expected {WEIGHT_VERSION}",
            {"version": version, "supported": WEIGHT_VERSION},
        )
    try:
        header = json.loads(reader.take(header_len).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise WeightFileError(f"{path} has a corrupted header: {e}") from e

    (count,) = reader.unpack("<I")
    tensors: Dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = reader.unpack("<H")
        name = reader.take(name_len).decode("utf-8")
        tag, rank = reader.unpack("<BB")
        if tag not in TAG_DTYPES:
            raise WeightFileError(f"{path}: unknown dtype tag {tag} for {name}")
        shape = reader.unpack(f"<{rank}I") if rank else ()
        dtype = TAG_DTYPES[tag].newbyteorder("<")
        raw = reader.take(int(np.prod(shape)) * dtype.itemsize)
        tensors[name] = np.frombuffer(raw, dtype=dtype).reshape(shape).astype(TAG_DTYPES[tag])

    segments = []
    for entry in header["segments"]:
        spec = ArchitectureSpec.from_dict(entry["spec"])
        prefix = f"{entry['name']}."
        params = {k[len(prefix) :]: v for k, v in tensors.items() if k.startswith(prefix)}
        try:
            segments.append(Segment(entry["name"], spec, params, entry["trainable"]))
        except ArchitectureError as e:
            raise WeightFileError(f"{path}: {e.message}") from e
    return ModelGraph(segments)
