"""Differentiable kernels for the fixed chewing-detection architecture.

Every kernel accepts a single sample (`[ch, L]` or `[d]`) or a batch
(`[N, ch, L]` or `[N, d]`) and returns its result at the rank it was given.
Backward functions return exact analytic gradients of the forward sums.
"""

from typing import Any, Callable, Dict, Optional, Protocol, Tuple

import numpy as np
from scipy.special import expit

from chewing_ssl.core.errors import ShapeError

Tensor = np.ndarray
ParamSet = Dict[str, np.ndarray]
GradSet = Dict[str, np.ndarray]


class Fragment(Protocol):
    """Anything `grad_check` can differentiate: parameters plus forward/backward."""

    @property
    def params(self) -> ParamSet: ...

    def forward(self, x: Tensor) -> Tuple[Tensor, Any]: ...

    def backward(self, cache: Any, upstream: Tensor) -> Tuple[Tensor, GradSet]: ...


def _as_batch(x: Tensor, rank: int, what: str) -> Tuple[Tensor, bool]:
    """Promote a single sample of rank `rank - 1` to a batch of one."""
    x = np.asarray(x)
    if x.ndim == rank - 1:
        return x[None, ...], True
    if x.ndim == rank:
        return x, False
    raise ShapeError(f"{what} expects rank {rank - 1} or {rank}, got shape {x.shape}")


def _unbatch(y: Tensor, single: bool) -> Tensor:
    return y[0] if single else y


# ---------------------------------------------------------------------------
# Convolution
# ---------------------------------------------------------------------------


def conv1d_forward(x: Tensor, kernel: Tensor, bias: Tensor) -> Tensor:
    """Valid cross-correlation: y[c,t] = bias[c] + sum_{i,j} kernel[c,i,j] * x[i,t+j].

    Args:
        x: Input of shape [ch_in, L] or [N, ch_in, L]
        kernel: Weights of shape [ch_out, ch_in, k]
        bias: Biases of shape [ch_out]

    Raises:
        ShapeError: If channels disagree or L < k
    """
    xb, single = _as_batch(x, 3, "conv1d")
    _, ch_in, length = xb.shape
    ch_out, k_in, k = kernel.shape
    if k_in != ch_in:
        raise ShapeError(f"conv1d kernel expects {k_in} input channels, got {ch_in}")
    if bias.shape != (ch_out,):
        raise ShapeError(f"conv1d bias must have shape ({ch_out},), got {bias.shape}")
    if length < k:
        raise ShapeError(f"conv1d input length {length} shorter than kernel {k}")

    out_len = length - k + 1
    y = np.empty((xb.shape[0], ch_out, out_len), dtype=np.result_type(xb, kernel))
    y[...] = bias[None, :, None]
    for j in range(k):
        y += np.matmul(kernel[:, :, j], xb[:, :, j : j + out_len])
    return _unbatch(y, single)


def conv1d_backward(x: Tensor, kernel: Tensor, upstream: Tensor) -> Tuple[Tensor, Tensor, Tensor]:
    """Gradients of `conv1d_forward` with respect to input, kernel and bias."""
    xb, single = _as_batch(x, 3, "conv1d")
    up, _ = _as_batch(upstream, 3, "conv1d upstream")
    ch_out, ch_in, k = kernel.shape
    out_len = xb.shape[2] - k + 1
    if up.shape != (xb.shape[0], ch_out, out_len):
        raise ShapeError(f"conv1d upstream shape {up.shape} does not match output {(xb.shape[0], ch_out, out_len)}")

    grad_x = np.zeros_like(xb, dtype=np.result_type(xb, kernel))
    grad_kernel = np.empty_like(kernel)
    for j in range(k):
        window = xb[:, :, j : j + out_len]
        grad_kernel[:, :, j] = np.tensordot(up, window, axes=([0, 2], [0, 2]))
        grad_x[:, :, j : j + out_len] += np.matmul(kernel[:, :, j].T, up)
    grad_bias = up.sum(axis=(0, 2))
    return _unbatch(grad_x, single), grad_kernel, grad_bias


# ---------------------------------------------------------------------------
# Pooling
# ---------------------------------------------------------------------------


def _route_to_argmax(indices: Tensor, upstream: Tensor, input_len: int) -> Tensor:
    idx, single = _as_batch(indices, 3, "pool indices")
    up, _ = _as_batch(upstream, 3, "pool upstream")
    if up.shape != idx.shape:
        raise ShapeError(f"pool upstream shape {up.shape} does not match indices {idx.shape}")
    grad = np.zeros(idx.shape[:2] + (input_len,), dtype=up.dtype)
    np.put_along_axis(grad, idx, up, axis=-1)
    return _unbatch(grad, single)


def maxpool2_forward(x: Tensor) -> Tuple[Tensor, Tensor]:
    """Non-overlapping max-pool of width 2; an odd trailing element is dropped.

    Returns:
        Pooled tensor and the input position of each maximum (first index on ties)
    """
    xb, single = _as_batch(x, 3, "maxpool2")
    n, ch, length = xb.shape
    if length < 2:
        raise ShapeError(f"maxpool2 needs length >= 2, got {length}")
    half = length // 2
    pairs = xb[:, :, : 2 * half].reshape(n, ch, half, 2)
    choice = pairs.argmax(axis=-1)
    y = np.take_along_axis(pairs, choice[..., None], axis=-1)[..., 0]
    indices = 2 * np.arange(half) + choice
    return _unbatch(y, single), _unbatch(indices, single)


def maxpool2_backward(argmax: Tensor, upstream: Tensor, input_len: Optional[int] = None) -> Tensor:
    """Route each upstream value to the position that won the forward max."""
    if input_len is None:
        input_len = 2 * np.shape(argmax)[-1]
    return _route_to_argmax(argmax, upstream, input_len)


def adaptive_bins(length: int, target_len: int) -> np.ndarray:
    """Bin edges: bin b covers [floor(b*L/T), floor((b+1)*L/T))."""
    return (np.arange(target_len + 1) * length) // target_len


def adaptive_maxpool_forward(x: Tensor, target_len: int) -> Tuple[Tensor, Tensor]:
    """Max over `target_len` contiguous bins that tile the whole input.

    Raises:
        ShapeError: If the input is shorter than `target_len`
    """
    xb, single = _as_batch(x, 3, "adaptive_maxpool")
    n, ch, length = xb.shape
    if target_len < 1 or length < target_len:
        raise ShapeError(f"adaptive_maxpool cannot pool length {length} to {target_len}")
    edges = adaptive_bins(length, target_len)
    y = np.empty((n, ch, target_len), dtype=xb.dtype)
    indices = np.empty((n, ch, target_len), dtype=np.int64)
    for b in range(target_len):
        segment = xb[:, :, edges[b] : edges[b + 1]]
        choice = segment.argmax(axis=-1)
        indices[:, :, b] = edges[b] + choice
        y[:, :, b] = np.take_along_axis(segment, choice[..., None], axis=-1)[..., 0]
    return _unbatch(y, single), _unbatch(indices, single)


def adaptive_maxpool_backward(indices: Tensor, upstream: Tensor, input_len: int) -> Tensor:
    return _route_to_argmax(indices, upstream, input_len)


# ---------------------------------------------------------------------------
# Dense and activations
# ---------------------------------------------------------------------------


def dense_forward(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """Affine map y = W x + b for x of shape [in] or [N, in]."""
    xb, single = _as_batch(x, 2, "dense")
    out_dim, in_dim = weight.shape
    if xb.shape[1] != in_dim:
        raise ShapeError(f"dense expects input dim {in_dim}, got {xb.shape[1]}")
    if bias.shape != (out_dim,):
        raise ShapeError(f"dense bias must have shape ({out_dim},), got {bias.shape}")
    return _unbatch(xb @ weight.T + bias, single)


def dense_backward(x: Tensor, weight: Tensor, upstream: Tensor) -> Tuple[Tensor, Tensor, Tensor]:
    xb, single = _as_batch(x, 2, "dense")
    up, _ = _as_batch(upstream, 2, "dense upstream")
    if up.shape != (xb.shape[0], weight.shape[0]):
        raise ShapeError(f"dense upstream shape {up.shape} does not match output {(xb.shape[0], weight.shape[0])}")
    return _unbatch(up @ weight, single), up.T @ xb, up.sum(axis=0)


def relu_forward(x: Tensor) -> Tensor:
    return np.maximum(x, 0)


def relu_backward(x: Tensor, upstream: Tensor) -> Tensor:
    """Subgradient 0 at x == 0."""
    if np.shape(x) != np.shape(upstream):
        raise ShapeError(f"relu upstream shape {np.shape(upstream)} does not match input {np.shape(x)}")
    return upstream * (x > 0)


def sigmoid_forward(x: Tensor) -> Tensor:
    return expit(x)


def sigmoid_backward(y: Tensor, upstream: Tensor) -> Tensor:
    """Gradient through a sigmoid given its output y."""
    if np.shape(y) != np.shape(upstream):
        raise ShapeError(f"sigmoid upstream shape {np.shape(upstream)} does not match output {np.shape(y)}")
    return upstream * y * (1 - y)


ACTIVATIONS: Dict[str, Tuple[Callable[[Tensor], Tensor], Optional[Callable[[Tensor, Tensor], Tensor]]]] = {
    "relu": (relu_forward, relu_backward),
    "sigmoid": (sigmoid_forward, sigmoid_backward),
    "linear": (lambda x: x, None),
}


# ---------------------------------------------------------------------------
# Gradient checking
# ---------------------------------------------------------------------------


def grad_check(
    fragment: Fragment,
    x: Tensor,
    h: float = 1e-6,
    samples_per_tensor: Optional[int] = None,
    seed: int = 0,
    abs_tol: float = 0.0,
) -> float:
    """Compare analytic gradients with central differences.

    The scalar objective is sum(R * fragment(x)) for a fixed random R, so every
    output coordinate contributes. Each parameter tensor and the input are
    checked, either fully or at `samples_per_tensor` random coordinates.

    Args:
        fragment: Object with `params`, `forward` and `backward`
        x: Input, must be float64
        h: Finite-difference step
        samples_per_tensor: Coordinates checked per tensor, None checks all
        seed: Seed for R and the coordinate sample
        abs_tol: Absolute disagreements at or below this count as exact

    Returns:
        Max relative error, denominator max(|analytic|, |numeric|, 1e-12)
    """
    x = np.array(x, dtype=np.float64, copy=True)
    params = fragment.params
    for name, p in params.items():
        if p.dtype != np.float64:
            raise ShapeError(f"grad_check requires float64 parameters, {name} is {p.dtype}")

    rng = np.random.default_rng(seed)
    y, cache = fragment.forward(x)
    weights = rng.standard_normal(np.shape(y))
    grad_x, grads = fragment.backward(cache, weights)

    def objective() -> float:
        out, _ = fragment.forward(x)
        return float(np.sum(weights * out))

    checks = [("input", x, grad_x)] + [(name, params[name], grads[name]) for name in params]
    worst = 0.0
    for _, tensor, analytic in checks:
        flat = tensor.reshape(-1)
        if samples_per_tensor is None or samples_per_tensor >= flat.size:
            coords = np.arange(flat.size)
        else:
            coords = rng.choice(flat.size, size=samples_per_tensor, replace=False)
        analytic_flat = np.asarray(analytic).reshape(-1)
        for i in coords:
            original = flat[i]
            flat[i] = original + h
            plus = objective()
            flat[i] = original - h
            minus = objective()
            flat[i] = original
            numeric = (plus - minus) / (2 * h)
            a = analytic_flat[i]
            diff = abs(a - numeric)
            if diff <= abs_tol:
                continue
            worst = max(worst, diff / max(abs(a), abs(numeric), 1e-12))
    return worst
