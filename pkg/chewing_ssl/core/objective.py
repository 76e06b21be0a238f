"""Contrastive and classification objectives.

Embedding batches hold 2n rows: views 1 of the n source windows followed by
their views 2, so row i and row i + n form a positive pair.
"""

from typing import Tuple, Union

import numpy as np
from scipy.special import logsumexp

from chewing_ssl.core.errors import ObjectiveError

BCE_EPS = 1e-7


def _check_tau(tau: float) -> None:
    if not tau > 0:
        raise ObjectiveError(f"temperature must be positive, got {tau}")


def _check_batch(batch: np.ndarray) -> int:
    if batch.ndim != 2 or batch.shape[0] < 2 or batch.shape[0] % 2:
        raise ObjectiveError(f"embedding batch must have shape [2n, d] with n >= 1, got {batch.shape}")
    return batch.shape[0] // 2


def cosine_sim_temp(u: np.ndarray, v: np.ndarray, tau: float) -> float:
    """<u, v> / (|u| |v|) / tau.

    Raises:
        ObjectiveError: If either vector has zero norm or tau <= 0
    """
    _check_tau(tau)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ObjectiveError(f"cosine similarity of a zero-norm vector (|u|={nu}, |v|={nv})")
    return float(np.dot(u, v) / (nu * nv) / tau)


def ntxent_asym(i: int, batch: np.ndarray, tau: float, anchor_view: int = 1) -> float:
    """Loss of one positive pair seen from one anchor.

    For anchor x_i^1 the denominator sums exp(cs) over every other view-1
    sample and over all view-2 samples, the positive one included.
    """
    batch = np.asarray(batch, dtype=np.float64)
    n = _check_batch(batch)
    if not 0 <= i < n:
        raise ObjectiveError(f"pair index {i} out of range for n={n}")
    if anchor_view not in (1, 2):
        raise ObjectiveError(f"anchor_view must be 1 or 2, got {anchor_view}")

    anchor = i if anchor_view == 1 else i + n
    positive = i + n if anchor_view == 1 else i
    same = range(0, n) if anchor_view == 1 else range(n, 2 * n)
    other = range(n, 2 * n) if anchor_view == 1 else range(0, n)

    terms = [cosine_sim_temp(batch[anchor], batch[k], tau) for k in same if k != anchor]
    terms += [cosine_sim_temp(batch[anchor], batch[k], tau) for k in other]
    return float(logsumexp(terms) - cosine_sim_temp(batch[anchor], batch[positive], tau))


def ntxent_pair(i: int, batch: np.ndarray, tau: float) -> float:
    """Average of the two anchor directions of pair i."""
    return 0.5 * (ntxent_asym(i, batch, tau, 1) + ntxent_asym(i, batch, tau, 2))


def ntxent_batch(
    batch: np.ndarray, tau: float, with_grad: bool = True
) -> Union[float, Tuple[float, np.ndarray]]:
    """Mean pair loss over the batch, optionally with its gradient.

    Args:
        batch: Embeddings of shape [2n, d]
        tau: Temperature
        with_grad: Also return dL/dbatch

    Returns:
        The loss, or (loss, gradient) when `with_grad`
    """
    _check_tau(tau)
    batch = np.asarray(batch)
    n = _check_batch(batch)
    m = 2 * n

    norms = np.linalg.norm(batch, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise ObjectiveError(f"zero-norm embeddings at rows {np.flatnonzero(norms[:, 0] == 0).tolist()}")
    unit = batch / norms
    sim = unit @ unit.T / tau
    np.fill_diagonal(sim, -np.inf)

    positive = (np.arange(m) + n) % m
    lse = logsumexp(sim, axis=1)
    loss = float(np.mean(lse - sim[np.arange(m), positive]))
    if not with_grad:
        return loss

    prob = np.exp(sim - lse[:, None])
    prob[np.arange(m), positive] -= 1.0
    g_sim = prob / m
    g_unit = (g_sim + g_sim.T) @ unit / tau
    radial = np.sum(unit * g_unit, axis=1, keepdims=True)
    grad = (g_unit - unit * radial) / norms
    return loss, grad


def _check_labels(y: np.ndarray) -> None:
    if not np.all((y == 0) | (y == 1)):
        raise ObjectiveError(f"labels must be 0 or 1, got {np.unique(y).tolist()}")


def bce(y_hat: float, y: int, eps: float = BCE_EPS) -> Tuple[float, float]:
    """Binary cross-entropy and dH/dy_hat, with y_hat clipped to [eps, 1 - eps]."""
    _check_labels(np.asarray(y))
    p = float(np.clip(y_hat, eps, 1 - eps))
    loss = -y * np.log(p) - (1 - y) * np.log(1 - p)
    grad = -y / p + (1 - y) / (1 - p)
    return float(loss), float(grad)


def bce_batch(y_hat: np.ndarray, y: np.ndarray, eps: float = BCE_EPS) -> Tuple[float, np.ndarray]:
    """Mean binary cross-entropy and its gradient with respect to every y_hat.

    `y_hat` may be [N] or [N, 1]; the gradient has the same shape.
    """
    y_hat = np.asarray(y_hat)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    flat = y_hat.reshape(-1)
    if flat.shape != y.shape:
        raise ObjectiveError(f"{flat.size} predictions for {y.size} labels")
    if y.size == 0:
        raise ObjectiveError("binary cross-entropy of an empty batch")
    _check_labels(y)
    p = np.clip(flat, eps, 1 - eps)
    loss = float(np.mean(-y * np.log(p) - (1 - y) * np.log(1 - p)))
    grad = (-y / p + (1 - y) / (1 - p)) / y.size
    return loss, grad.reshape(y_hat.shape).astype(y_hat.dtype, copy=False)
