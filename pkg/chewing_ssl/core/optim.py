"""LARS, Adam and the warmup-then-cosine learning-rate schedule.

The step functions are pure: they return new parameter and state dicts and
leave their inputs untouched. `Lars` and `Adam` wrap them with owned state.
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, Tuple

import numpy as np

from chewing_ssl.core.errors import OptimizerError
from chewing_ssl.core.nn import GradSet, ParamSet

OptState = Dict[str, np.ndarray]


def is_bias(name: str) -> bool:
    return name.endswith(".bias")


@dataclass(frozen=True)
class LarsConfig:
    base_lr: float = 0.3
    momentum: float = 0.9
    weight_decay: float = 1e-6
    eta: float = 1e-3
    exempt: Callable[[str], bool] = is_bias

    def __post_init__(self) -> None:
        if not self.base_lr > 0:
            raise OptimizerError(f"base_lr must be positive, got {self.base_lr}")
        for name in ("momentum", "weight_decay", "eta"):
            if getattr(self, name) < 0:
                raise OptimizerError(f"{name} must be non-negative, got {getattr(self, name)}")


@dataclass(frozen=True)
class AdamConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self) -> None:
        if not self.lr > 0:
            raise OptimizerError(f"lr must be positive, got {self.lr}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise OptimizerError(f"betas must lie in [0, 1), got ({self.beta1}, {self.beta2})")
        if self.epsilon < 0:
            raise OptimizerError(f"epsilon must be non-negative, got {self.epsilon}")


@dataclass(frozen=True)
class ScheduleConfig:
    total_epochs: int = 100
    warmup_fraction: float = 0.1
    max_lr: float = 0.3

    def __post_init__(self) -> None:
        if self.total_epochs < 1:
            raise OptimizerError(f"total_epochs must be positive, got {self.total_epochs}")
        if not 0 <= self.warmup_fraction < 1:
            raise OptimizerError(f"warmup_fraction must lie in [0, 1), got {self.warmup_fraction}")

    @property
    def warmup_epochs(self) -> float:
        return self.warmup_fraction * self.total_epochs


def lr_at_epoch(epoch: int, cfg: ScheduleConfig) -> float:
    """Linear warmup to max_lr over W epochs, then cosine decay to 0 at the last epoch.

    Epochs are numbered from 1.
    """
    total = cfg.total_epochs
    if not 1 <= epoch <= total:
        raise OptimizerError(f"epoch {epoch} outside 1..{total}")
    warmup = cfg.warmup_epochs
    if epoch <= warmup:
        return cfg.max_lr * epoch / warmup
    return cfg.max_lr * 0.5 * (1 + math.cos(math.pi * (epoch - warmup) / (total - warmup)))


def _check_parallel(params: ParamSet, grads: GradSet) -> None:
    if set(params) != set(grads):
        raise OptimizerError(f"gradients for {sorted(set(grads) ^ set(params))} do not match parameters")
    for name, value in params.items():
        if grads[name].shape != value.shape:
            raise OptimizerError(f"gradient of {name} has shape {grads[name].shape}, expected {value.shape}")


def lars_step(
    params: ParamSet, grads: GradSet, state: OptState, lr: float, cfg: LarsConfig
) -> Tuple[ParamSet, OptState]:
    """One LARS update with momentum.

    Per tensor: g' = g + wd * w, r = eta * |w| / |g'| (1 if either norm is 0),
    m = momentum * m + r * lr * g', w = w - m. Exempt tensors use r = 1 and
    no weight decay.
    """
    _check_parallel(params, grads)
    new_params: ParamSet = {}
    new_state: OptState = {}
    for name, w in params.items():
        g = grads[name]
        if cfg.exempt(name):
            update = g
            ratio = 1.0
        else:
            update = g + cfg.weight_decay * w
            w_norm = float(np.linalg.norm(w))
            g_norm = float(np.linalg.norm(update))
            ratio = cfg.eta * w_norm / g_norm if w_norm > 0 and g_norm > 0 else 1.0
        m = state.get(name)
        m = (ratio * lr) * update if m is None else cfg.momentum * m + (ratio * lr) * update
        new_state[name] = m.astype(w.dtype, copy=False)
        new_params[name] = (w - m).astype(w.dtype, copy=False)
    return new_params, new_state


def adam_step(
    params: ParamSet, grads: GradSet, state: OptState, cfg: AdamConfig, t: int
) -> Tuple[ParamSet, OptState]:
    """One bias-corrected Adam update; `t` counts steps from 1.

    State keys are `<name>.m` and `<name>.v`.
    """
    _check_parallel(params, grads)
    if t < 1:
        raise OptimizerError(f"Adam step count starts at 1, got {t}")
    new_params: ParamSet = {}
    new_state: OptState = {}
    c1 = 1 - cfg.beta1**t
    c2 = 1 - cfg.beta2**t
    for name, w in params.items():
        g = grads[name]
        m = cfg.beta1 * state.get(f"{name}.m", 0.0) + (1 - cfg.beta1) * g
        v = cfg.beta2 * state.get(f"{name}.v", 0.0) + (1 - cfg.beta2) * g * g
        new_state[f"{name}.m"] = np.asarray(m, dtype=w.dtype)
        new_state[f"{name}.v"] = np.asarray(v, dtype=w.dtype)
        new_params[name] = (w - cfg.lr * (m / c1) / (np.sqrt(v / c2) + cfg.epsilon)).astype(w.dtype, copy=False)
    return new_params, new_state


class Lars:
    """LARS optimizer owning its momentum buffers."""

    def __init__(self, cfg: LarsConfig) -> None:
        self.cfg = cfg
        self.state: OptState = {}

    def step(self, params: ParamSet, grads: GradSet, lr: float) -> ParamSet:
        new_params, self.state = lars_step(params, grads, self.state, lr, self.cfg)
        return new_params


class Adam:
    """Adam optimizer owning its moment estimates and step count."""

    def __init__(self, cfg: AdamConfig) -> None:
        self.cfg = cfg
        self.state: OptState = {}
        self.t = 0

    def step(self, params: ParamSet, grads: GradSet) -> ParamSet:
        self.t += 1
        new_params, self.state = adam_step(params, grads, self.state, self.cfg, self.t)
        return new_params
