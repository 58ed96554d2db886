"""Adam with bias correction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, DivergedTrainingError, ShapeError
from .tensor import Parameter


@dataclass
class OptimState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.lr > 0:
            raise ConfigurationError("learning rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigurationError("betas must lie in [0, 1)")


def adam_step(params: list[np.ndarray], grads: list[np.ndarray], state: OptimState) -> list[np.ndarray]:
    """Return updated copies of ``params``; ``state`` is advanced in place.

    Moment buffers are keyed by position in ``params``. A non-finite gradient
    aborts the step before anything is modified.
    """
    if len(params) != len(grads):
        raise ShapeError("params and grads differ in length")
    for i, (p, g) in enumerate(zip(params, grads)):
        if p.shape != g.shape:
            raise ShapeError(f"parameter {i}: shape {p.shape} vs grad {g.shape}")
        if not np.all(np.isfinite(g)):
            raise DivergedTrainingError(f"non-finite gradient for parameter {i}")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1**state.t
    c2 = 1.0 - b2**state.t
    out = []
    for i, (p, g) in enumerate(zip(params, grads)):
        m = state.m.get(i)
        v = state.v.get(i)
        if m is None:
            m = np.zeros_like(p)
            v = np.zeros_like(p)
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        state.m[i], state.v[i] = m, v
        out.append(p - state.lr * (m / c1) / (np.sqrt(v / c2) + state.epsilon))
    return out


class Adam:
    """Optimizer over a fixed list of :class:`Parameter` objects."""

    def __init__(self, params: list[Parameter], lr=1e-3, beta1=0.9, beta2=0.999, epsilon=1e-8):
        self.params = list(params)
        self.state = OptimState(lr=lr, beta1=beta1, beta2=beta2, epsilon=epsilon)

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def step(self):
        grads = [p.grad if p.grad is not None else np.zeros_like(p.data) for p in self.params]
        new = adam_step([p.data for p in self.params], grads, self.state)
        for p, value in zip(self.params, new):
            p.data = value
