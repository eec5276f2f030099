"""SGD with momentum and coupled L2 weight decay."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class OptimizerState:
    params: dict
    weight_decay: float = 0.0
    buffers: dict = field(default=None)

    def __post_init__(self):
        if self.buffers is None:
            self.buffers = {k: np.zeros_like(v) for k, v in self.params.items()}


def sgd_momentum_step(state: OptimizerState, grads, lr, momentum) -> OptimizerState:
    """``mu <- momentum*mu - lr*(grad + wd*theta)``; ``theta <- theta + mu``. In place."""
    for name, theta in state.params.items():
        g = grads[name]
        if g.shape != theta.shape:
            raise ValueError(f"gradient for {name} has shape {g.shape}, expected {theta.shape}")
        mu = state.buffers[name]
        if state.weight_decay:
            g = g + state.weight_decay * theta
        mu *= momentum
        mu -= lr * g
        theta += mu
    return state
