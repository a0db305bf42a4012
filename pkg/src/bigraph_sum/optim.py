"""Adam with linear learning-rate warmup, over a dict of numpy parameters."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def warmup_lr(base_lr: float, step: int, warmup_steps: int) -> float:
    """``base_lr * min(1, step / warmup_steps)``; no warmup when ``warmup_steps <= 0``."""
    if warmup_steps <= 0:
        return base_lr
    return base_lr * min(1.0, step / warmup_steps)


@dataclass
class Adam:
    lr: float = 5e-5
    warmup_steps: int = 8000
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def current_lr(self, step=None) -> float:
        return warmup_lr(self.lr, self.step + 1 if step is None else step, self.warmup_steps)

    def update(self, params: dict, grads: dict) -> float:
        """Apply one update in place to every parameter that has a gradient."""
        self.step += 1
        lr = warmup_lr(self.lr, self.step, self.warmup_steps)
        bc1 = 1.0 - self.beta1**self.step
        bc2 = 1.0 - self.beta2**self.step
        for name in sorted(grads):
            g = grads[name]
            m = self.m.get(name)
            if m is None:
                m = self.m[name] = np.zeros_like(g)
                self.v[name] = np.zeros_like(g)
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            if lr:
                params[name] -= lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
        return lr
