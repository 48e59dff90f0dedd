"""Adaptive per-parameter moment estimation (no weight decay)."""

from __future__ import annotations

import numpy as np


class Adam:
    """First/second moment accumulators with bias correction.

    Operates on name->array parameter dicts; ``step`` updates in place.
    """

    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999,
                 eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for name, g in grads.items():
            if name not in self.m:
                self.m[name] = np.zeros_like(params[name])
                self.v[name] = np.zeros_like(params[name])
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            params[name] -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)


def soft_update(online: dict, target: dict, tau_soft: float) -> None:
    """target <- tau_soft * online + (1 - tau_soft) * target, in place."""
    if online.keys() != target.keys():
        raise ValueError("online/target parameter names differ")
    for name, w in online.items():
        t = target[name]
        if t.shape != w.shape:
            raise ValueError(f"shape mismatch for {name}: {t.shape} vs {w.shape}")
        t *= 1.0 - tau_soft
        t += tau_soft * w
