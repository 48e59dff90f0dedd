"""Deterministic parameter initialization."""

from __future__ import annotations

import numpy as np


def uniform_init(shape, fan_in: int, rng: np.random.Generator) -> np.ndarray:
    """Symmetric uniform U(-1/sqrt(fan_in), 1/sqrt(fan_in))."""
    bound = 1.0 / np.sqrt(max(fan_in, 1))
    return rng.uniform(-bound, bound, size=shape)
