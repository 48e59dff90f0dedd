"""Fixed-capacity transition store with proportional prioritized sampling."""

from __future__ import annotations

import numpy as np

PRIORITY_EPS = 1e-6


class PrioritizedBuffer:
    """FIFO ring buffer; transitions are sampled proportionally to priority.

    New transitions enter at the current maximum priority so they are seen at
    least once. Importance weights are (1 / (size * P(i)))**beta, following
    the prioritized-replay correction without max-normalization.
    """

    def __init__(self, capacity: int = 5000):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._items: list = []
        self._priorities = np.zeros(capacity)
        self._next = 0

    def __len__(self) -> int:
        return len(self._items)

    def add(self, transition) -> None:
        priority = self._priorities[: len(self._items)].max() if self._items else 1.0
        if len(self._items) < self.capacity:
            self._items.append(transition)
        else:
            self._items[self._next] = transition
        self._priorities[self._next] = priority
        self._next = (self._next + 1) % self.capacity

    def probabilities(self) -> np.ndarray:
        pri = self._priorities[: len(self._items)]
        return pri / pri.sum()

    def sample(self, batch_size: int, rng: np.random.Generator, beta: float):
        """(indices, transitions, weights) or None when underfilled."""
        n = len(self._items)
        if n < batch_size:
            return None
        p = self.probabilities()
        idx = rng.choice(n, size=batch_size, replace=True, p=p)
        weights = (1.0 / (n * p[idx])) ** beta
        return idx, [self._items[i] for i in idx], weights

    def update_priorities(self, indices: np.ndarray, abs_errors: np.ndarray) -> None:
        self._priorities[indices] = np.abs(abs_errors) + PRIORITY_EPS

    def priorities(self) -> np.ndarray:
        return self._priorities[: len(self._items)].copy()

    def items(self) -> list:
        return list(self._items)
