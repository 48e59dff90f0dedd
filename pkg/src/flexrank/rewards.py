"""Rewards: effective rank minus a collision penalty.

Top-k action selection makes the penalty structurally zero; the penalty term
exists so that constraint violations (possible only through test hooks or
i.i.d. baselines) are scored consistently.
"""

from __future__ import annotations

import numpy as np

from flexrank.erank import effective_rank


def collision_pairs(selection: np.ndarray) -> int:
    """Number of index pairs occupying the same candidate position."""
    _, counts = np.unique(np.asarray(selection, dtype=int), return_counts=True)
    return int((counts * (counts - 1) // 2).sum())


def ma_reward(H_ma: np.ndarray, selection: np.ndarray, alpha: float) -> float:
    """effective_rank(H) - alpha * (colliding pairs on the array plane)."""
    return effective_rank(H_ma) - alpha * collision_pairs(selection)


def pa_reward(H_pa: np.ndarray, selections: np.ndarray, alpha: float) -> float:
    """effective_rank(H) - alpha * (same-waveguide colliding pairs, summed).

    The scalar is shared by every waveguide agent.
    """
    selections = np.asarray(selections, dtype=int)
    pairs = sum(collision_pairs(selections[k]) for k in range(selections.shape[0]))
    return effective_rank(H_pa) - alpha * pairs
