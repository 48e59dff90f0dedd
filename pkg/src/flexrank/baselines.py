"""Non-learning references: random placement, greedy placement, exhaustive search.

All three operate on a fixed slot instance (frozen user/channel draws) so
that values are directly comparable: oracle >= greedy >= mean(random).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from flexrank.erank import effective_rank
from flexrank.ma_channel import FadingConfig, MaGrid, MaSlotDraws, assemble_ma_channel, sample_ma_slot
from flexrank.pa_channel import PaLayout, assemble_pa_channel, candidate_positions
from flexrank.scenario import AreaConfig, SeedStream, sample_user_positions


@dataclass(frozen=True)
class OracleResult:
    best_selection: np.ndarray
    best_value: float
    n_evaluated: int


@dataclass
class MaInstance:
    """One frozen MA slot: evaluate any placement's effective rank."""

    draws: MaSlotDraws
    grid: MaGrid
    m_ma: int

    def erank(self, selection, validate: bool = True) -> float:
        H = assemble_ma_channel(np.asarray(selection, dtype=int), self.draws.users,
                                self.draws.angles, self.draws.responses, self.grid,
                                validate=validate)
        return effective_rank(H)


@dataclass
class PaInstance:
    """One frozen PA slot: evaluate any per-waveguide placement."""

    users: np.ndarray
    layout: PaLayout

    def erank(self, selections, validate: bool = True) -> float:
        H = assemble_pa_channel(np.asarray(selections, dtype=int), self.users,
                                self.layout, validate=validate)
        return effective_rank(H)

    def erank_partial(self, partial: list[list[int]]) -> float:
        """Effective rank with some waveguides only partially populated.

        Empty waveguides contribute zero rows; used by the greedy builder.
        """
        lay = self.layout
        H = np.zeros((lay.k_wav, self.users.shape[0]), dtype=np.complex128)
        for k, sel in enumerate(partial):
            if not sel:
                continue
            pos = candidate_positions(lay, k)[np.asarray(sel, dtype=int)]
            d_guide = np.linalg.norm(pos - lay.feed_point(k)[None, :], axis=1)
            guide = np.exp(-2j * np.pi * d_guide / lay.guide_wavelength) / np.sqrt(lay.m_pa)
            d_free = np.linalg.norm(self.users[None, :, :] - pos[:, None, :], axis=2)
            free = lay.amp_factor * np.exp(-2j * np.pi * d_free / lay.wavelength) / d_free
            H[k] = (guide[:, None] * free).sum(axis=0)
        if not np.any(H):
            raise ValueError("at least one antenna must be placed")
        return effective_rank(H)


def make_ma_instance(area: AreaConfig, grid: MaGrid, fading: FadingConfig,
                     seeds: SeedStream, m_ma: int, episode: int = 0,
                     slot: int = 1) -> MaInstance:
    draws = sample_ma_slot(area, fading, seeds, slot, episode=episode)
    return MaInstance(draws=draws, grid=grid, m_ma=m_ma)


def make_pa_instance(area: AreaConfig, layout: PaLayout, seeds: SeedStream,
                     episode: int = 0, slot: int = 1) -> PaInstance:
    users = sample_user_positions(area, seeds, slot, episode=episode)
    return PaInstance(users=users, layout=layout)


# ------------------------------------------------------------------ random

def random_ma_selection(n_positions: int, m_ma: int, rng: np.random.Generator,
                        distinct: bool = True) -> np.ndarray:
    """Uniform placement; ``distinct=False`` draws i.i.d. (collisions allowed)."""
    if distinct:
        return rng.choice(n_positions, size=m_ma, replace=False)
    return rng.integers(0, n_positions, size=m_ma)


def random_pa_selections(layout: PaLayout, rng: np.random.Generator,
                         distinct: bool = True) -> np.ndarray:
    """Per-waveguide uniform placements, (k_wav, m_pa)."""
    if distinct:
        return np.stack([
            rng.choice(layout.i_pos, size=layout.m_pa, replace=False)
            for _ in range(layout.k_wav)
        ])
    return rng.integers(0, layout.i_pos, size=(layout.k_wav, layout.m_pa))


# ------------------------------------------------------------------ greedy

def greedy_ma_placement(instance: MaInstance) -> np.ndarray:
    """Add one antenna at a time, maximizing the incremental effective rank.

    Ties resolve to the lowest candidate index.
    """
    chosen: list[int] = []
    for _ in range(instance.m_ma):
        best_idx, best_val = -1, -np.inf
        for cand in range(instance.grid.n_positions):
            if cand in chosen:
                continue
            val = instance.erank(chosen + [cand])
            if val > best_val:
                best_idx, best_val = cand, val
        chosen.append(best_idx)
    return np.array(chosen, dtype=int)


def greedy_pa_placement(instance: PaInstance) -> np.ndarray:
    """Waveguide by waveguide, antenna by antenna incremental-erank greedy."""
    lay = instance.layout
    partial: list[list[int]] = [[] for _ in range(lay.k_wav)]
    for k in range(lay.k_wav):
        for _ in range(lay.m_pa):
            best_idx, best_val = -1, -np.inf
            for cand in range(lay.i_pos):
                if cand in partial[k]:
                    continue
                partial[k].append(cand)
                val = instance.erank_partial(partial)
                partial[k].pop()
                if val > best_val:
                    best_idx, best_val = cand, val
            partial[k].append(best_idx)
    return np.array(partial, dtype=int)


# ------------------------------------------------------------------ oracle

DEFAULT_BUDGET = 10 ** 6


def exhaustive_oracle_ma(instance: MaInstance,
                         budget: int = DEFAULT_BUDGET) -> OracleResult:
    """Enumerate every unordered distinct placement and return the maximum.

    Effective rank is invariant to the antenna listing order, so unordered
    combinations suffice. Raises if the candidate count exceeds the budget,
    reporting the count.
    """
    count = math.comb(instance.grid.n_positions, instance.m_ma)
    if count > budget:
        raise ValueError(f"{count} candidate placements exceed the budget cap {budget}")
    best_sel, best_val, n_eval = None, -np.inf, 0
    for combo in itertools.combinations(range(instance.grid.n_positions), instance.m_ma):
        val = instance.erank(list(combo))
        n_eval += 1
        if val > best_val:
            best_sel, best_val = combo, val
    return OracleResult(best_selection=np.array(best_sel, dtype=int),
                        best_value=float(best_val), n_evaluated=n_eval)


def exhaustive_oracle_pa(instance: PaInstance,
                         budget: int = DEFAULT_BUDGET) -> OracleResult:
    """Product of per-waveguide unordered combinations, exhaustively scored."""
    lay = instance.layout
    per_wg = math.comb(lay.i_pos, lay.m_pa)
    count = per_wg ** lay.k_wav
    if count > budget:
        raise ValueError(f"{count} candidate placements exceed the budget cap {budget}")
    combos = list(itertools.combinations(range(lay.i_pos), lay.m_pa))
    best_sel, best_val, n_eval = None, -np.inf, 0
    for choice in itertools.product(combos, repeat=lay.k_wav):
        sel = np.array(choice, dtype=int)
        val = instance.erank(sel)
        n_eval += 1
        if val > best_val:
            best_sel, best_val = sel, val
    return OracleResult(best_selection=best_sel, best_value=float(best_val),
                        n_evaluated=n_eval)


def mean_random_ma(instance: MaInstance, n_draws: int, rng: np.random.Generator,
                   distinct: bool = True) -> float:
    vals = [
        instance.erank(
            random_ma_selection(instance.grid.n_positions, instance.m_ma, rng, distinct),
            validate=distinct)
        for _ in range(n_draws)
    ]
    return float(np.mean(vals))


def mean_random_pa(instance: PaInstance, n_draws: int, rng: np.random.Generator,
                   distinct: bool = True) -> float:
    vals = [
        instance.erank(random_pa_selections(instance.layout, rng, distinct),
                       validate=distinct)
        for _ in range(n_draws)
    ]
    return float(np.mean(vals))
