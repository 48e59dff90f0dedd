"""Episode environments tying scenario draws, channels, graphs and rewards.

An episode spans T slots. The graph state offered at slot t uses the channel
realized at slot t-1 (zeros at t=1), since the slot-t channel only exists
after the placement action. ``stationary=True`` freezes every draw to the
(episode 0, slot 1) substream, turning the episode into a repeated fixed
instance; used for desk-scale learning studies against the exhaustive
reference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from flexrank.graphs import (
    GraphObservation,
    GraphThresholds,
    build_ma_graph,
    build_pa_observations,
)
from flexrank.ma_channel import FadingConfig, MaGrid, MaSlotDraws, assemble_ma_channel, sample_ma_slot
from flexrank.pa_channel import PaLayout, assemble_pa_channel
from flexrank.rewards import collision_pairs, ma_reward, pa_reward
from flexrank.scenario import AreaConfig, SeedStream, sample_user_positions


@dataclass
class StepResult:
    reward: float
    erank: float
    penalty: float            # alpha-weighted collision pairs (>= 0)
    next_obs: object          # GraphObservation or list of them
    terminal: bool
    H: np.ndarray


class MaEnvironment:
    """Movable-antenna episode environment for one seed stream."""

    def __init__(self, area: AreaConfig, grid: MaGrid, fading: FadingConfig,
                 thresholds: GraphThresholds, seeds: SeedStream, m_ma: int = 16,
                 alpha: float = 0.5, stationary: bool = False):
        self.area = area
        self.grid = grid
        self.fading = fading
        self.thresholds = thresholds
        self.seeds = seeds
        self.m_ma = m_ma
        self.alpha = alpha
        self.stationary = stationary
        self._draws: MaSlotDraws | None = None

    def _labels(self, episode: int, slot: int) -> tuple[int, int]:
        return (0, 1) if self.stationary else (episode, slot)

    def _load_slot(self, episode: int, slot: int) -> None:
        ep, sl = self._labels(episode, slot)
        self._draws = sample_ma_slot(self.area, self.fading, self.seeds, sl, episode=ep)

    def begin_episode(self, episode: int) -> GraphObservation:
        self._episode = episode
        self._slot = 1
        self._load_slot(episode, 1)
        H0 = np.zeros((self.m_ma, self.area.n_users))
        self._obs = build_ma_graph(self._draws.users, H0, self.area, self.thresholds)
        return self._obs

    def step(self, selection: np.ndarray, validate: bool = True) -> StepResult:
        d = self._draws
        H = assemble_ma_channel(selection, d.users, d.angles, d.responses, self.grid,
                                validate=validate)
        reward = ma_reward(H, selection, self.alpha)
        penalty = self.alpha * collision_pairs(selection)
        erank = reward + penalty
        terminal = self._slot == self.area.n_slots
        if not terminal:
            self._slot += 1
            self._load_slot(self._episode, self._slot)
            self._obs = build_ma_graph(self._draws.users, H, self.area, self.thresholds)
        return StepResult(reward=reward, erank=erank, penalty=penalty,
                          next_obs=self._obs, terminal=terminal, H=H)


class PaEnvironment:
    """Pinching-antenna episode environment; observations are per waveguide."""

    def __init__(self, area: AreaConfig, layout: PaLayout,
                 thresholds: GraphThresholds, seeds: SeedStream,
                 alpha: float = 0.5, stationary: bool = False):
        self.area = area
        self.layout = layout
        self.thresholds = thresholds
        self.seeds = seeds
        self.alpha = alpha
        self.stationary = stationary

    def _labels(self, episode: int, slot: int) -> tuple[int, int]:
        return (0, 1) if self.stationary else (episode, slot)

    def _observe(self, H_prev: np.ndarray) -> list[GraphObservation]:
        ep, sl = self._labels(self._episode, self._slot)
        rng = self.seeds.rng("kmeans", episode=ep, slot=sl)
        return build_pa_observations(self._users, H_prev, self.layout, self.area,
                                     self.thresholds, rng)

    def _load_slot(self, episode: int, slot: int) -> None:
        ep, sl = self._labels(episode, slot)
        self._users = sample_user_positions(self.area, self.seeds, sl, episode=ep)

    def begin_episode(self, episode: int) -> list[GraphObservation]:
        self._episode = episode
        self._slot = 1
        self._load_slot(episode, 1)
        self._obs = self._observe(np.zeros((self.layout.k_wav, self.area.n_users)))
        return self._obs

    def step(self, selections: np.ndarray, validate: bool = True) -> StepResult:
        H = assemble_pa_channel(selections, self._users, self.layout, validate=validate)
        reward = pa_reward(H, selections, self.alpha)
        pairs = sum(collision_pairs(np.asarray(selections)[k])
                    for k in range(self.layout.k_wav))
        penalty = self.alpha * pairs
        erank = reward + penalty
        terminal = self._slot == self.area.n_slots
        if not terminal:
            self._slot += 1
            self._load_slot(self._episode, self._slot)
            self._obs = self._observe(H)
        return StepResult(reward=reward, erank=erank, penalty=penalty,
                          next_obs=self._obs, terminal=terminal, H=H)
