"""Square-area world generation: BS placement, per-slot user positions, geometry.

All randomness flows through :class:`SeedStream`, which derives independent
substreams keyed by (purpose, episode, slot) so user draws, channel draws and
agent decisions are separately reproducible.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AreaConfig:
    """Geometry of the square service area and the per-episode slot count."""

    d_area: float = 200.0   # side length of the square area (m)
    n_slots: int = 10       # time slots per episode
    n_users: int = 80
    z_bs: float = 25.0      # BS antenna height (m)
    z_user: float = 1.5     # user antenna height (m)
    z_wav: float = 3.0      # waveguide height (m)

    def __post_init__(self):
        if not self.d_area > 0:
            raise ValueError(f"d_area must be positive, got {self.d_area}")
        if self.n_slots < 1:
            raise ValueError(f"n_slots must be >= 1, got {self.n_slots}")
        if self.n_users < 1:
            raise ValueError(f"n_users must be >= 1, got {self.n_users}")
        for name in ("z_bs", "z_user", "z_wav"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class SeedStream:
    """Deterministic family of RNG substreams under one master seed.

    Substreams are labeled (purpose, episode, slot); identical labels always
    yield identical draws. The purpose string is hashed with crc32, which is
    stable across platforms and sessions.
    """

    master_seed: int

    def rng(self, purpose: str, episode: int = 0, slot: int = 0) -> np.random.Generator:
        key = (zlib.crc32(purpose.encode("utf-8")), episode, slot)
        return np.random.default_rng(np.random.SeedSequence(self.master_seed, spawn_key=key))


def bs_position(cfg: AreaConfig) -> np.ndarray:
    """BS sits at the center of the left side of the area: [0, d_area/2, z_bs]."""
    return np.array([0.0, cfg.d_area / 2.0, cfg.z_bs])


def sample_user_positions(cfg: AreaConfig, seeds: SeedStream, slot: int,
                          episode: int = 0) -> np.ndarray:
    """Draw the (n_users, 3) user positions for one slot.

    x and y are i.i.d. Uniform[0, d_area], redrawn independently every slot;
    z is the fixed user antenna height.
    """
    rng = seeds.rng("users", episode=episode, slot=slot)
    xy = rng.uniform(0.0, cfg.d_area, size=(cfg.n_users, 2))
    z = np.full((cfg.n_users, 1), cfg.z_user)
    return np.hstack([xy, z])


def angular_direction(user_xy: np.ndarray, reference_xy: np.ndarray) -> float:
    """Direction angle of a user relative to a 2D reference point, in (-pi, pi].

    Quadrant-aware form atan2(x - x_ref, y - y_ref); the coincident case
    returns 0 by convention.
    """
    dx = float(user_xy[0] - reference_xy[0])
    dy = float(user_xy[1] - reference_xy[1])
    return float(np.arctan2(dx, dy))


def user_bs_distances(users: np.ndarray, cfg: AreaConfig) -> np.ndarray:
    """3D Euclidean distances from each user to the BS antenna."""
    return np.linalg.norm(users - bs_position(cfg)[None, :], axis=1)
