"""Waveguide-fed pinching-antenna (PA) channel model.

Each of K waveguides runs parallel to the x-axis across the full area length
and carries M activated antennas chosen from a uniform candidate grid along
it. A coefficient combines the in-waveguide phase from the feed point with
free-space propagation to the user; antennas on one waveguide sum coherently
into a single row of the channel matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PaLayout:
    """Waveguide geometry and activation grid."""

    k_wav: int = 8            # number of waveguides
    m_pa: int = 2             # activated antennas per waveguide
    i_pos: int = 100          # candidate positions per waveguide
    d_area: float = 200.0     # waveguide length equals the area side (m)
    z_wav: float = 3.0        # waveguide height (m)
    n_eff: float = 1.4        # effective refractive index
    wavelength: float = 0.1   # free-space carrier wavelength (m)

    def __post_init__(self):
        if self.k_wav < 1 or self.m_pa < 1:
            raise ValueError("k_wav and m_pa must be >= 1")
        if self.i_pos < 2:
            raise ValueError("i_pos must be >= 2 for a uniform grid")
        if self.n_eff <= 1.0:
            raise ValueError("n_eff must exceed 1 (guided wavelength < free-space)")

    @property
    def guide_wavelength(self) -> float:
        return self.wavelength / self.n_eff

    @property
    def amp_factor(self) -> float:
        """Free-space amplitude constant c/(4*pi*f_c) = wavelength/(4*pi)."""
        return self.wavelength / (4.0 * np.pi)

    @property
    def spacing(self) -> float:
        return self.d_area / (self.i_pos - 1)

    def waveguide_y(self, k: int) -> float:
        """y-coordinate of waveguide k (0-based): uniform spacing d_area / k_wav.

        Waveguides sit at y = k * d_area / k_wav, the first along the y = 0
        area edge. A single waveguide sits at the center line.
        """
        self._check_waveguide(k)
        if self.k_wav == 1:
            return self.d_area / 2.0
        return k * self.d_area / self.k_wav

    def feed_point(self, k: int) -> np.ndarray:
        """Feed at the BS side (x = 0) of waveguide k."""
        return np.array([0.0, self.waveguide_y(k), self.z_wav])

    def _check_waveguide(self, k: int) -> None:
        if not 0 <= k < self.k_wav:
            raise IndexError(f"waveguide index {k} out of range [0, {self.k_wav})")


def candidate_positions(layout: PaLayout, k: int) -> np.ndarray:
    """(i_pos, 3) activation candidates [x_i, y_k, z_wav], x uniform over [0, d_area]."""
    layout._check_waveguide(k)
    x = np.arange(layout.i_pos) * layout.spacing
    out = np.empty((layout.i_pos, 3))
    out[:, 0] = x
    out[:, 1] = layout.waveguide_y(k)
    out[:, 2] = layout.z_wav
    return out


def pa_coefficient(layout: PaLayout, k: int, position: np.ndarray,
                   user: np.ndarray) -> complex:
    """Channel coefficient of one activated antenna on waveguide k to one user.

    In-waveguide phase accrues over the feed-to-antenna distance at the guided
    wavelength; the free-space part is spherical spreading from the antenna to
    the user. Amplitude splits equally over the waveguide's M antennas.
    """
    position = np.asarray(position, dtype=float)
    user = np.asarray(user, dtype=float)
    d_guide = float(np.linalg.norm(layout.feed_point(k) - position))
    d_free = float(np.linalg.norm(user - position))
    if d_free <= 0.0:
        raise ValueError("user coincides with the antenna position")
    guide_term = np.exp(-2j * np.pi * d_guide / layout.guide_wavelength) / np.sqrt(layout.m_pa)
    free_term = layout.amp_factor * np.exp(-2j * np.pi * d_free / layout.wavelength) / d_free
    return complex(guide_term * free_term)


def assemble_pa_channel(selections: np.ndarray, users: np.ndarray,
                        layout: PaLayout, validate: bool = True) -> np.ndarray:
    """(k_wav, n_users) channel matrix from per-waveguide selections.

    ``selections`` is (k_wav, m_pa) candidate indices; entry (k, n) sums the
    coefficients of waveguide k's activated antennas coherently.
    ``validate=False`` skips the per-waveguide distinctness check (test hook).
    """
    selections = np.asarray(selections, dtype=int)
    if selections.shape != (layout.k_wav, layout.m_pa):
        raise ValueError(
            f"selections must have shape ({layout.k_wav}, {layout.m_pa}), got {selections.shape}"
        )
    if validate:
        check_pa_selections(selections, layout)
    users = np.asarray(users, dtype=float)
    ys = np.array([layout.waveguide_y(k) for k in range(layout.k_wav)])
    x = selections * layout.spacing                                # (K, M)
    # feed sits at x = 0 on each waveguide, so the guide path length is x
    guide = np.exp(-2j * np.pi * x / layout.guide_wavelength) / np.sqrt(layout.m_pa)
    pos = np.empty((layout.k_wav, layout.m_pa, 3))
    pos[:, :, 0] = x
    pos[:, :, 1] = ys[:, None]
    pos[:, :, 2] = layout.z_wav
    diff = users[None, None, :, :] - pos[:, :, None, :]            # (K, M, N, 3)
    d_free = np.sqrt((diff * diff).sum(axis=3))
    if np.any(d_free <= 0.0):
        raise ValueError("a user coincides with an antenna position")
    free = layout.amp_factor * np.exp(-2j * np.pi * d_free / layout.wavelength) / d_free
    return (guide[:, :, None] * free).sum(axis=1)


def check_pa_selections(selections: np.ndarray, layout: PaLayout) -> None:
    """Reject duplicate candidate indices on any single waveguide."""
    selections = np.asarray(selections, dtype=int)
    if selections.min() < 0 or selections.max() >= layout.i_pos:
        raise ValueError("selection index out of candidate range")
    for k in range(selections.shape[0]):
        if len(np.unique(selections[k])) != selections.shape[1]:
            raise ValueError(f"duplicate candidate indices on waveguide {k}")
