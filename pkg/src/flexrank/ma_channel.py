"""Field-response channel model for the movable-antenna (MA) system.

Each transmit element occupies one candidate position on a half-wavelength
grid in a local 2D array plane (origin at the grid center). Per-path phase
terms come from position/wavevector inner products; per-user path gains are
circularly-symmetric complex Gaussians whose total power follows a distance
power law. Receive phases use absolute 3D user coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from flexrank.scenario import AreaConfig, SeedStream, bs_position, sample_user_positions


@dataclass(frozen=True)
class MaGrid:
    """Half-wavelength candidate grid on the array plane, centered at origin."""

    i_rows: int = 10
    i_cols: int = 10
    wavelength: float = 0.1

    def __post_init__(self):
        if self.i_rows < 1 or self.i_cols < 1:
            raise ValueError("grid must have at least one row and one column")
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")

    @property
    def n_positions(self) -> int:
        return self.i_rows * self.i_cols

    @property
    def spacing(self) -> float:
        return self.wavelength / 2.0

    def candidate_positions(self) -> np.ndarray:
        """(n_positions, 2) plane coordinates, row-major, grid centered at 0."""
        r = np.arange(self.i_rows) - (self.i_rows - 1) / 2.0
        c = np.arange(self.i_cols) - (self.i_cols - 1) / 2.0
        yy, xx = np.meshgrid(r * self.spacing, c * self.spacing, indexing="ij")
        return np.stack([xx.ravel(), yy.ravel()], axis=1)


@dataclass(frozen=True)
class FadingConfig:
    """Multipath fading parameters shared by all users."""

    n_paths: int = 10          # transmit paths == receive paths
    rho_db: float = -40.0      # channel gain at 1 m reference distance (dB)
    path_loss_exp: float = 2.8
    wavelength: float = 0.1

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")

    @property
    def rho_lin(self) -> float:
        return 10.0 ** (self.rho_db / 10.0)


@dataclass(frozen=True)
class PathAngles:
    """Elevation/azimuth departure and arrival angles, each (n_users, n_paths)."""

    theta_t: np.ndarray
    phi_t: np.ndarray
    theta_r: np.ndarray
    phi_r: np.ndarray


def transmit_wavevector(theta: float, phi: float, wavelength: float) -> np.ndarray:
    """2D transmit wavevector (2*pi/lambda)*[cos(th)cos(ph), cos(th)sin(ph)]."""
    k = 2.0 * np.pi / wavelength
    ct = np.cos(theta)
    return np.array([k * ct * np.cos(phi), k * ct * np.sin(phi)])


def receive_wavevector(theta: float, phi: float, wavelength: float) -> np.ndarray:
    """3D receive wavevector (2*pi/lambda)*[cos(th)cos(ph), cos(th)sin(ph), sin(th)]."""
    k = 2.0 * np.pi / wavelength
    ct = np.cos(theta)
    return np.array([k * ct * np.cos(phi), k * ct * np.sin(phi), k * np.sin(theta)])


def field_response_vector(position: np.ndarray, wavevectors: np.ndarray) -> np.ndarray:
    """Unit-modulus phase vector exp(j * position . kappa_l), one entry per path.

    ``position`` is a d-vector and ``wavevectors`` an (L, d) array; d is 2 on
    the transmit plane and 3 at the receive side.
    """
    position = np.asarray(position, dtype=float)
    wavevectors = np.asarray(wavevectors, dtype=float)
    if wavevectors.ndim != 2 or wavevectors.shape[1] != position.shape[0]:
        raise ValueError(
            f"dimension mismatch: position {position.shape} vs wavevectors {wavevectors.shape}"
        )
    return np.exp(1j * (wavevectors @ position))


def sample_path_angles(n_users: int, fading: FadingConfig,
                       rng: np.random.Generator) -> PathAngles:
    """All four angle families i.i.d. Uniform[-pi/2, pi/2]."""
    shape = (n_users, fading.n_paths)
    draw = lambda: rng.uniform(-np.pi / 2.0, np.pi / 2.0, size=shape)
    return PathAngles(theta_t=draw(), phi_t=draw(), theta_r=draw(), phi_r=draw())


def sample_path_response(user: np.ndarray, bs: np.ndarray, fading: FadingConfig,
                         rng: np.random.Generator) -> np.ndarray:
    """Per-path complex gains g_l ~ CN(0, rho_lin * d^-exp / L) for one user.

    d is the 3D user-BS distance; a user at the exact BS position is rejected.
    """
    d = float(np.linalg.norm(np.asarray(user, dtype=float) - np.asarray(bs, dtype=float)))
    if d <= 0.0:
        raise ValueError("user coincides with the BS; path gain model undefined")
    var = fading.rho_lin * d ** (-fading.path_loss_exp) / fading.n_paths
    sigma = np.sqrt(var / 2.0)
    re, im = rng.standard_normal((2, fading.n_paths))
    return sigma * (re + 1j * im)


def sample_all_path_responses(users: np.ndarray, bs: np.ndarray, fading: FadingConfig,
                              rng: np.random.Generator) -> np.ndarray:
    """(n_users, n_paths) gain matrix; one sample_path_response row per user."""
    return np.stack([sample_path_response(u, bs, fading, rng) for u in users])


def ma_user_channel(selection: np.ndarray, n: int, angles: PathAngles,
                    responses: np.ndarray, grid: MaGrid, users: np.ndarray,
                    validate: bool = True) -> np.ndarray:
    """Channel vector from the selected MA positions to user n, length M.

    h = Q^T diag(g) f: Q stacks the transmit field responses at the selected
    grid positions, g the per-path gains, f the receive field response at the
    user location. ``validate=False`` skips the distinct-index check (test
    hook for collision experiments).
    """
    selection = np.asarray(selection, dtype=int)
    if validate:
        _check_selection(selection, grid.n_positions)
    positions = grid.candidate_positions()[selection]          # (M, 2)
    k = 2.0 * np.pi / grid.wavelength
    ct = np.cos(angles.theta_t[n])
    tw = k * np.stack([ct * np.cos(angles.phi_t[n]), ct * np.sin(angles.phi_t[n])], axis=1)
    cr = np.cos(angles.theta_r[n])
    rw = k * np.stack(
        [cr * np.cos(angles.phi_r[n]), cr * np.sin(angles.phi_r[n]), np.sin(angles.theta_r[n])],
        axis=1,
    )                                                          # (L, 3)
    Q = np.exp(1j * (tw @ positions.T))                        # (L, M)
    f = np.exp(1j * (rw @ users[n]))                           # (L,)
    return Q.T @ (responses[n] * f)


def assemble_ma_channel(selection: np.ndarray, users: np.ndarray, angles: PathAngles,
                        responses: np.ndarray, grid: MaGrid,
                        validate: bool = True) -> np.ndarray:
    """(M, N) channel matrix; column n is the user-n channel vector."""
    selection = np.asarray(selection, dtype=int)
    if validate:
        _check_selection(selection, grid.n_positions)
    cols = [
        ma_user_channel(selection, n, angles, responses, grid, users, validate=False)
        for n in range(users.shape[0])
    ]
    return np.stack(cols, axis=1)


def _check_selection(selection: np.ndarray, n_positions: int) -> None:
    if selection.ndim != 1:
        raise ValueError("selection must be a 1D index vector")
    if len(np.unique(selection)) != selection.shape[0]:
        raise ValueError("selection contains duplicate candidate indices")
    if selection.min(initial=0) < 0 or selection.max(initial=-1) >= n_positions:
        raise ValueError("selection index out of candidate range")


@dataclass(frozen=True)
class MaSlotDraws:
    """Everything random about one slot of the MA system."""

    users: np.ndarray
    angles: PathAngles
    responses: np.ndarray


def sample_ma_slot(area: AreaConfig, fading: FadingConfig, seeds: SeedStream,
                   slot: int, episode: int = 0,
                   users: np.ndarray | None = None) -> MaSlotDraws:
    """Draw users (unless given), path angles and path gains for one slot."""
    if users is None:
        users = sample_user_positions(area, seeds, slot, episode=episode)
    bs = bs_position(area)
    angles = sample_path_angles(users.shape[0], fading, seeds.rng("ma-angles", episode, slot))
    responses = sample_all_path_responses(users, bs, fading, seeds.rng("ma-gains", episode, slot))
    return MaSlotDraws(users=users, angles=angles, responses=responses)
