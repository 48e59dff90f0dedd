import numpy as np
import pytest

from flexrank.erank import effective_rank
from flexrank.ma_channel import (
    FadingConfig,
    MaGrid,
    PathAngles,
    assemble_ma_channel,
    field_response_vector,
    ma_user_channel,
    receive_wavevector,
    sample_all_path_responses,
    sample_ma_slot,
    sample_path_angles,
    sample_path_response,
    transmit_wavevector,
)
from flexrank.scenario import AreaConfig, SeedStream

K0 = 2 * np.pi / 0.1   # wavenumber at the reference wavelength


def test_transmit_wavevector_axis_aligned():
    assert np.allclose(transmit_wavevector(0.0, 0.0, 0.1), [K0, 0.0])
    assert np.allclose(transmit_wavevector(np.pi / 2, 0.3, 0.1), [0.0, 0.0], atol=1e-12)
    assert np.allclose(transmit_wavevector(0.0, np.pi / 2, 0.1), [0.0, K0], atol=1e-12)


def test_receive_wavevector_axis_aligned():
    assert np.allclose(receive_wavevector(0.0, 0.0, 0.1), [K0, 0.0, 0.0])
    assert np.allclose(receive_wavevector(np.pi / 2, 0.0, 0.1), [0.0, 0.0, K0], atol=1e-12)


def test_receive_wavevector_norm():
    rng = np.random.default_rng(0)
    for _ in range(50):
        th, ph = rng.uniform(-np.pi / 2, np.pi / 2, size=2)
        assert np.linalg.norm(receive_wavevector(th, ph, 0.1)) == pytest.approx(K0)


def test_field_response_zero_position():
    wv = np.random.default_rng(1).normal(size=(5, 2))
    assert np.allclose(field_response_vector(np.zeros(2), wv), np.ones(5))


def test_field_response_unit_modulus():
    rng = np.random.default_rng(2)
    frv = field_response_vector(rng.normal(size=3), rng.normal(size=(7, 3)))
    assert np.allclose(np.abs(frv), 1.0)


def test_field_response_half_wavelength_phase():
    # position [lambda/2, 0] against wavevector [2*pi/lambda, 0]: phase pi
    lam = 0.1
    frv = field_response_vector(np.array([lam / 2, 0.0]), np.array([[2 * np.pi / lam, 0.0]]))
    assert frv[0] == pytest.approx(-1.0 + 0.0j, abs=1e-12)


def test_field_response_dimension_mismatch():
    with pytest.raises(ValueError):
        field_response_vector(np.zeros(3), np.zeros((4, 2)))


def test_path_response_deterministic():
    fading = FadingConfig()
    user = np.array([50.0, 50.0, 1.5])
    bs = np.array([0.0, 100.0, 25.0])
    rng_a = np.random.default_rng(3)
    rng_b = np.random.default_rng(3)
    assert np.array_equal(sample_path_response(user, bs, fading, rng_a),
                          sample_path_response(user, bs, fading, rng_b))


def test_path_response_user_at_bs_rejected():
    bs = np.array([0.0, 100.0, 25.0])
    with pytest.raises(ValueError):
        sample_path_response(bs, bs, FadingConfig(), np.random.default_rng(0))


def test_path_response_total_gain_monte_carlo():
    # expected total gain rho_lin * d^-2.8 at d=100: 1e-4 * 100**-2.8 ~ 2.512e-10
    fading = FadingConfig(rho_db=-40.0, path_loss_exp=2.8)
    bs = np.array([0.0, 0.0, 0.0])
    user = np.array([100.0, 0.0, 0.0])
    target = 1e-4 * 100.0 ** -2.8
    assert target == pytest.approx(2.512e-10, rel=1e-3)
    rng = np.random.default_rng(4)
    total = np.mean([np.sum(np.abs(sample_path_response(user, bs, fading, rng)) ** 2)
                     for _ in range(10_000)])
    assert abs(total - target) / target < 0.03


def _unit_gain_setup():
    """Single path, unit gain, single grid point at the origin, user at origin."""
    grid = MaGrid(i_rows=1, i_cols=1)
    angles = PathAngles(theta_t=np.zeros((1, 1)), phi_t=np.zeros((1, 1)),
                        theta_r=np.zeros((1, 1)), phi_r=np.zeros((1, 1)))
    responses = np.ones((1, 1), dtype=complex)
    users = np.zeros((1, 3))
    return grid, angles, responses, users


def test_user_channel_zero_phase_unit_gain():
    grid, angles, responses, users = _unit_gain_setup()
    h = ma_user_channel(np.array([0]), 0, angles, responses, grid, users)
    assert np.allclose(h, [1.0 + 0.0j], atol=1e-14)


def test_user_channel_linear_in_gains():
    rng = np.random.default_rng(5)
    grid = MaGrid(i_rows=2, i_cols=3)
    angles = sample_path_angles(2, FadingConfig(n_paths=4), rng)
    responses = rng.normal(size=(2, 4)) + 1j * rng.normal(size=(2, 4))
    users = rng.uniform(0, 50, size=(2, 3))
    sel = np.array([1, 4])
    h1 = ma_user_channel(sel, 0, angles, responses, grid, users)
    h2 = ma_user_channel(sel, 0, angles, 3.5 * responses, grid, users)
    assert np.allclose(h2, 3.5 * h1)


def test_user_channel_matches_three_factor_product():
    # independent oracle: explicit Q^T diag(g) f with per-entry loops
    rng = np.random.default_rng(6)
    grid = MaGrid(i_rows=2, i_cols=2)
    L = 2
    angles = sample_path_angles(1, FadingConfig(n_paths=L), rng)
    responses = rng.normal(size=(1, L)) + 1j * rng.normal(size=(1, L))
    users = rng.uniform(0, 20, size=(1, 3))
    sel = np.array([0, 3])
    positions = grid.candidate_positions()[sel]
    Q = np.zeros((L, 2), dtype=complex)
    f = np.zeros(L, dtype=complex)
    for l in range(L):
        kt = transmit_wavevector(angles.theta_t[0, l], angles.phi_t[0, l], grid.wavelength)
        kr = receive_wavevector(angles.theta_r[0, l], angles.phi_r[0, l], grid.wavelength)
        for m in range(2):
            Q[l, m] = np.exp(1j * positions[m] @ kt)
        f[l] = np.exp(1j * users[0] @ kr)
    expected = Q.T @ np.diag(responses[0]) @ f
    h = ma_user_channel(sel, 0, angles, responses, grid, users)
    assert np.allclose(h, expected, atol=1e-12)


def test_duplicate_selection_rejected():
    grid, angles, responses, users = _unit_gain_setup()
    grid = MaGrid(i_rows=2, i_cols=2)
    with pytest.raises(ValueError):
        ma_user_channel(np.array([1, 1]), 0, angles, responses, grid, users)


def test_assemble_single_user_column():
    rng = np.random.default_rng(7)
    grid = MaGrid(i_rows=3, i_cols=3)
    fading = FadingConfig(n_paths=3)
    angles = sample_path_angles(1, fading, rng)
    responses = rng.normal(size=(1, 3)) + 1j * rng.normal(size=(1, 3))
    users = rng.uniform(0, 50, size=(1, 3))
    sel = np.array([0, 4, 8])
    H = assemble_ma_channel(sel, users, angles, responses, grid)
    assert H.shape == (3, 1)
    assert np.allclose(H[:, 0], ma_user_channel(sel, 0, angles, responses, grid, users))


def test_assemble_column_order_follows_users():
    rng = np.random.default_rng(8)
    grid = MaGrid(i_rows=3, i_cols=3)
    fading = FadingConfig(n_paths=2)
    angles = sample_path_angles(3, fading, rng)
    responses = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
    users = rng.uniform(0, 50, size=(3, 3))
    sel = np.array([2, 6])
    H = assemble_ma_channel(sel, users, angles, responses, grid)
    for n in range(3):
        assert np.allclose(H[:, n], ma_user_channel(sel, n, angles, responses, grid, users))


def test_selection_order_invariance_of_erank():
    area = AreaConfig(n_users=6)
    seeds = SeedStream(10)
    draws = sample_ma_slot(area, FadingConfig(), seeds, slot=1)
    grid = MaGrid()
    sel = np.array([5, 17, 40, 99])
    H1 = assemble_ma_channel(sel, draws.users, draws.angles, draws.responses, grid)
    H2 = assemble_ma_channel(sel[::-1], draws.users, draws.angles, draws.responses, grid)
    assert effective_rank(H1) == pytest.approx(effective_rank(H2), abs=1e-10)


def test_conjugation_symmetry():
    # flipping (theta -> -theta, phi -> phi + pi) negates every wavevector;
    # with conjugated gains the channel matrix conjugates entrywise
    rng = np.random.default_rng(11)
    grid = MaGrid(i_rows=2, i_cols=2)
    fading = FadingConfig(n_paths=3)
    angles = sample_path_angles(2, fading, rng)
    responses = rng.normal(size=(2, 3)) + 1j * rng.normal(size=(2, 3))
    users = rng.uniform(0, 30, size=(2, 3))
    sel = np.array([0, 3])
    H = assemble_ma_channel(sel, users, angles, responses, grid)
    flipped = PathAngles(theta_t=-angles.theta_t, phi_t=angles.phi_t + np.pi,
                         theta_r=-angles.theta_r, phi_r=angles.phi_r + np.pi)
    Hc = assemble_ma_channel(sel, users, flipped, responses.conj(), grid)
    assert np.allclose(Hc, H.conj(), atol=1e-12)


def test_grid_geometry():
    grid = MaGrid(i_rows=10, i_cols=10, wavelength=0.1)
    pos = grid.candidate_positions()
    assert pos.shape == (100, 2)
    # adjacent columns half a wavelength apart, centered at the origin
    assert pos[1, 0] - pos[0, 0] == pytest.approx(0.05)
    assert pos[10, 1] - pos[0, 1] == pytest.approx(0.05)
    assert np.allclose(pos.mean(axis=0), [0.0, 0.0], atol=1e-12)


def test_slot_draws_deterministic():
    area = AreaConfig(n_users=4)
    seeds = SeedStream(21)
    a = sample_ma_slot(area, FadingConfig(), seeds, slot=2, episode=1)
    b = sample_ma_slot(area, FadingConfig(), seeds, slot=2, episode=1)
    assert np.array_equal(a.users, b.users)
    assert np.array_equal(a.responses, b.responses)
    assert np.array_equal(a.angles.theta_t, b.angles.theta_t)


def test_all_path_responses_shape():
    rng = np.random.default_rng(12)
    users = rng.uniform(10, 50, size=(5, 3))
    bs = np.array([0.0, 100.0, 25.0])
    g = sample_all_path_responses(users, bs, FadingConfig(n_paths=7), rng)
    assert g.shape == (5, 7)
