import numpy as np
import pytest

from flexrank.nn.checkpoint import load_params, save_params
from flexrank.nn.gradcheck import LAYER_CHECKS, layer_gradient_checks, numeric_gradient_check
from flexrank.nn.init import uniform_init
from flexrank.nn.layers import (
    cosine_features,
    dueling_combine,
    gat_forward,
    graph_pool,
    gru_step,
)
from flexrank.nn.losses import quantile_huber_grad, quantile_huber_loss
from flexrank.nn.optim import Adam, soft_update

rng0 = np.random.default_rng(0)


# ---------------------------------------------------------------- layers

def test_gat_single_vertex_is_relu_of_projection():
    X = np.array([[0.4, -1.2, 0.7]])
    A = np.ones((1, 1))
    W = rng0.normal(size=(3, 5))
    bs, bd = rng0.normal(size=5), rng0.normal(size=5)
    out, _ = gat_forward(X, A, W, bs, bd)
    assert np.allclose(out, np.maximum(X @ W, 0.0))


def test_gat_attention_rows_sum_to_one():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(5, 3))
    A = np.eye(5)
    A[0, 1] = A[1, 0] = A[2, 4] = A[4, 2] = 1.0
    out, cache = gat_forward(X, A, rng.normal(size=(3, 4)), rng.normal(size=4), rng.normal(size=4))
    alpha = cache[7]
    assert np.allclose(alpha.sum(axis=1), 1.0, atol=1e-9)
    assert np.all(alpha[A == 0] == 0.0)


def test_gat_matches_scalar_oracle():
    # 3-vertex path graph, independent per-entry evaluation
    rng = np.random.default_rng(2)
    X = rng.normal(size=(3, 2)) * 0.5
    A = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.0, 1.0, 1.0]])
    W = rng.normal(size=(2, 3)) * 0.5
    bs, bd = rng.normal(size=3) * 0.5, rng.normal(size=3) * 0.5
    out, _ = gat_forward(X, A, W, bs, bd)

    def leaky(v):
        return v if v > 0 else 0.01 * v

    P = X @ W
    expected = np.zeros((3, 3))
    for n in range(3):
        nbrs = [j for j in range(3) if A[n, j] == 1]
        scores = [leaky(float(P[n] @ bs + P[j] @ bd)) for j in nbrs]
        e = np.exp(scores - np.max(scores))
        alpha = e / e.sum()
        acc = np.zeros(3)
        for a, j in zip(alpha, nbrs):
            acc += a * P[j]
        expected[n] = np.maximum(acc, 0.0)
    assert np.allclose(out, expected, atol=1e-12)


def test_gat_permutation_equivariance():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(6, 4))
    A = np.eye(6)
    for i, j in ((0, 1), (1, 2), (3, 4), (4, 5), (2, 3)):
        A[i, j] = A[j, i] = 1.0
    W = rng.normal(size=(4, 5))
    bs, bd = rng.normal(size=5), rng.normal(size=5)
    out, _ = gat_forward(X, A, W, bs, bd)
    perm = rng.permutation(6)
    out_p, _ = gat_forward(X[perm], A[np.ix_(perm, perm)], W, bs, bd)
    assert np.allclose(out_p, out[perm], atol=1e-12)


def test_graph_pool_cases():
    x = rng0.normal(size=(1, 4))
    assert np.allclose(graph_pool(x), x[0])
    y = rng0.normal(size=(5, 4))
    perm = np.random.default_rng(1).permutation(5)
    assert np.allclose(graph_pool(y), graph_pool(y[perm]))
    opp = np.vstack([y[0], -y[0]])
    assert np.allclose(graph_pool(opp), np.zeros(4), atol=1e-15)
    assert np.allclose(graph_pool(np.zeros((0, 3)), width=3), np.zeros(3))


def test_cosine_features_endpoints():
    assert np.allclose(cosine_features(np.array([0.0]), 6), np.ones((1, 6)))
    alt = cosine_features(np.array([1.0]), 6)
    assert np.allclose(alt[0], [(-1.0) ** i for i in range(1, 7)], atol=1e-12)


def test_quantile_modulation_is_rowwise_hadamard():
    rng = np.random.default_rng(4)
    z = rng.normal(size=6)
    phi = rng.normal(size=(3, 6))
    M = phi * z[None, :]
    for k in range(3):
        assert np.allclose(M[k], z * phi[k], atol=1e-12)


def test_dueling_combine_examples():
    q = dueling_combine(np.array([2.0]), np.array([1.0, 2.0, 3.0]))
    assert np.allclose(q, [1.0, 2.0, 3.0])
    q2 = dueling_combine(np.array([5.0]), np.full(4, 1.7))
    assert np.allclose(q2, 5.0)


def test_dueling_mean_identity():
    rng = np.random.default_rng(5)
    V = rng.normal(size=(3, 1))
    A = rng.normal(size=(3, 7))
    Q = dueling_combine(V, A)
    assert np.allclose(Q.mean(axis=1, keepdims=True), V, atol=1e-12)


def _gru_params(din, dh, fill=0.0):
    p = {}
    for name in ("w_r1", "w_z1", "w_h1"):
        p[name] = np.full((din, dh), fill)
    for name in ("w_r2", "w_z2", "w_h2"):
        p[name] = np.full((dh, dh), fill)
    for name in ("b_r", "b_z", "b_h"):
        p[name] = np.full(dh, fill)
    return p


def test_gru_zero_parameters():
    p = _gru_params(1, 1)
    h_new, cache = gru_step(np.array([0.3]), np.array([1.0]), p)
    _, _, r_u_check = None, None, cache
    z, h, r, u, hc = cache
    assert r[0] == pytest.approx(0.5) and u[0] == pytest.approx(0.5)
    assert hc[0] == pytest.approx(0.0)
    assert h_new[0] == pytest.approx(0.5)


def test_gru_copy_gate():
    p = _gru_params(2, 3)
    p["b_z"] = np.full(3, 30.0)   # update gate saturates at 1: copy previous state
    h = np.array([0.2, -0.4, 0.9])
    h_new, _ = gru_step(np.array([1.0, -1.0]), h, p)
    assert np.allclose(h_new, h, atol=1e-10)


def test_gru_matches_scalar_oracle():
    rng = np.random.default_rng(6)
    din, dh = 2, 2
    p = {k: rng.normal(size=v.shape) * 0.5 for k, v in _gru_params(din, dh).items()}
    z = rng.normal(size=din)
    h = rng.normal(size=dh)
    h_new, _ = gru_step(z, h, p)

    def sig(x):
        return 1.0 / (1.0 + np.exp(-x))

    expected = np.zeros(dh)
    r = np.zeros(dh)
    u = np.zeros(dh)
    for j in range(dh):
        r[j] = sig(sum(z[i] * p["w_r1"][i, j] for i in range(din))
                   + sum(h[i] * p["w_r2"][i, j] for i in range(dh)) + p["b_r"][j])
        u[j] = sig(sum(z[i] * p["w_z1"][i, j] for i in range(din))
                   + sum(h[i] * p["w_z2"][i, j] for i in range(dh)) + p["b_z"][j])
    for j in range(dh):
        hc = np.tanh(sum(z[i] * p["w_h1"][i, j] for i in range(din))
                     + sum(r[i] * h[i] * p["w_h2"][i, j] for i in range(dh)) + p["b_h"][j])
        expected[j] = u[j] * h[j] + (1 - u[j]) * hc
    assert np.allclose(h_new, expected, atol=1e-12)


# ---------------------------------------------------------------- losses

def test_quantile_huber_quadratic_branch():
    delta = np.array([[0.5]])
    assert quantile_huber_loss(delta, np.array([0.5]), 1.0) == pytest.approx(0.0625)


def test_quantile_huber_linear_branch():
    delta = np.array([[-2.0]])
    assert quantile_huber_loss(delta, np.array([0.25]), 1.0) == pytest.approx(1.125)


def test_quantile_huber_zero():
    delta = np.zeros((3, 4))
    assert quantile_huber_loss(delta, np.array([0.1, 0.5, 0.9]), 2.0) == 0.0


def test_quantile_huber_mean_over_target_axis():
    delta = np.array([[0.5, 0.5]])
    one = quantile_huber_loss(np.array([[0.5]]), np.array([0.5]), 1.0)
    assert quantile_huber_loss(delta, np.array([0.5]), 1.0) == pytest.approx(one)


# ------------------------------------------------------------- gradients

def test_dense_gradcheck_tight():
    assert LAYER_CHECKS["dense"](np.random.default_rng(1)) < 1e-6


def test_gat_gradcheck():
    assert LAYER_CHECKS["gat"](np.random.default_rng(2)) < 1e-4


def test_quantile_huber_gradcheck_tight():
    assert LAYER_CHECKS["quantile_huber"](np.random.default_rng(3)) < 1e-5


def test_all_layer_checks_pass():
    results = layer_gradient_checks(seed=1, probes=3)
    assert set(results) == {"dense", "gat", "cosine_embed", "dueling", "gru", "quantile_huber"}
    for name, err in results.items():
        assert err < 1e-4, name


def test_numeric_gradient_check_catches_wrong_gradient():
    x = np.array([1.3])

    def bad(p):
        return float(p["w"][0] ** 2), {"w": np.array([3.0 * p["w"][0]])}

    assert numeric_gradient_check(bad, {"w": x}) > 1e-2


# ------------------------------------------------------------- optimizer

def test_adam_descends_quadratic():
    params = {"w": np.array([5.0])}
    opt = Adam(lr=0.1)
    for _ in range(200):
        opt.step(params, {"w": 2.0 * params["w"]})
    assert abs(params["w"][0]) < 0.1


def test_adam_first_step_magnitude():
    params = {"w": np.array([1.0])}
    opt = Adam(lr=0.01)
    opt.step(params, {"w": np.array([123.0])})
    # bias-corrected first step is lr * g / (|g| + eps) ~ lr
    assert params["w"][0] == pytest.approx(1.0 - 0.01, abs=1e-6)


def test_soft_update_examples():
    online = {"w": np.array([1.0])}
    target = {"w": np.array([0.0])}
    soft_update(online, target, 0.005)
    assert target["w"][0] == pytest.approx(0.005)
    equal_target = {"w": np.array([0.7])}
    soft_update({"w": np.array([0.7])}, equal_target, 0.005)
    assert equal_target["w"][0] == pytest.approx(0.7)


def test_soft_update_geometric_decay():
    online = {"w": np.array([1.0])}
    target = {"w": np.array([0.0])}
    n = 40
    for _ in range(n):
        soft_update(online, target, 0.005)
    assert abs(target["w"][0] - 1.0) == pytest.approx((1 - 0.005) ** n, rel=1e-12)


def test_soft_update_shape_mismatch():
    with pytest.raises(ValueError):
        soft_update({"w": np.zeros(2)}, {"w": np.zeros(3)}, 0.1)


# ------------------------------------------------------------ checkpoint

def test_checkpoint_roundtrip(tmp_path):
    rng = np.random.default_rng(7)
    params = {"a/W": rng.normal(size=(3, 4)), "b": rng.normal(size=5), "c": np.array(2.5)}
    path = tmp_path / "net.ckpt"
    save_params(path, params, meta={"note": "x"})
    loaded, meta = load_params(path)
    assert meta == {"note": "x"}
    assert set(loaded) == set(params)
    for k in params:
        assert np.array_equal(loaded[k], np.asarray(params[k], dtype=float))


def test_checkpoint_bytes_deterministic(tmp_path):
    rng = np.random.default_rng(8)
    params = {"x": rng.normal(size=(2, 2)), "y": rng.normal(size=3)}
    p1, p2 = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
    save_params(p1, params)
    save_params(p2, dict(reversed(list(params.items()))))
    assert p1.read_bytes() == p2.read_bytes()


def test_checkpoint_rejects_garbage(tmp_path):
    p = tmp_path / "bad.ckpt"
    p.write_bytes(b"not a checkpoint")
    with pytest.raises(ValueError):
        load_params(p)


def test_uniform_init_bounds_and_determinism():
    a = uniform_init((100, 4), 16, np.random.default_rng(9))
    b = uniform_init((100, 4), 16, np.random.default_rng(9))
    assert np.array_equal(a, b)
    assert np.all(np.abs(a) <= 0.25)
