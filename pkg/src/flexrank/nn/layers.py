"""Forward/backward pairs for the layers used by the placement agents.

Conventions: feature matrices are row-major (one row per vertex / quantile
sample), weights multiply on the right (y = x @ W + b), vectors are 1D.
LeakyReLU slope is 0.01 everywhere.
"""

from __future__ import annotations

import numpy as np

LEAKY_SLOPE = 0.01


# ---------------------------------------------------------------- dense

def dense_forward(x: np.ndarray, W: np.ndarray, b: np.ndarray):
    """y = x @ W + b for x of shape (..., d_in)."""
    return x @ W + b, (x, W)


def dense_backward(gy: np.ndarray, cache):
    x, W = cache
    gx = gy @ W.T
    if x.ndim == 1:
        gW = np.outer(x, gy)
        gb = gy.copy()
    else:
        gW = x.reshape(-1, x.shape[-1]).T @ gy.reshape(-1, gy.shape[-1])
        gb = gy.reshape(-1, gy.shape[-1]).sum(axis=0)
    return gx, gW, gb


# ------------------------------------------------------- graph attention

def gat_forward(X: np.ndarray, A: np.ndarray, W: np.ndarray,
                beta_src: np.ndarray, beta_dst: np.ndarray):
    """Single-head graph attention over an adjacency with self-loops.

    Edge score (n, n') = LeakyReLU(beta_src . W x_n + beta_dst . W x_n'),
    softmax-normalized over n's neighborhood; output is ReLU of the
    attention-weighted sum of projected neighbor features.
    """
    V = X.shape[0]
    D = W.shape[1]
    if V == 0:
        return np.zeros((0, D)), None
    P = X @ W                                   # (V, D) projected features
    s = P @ beta_src
    t = P @ beta_dst
    E = s[:, None] + t[None, :]                 # raw score for edge (n, n')
    EL = np.where(E > 0, E, LEAKY_SLOPE * E)
    mask = A > 0
    Z = np.where(mask, EL, -np.inf)
    m = Z.max(axis=1, keepdims=True)            # rows have self-loops: finite
    expz = np.exp(Z - m)
    alpha = expz / expz.sum(axis=1, keepdims=True)
    Hlin = alpha @ P
    out = np.maximum(Hlin, 0.0)
    cache = (X, W, beta_src, beta_dst, P, E, mask, alpha, Hlin)
    return out, cache


def gat_backward(gout: np.ndarray, cache):
    if cache is None:                           # empty graph: nothing to do
        return None
    X, W, beta_src, beta_dst, P, E, mask, alpha, Hlin = cache
    gH = gout * (Hlin > 0)
    galpha = (gH @ P.T) * mask
    gP = alpha.T @ gH
    # softmax backward, row-wise over neighborhoods
    gEL = alpha * (galpha - (alpha * galpha).sum(axis=1, keepdims=True))
    gE = gEL * np.where(E > 0, 1.0, LEAKY_SLOPE)
    gs = gE.sum(axis=1)
    gt = gE.sum(axis=0)
    gP += np.outer(gs, beta_src) + np.outer(gt, beta_dst)
    g_beta_src = P.T @ gs
    g_beta_dst = P.T @ gt
    gW = X.T @ gP
    gX = gP @ W.T
    return gX, gW, g_beta_src, g_beta_dst


# ----------------------------------------------------------------- pool

def graph_pool(X: np.ndarray, width: int | None = None) -> np.ndarray:
    """Sum of vertex embeddings; an empty graph pools to the zero vector."""
    if X.shape[0] == 0:
        if width is None:
            width = X.shape[1] if X.ndim == 2 else 0
        return np.zeros(width)
    return X.sum(axis=0)


# ------------------------------------------------------ cosine embedding

def cosine_features(tau: np.ndarray, n_cos: int) -> np.ndarray:
    """(K, n_cos) matrix with entries cos(i * pi * tau_k), i = 1..n_cos."""
    i = np.arange(1, n_cos + 1)
    return np.cos(np.pi * np.outer(tau, i))


def cosine_embed_forward(tau: np.ndarray, W: np.ndarray, b: np.ndarray):
    """Quantile levels -> (K, d_emb) embedding via cosine features + dense + ReLU."""
    C = cosine_features(tau, W.shape[0])
    pre = C @ W + b
    out = np.maximum(pre, 0.0)
    return out, (C, pre)


def cosine_embed_backward(gout: np.ndarray, cache):
    C, pre = cache
    gpre = gout * (pre > 0)
    gW = C.T @ gpre
    gb = gpre.sum(axis=0)
    return gW, gb


# ---------------------------------------------------------------- dueling

def dueling_combine(V: np.ndarray, A: np.ndarray) -> np.ndarray:
    """Q = V + (A - mean_a A), broadcasting V over the action axis."""
    return V + A - A.mean(axis=-1, keepdims=True)


def dueling_backward(gQ: np.ndarray):
    """Gradients of dueling_combine wrt V and A."""
    gV = gQ.sum(axis=-1, keepdims=True)
    gA = gQ - gQ.sum(axis=-1, keepdims=True) / gQ.shape[-1]
    return gV, gA


# ------------------------------------------------------------------- GRU

def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def gru_step(z: np.ndarray, h: np.ndarray, p: dict):
    """One gated-recurrence step; z is the input vector, h the previous hidden.

    r = sig(z Wr1 + h Wr2 + br),  u = sig(z Wz1 + h Wz2 + bz),
    hc = tanh(z Wh1 + (r*h) Wh2 + bh),  h' = u*h + (1-u)*hc.
    """
    r = _sigmoid(z @ p["w_r1"] + h @ p["w_r2"] + p["b_r"])
    u = _sigmoid(z @ p["w_z1"] + h @ p["w_z2"] + p["b_z"])
    hc = np.tanh(z @ p["w_h1"] + (r * h) @ p["w_h2"] + p["b_h"])
    h_new = u * h + (1.0 - u) * hc
    cache = (z, h, r, u, hc)
    return h_new, cache


def gru_backward(gh_new: np.ndarray, cache, p: dict):
    """Returns (gz, gh, grads) with grads keyed like the parameter dict."""
    z, h, r, u, hc = cache
    gu = gh_new * (h - hc)
    ghc = gh_new * (1.0 - u)
    gh = gh_new * u

    gah = ghc * (1.0 - hc ** 2)
    grads = {"w_h1": np.outer(z, gah), "b_h": gah.copy()}
    grads["w_h2"] = np.outer(r * h, gah)
    g_rh = p["w_h2"] @ gah
    gz = p["w_h1"] @ gah
    gr = g_rh * h
    gh = gh + g_rh * r

    gau = gu * u * (1.0 - u)
    grads["w_z1"] = np.outer(z, gau)
    grads["w_z2"] = np.outer(h, gau)
    grads["b_z"] = gau.copy()
    gz += p["w_z1"] @ gau
    gh += p["w_z2"] @ gau

    gar = gr * r * (1.0 - r)
    grads["w_r1"] = np.outer(z, gar)
    grads["w_r2"] = np.outer(h, gar)
    grads["b_r"] = gar.copy()
    gz += p["w_r1"] @ gar
    gh += p["w_r2"] @ gar
    return gz, gh, grads
