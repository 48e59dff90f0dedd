"""Graph-attention implicit quantile agent for MA placement.

One agent controls all movable antennas. Per slot it embeds the user graph,
modulates the embedding with cosine quantile features, scores every candidate
position through a dueling head (one value per quantile level), and picks the
top-k positions of the mean-over-quantiles score. Training regresses sampled
quantiles with an asymmetric Huber loss, prioritized replay and a soft target
network.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from flexrank.envs import MaEnvironment
from flexrank.graphs import GraphObservation
from flexrank.nn.layers import (
    cosine_embed_backward,
    cosine_embed_forward,
    dense_backward,
    dense_forward,
    dueling_backward,
    dueling_combine,
    gat_backward,
    gat_forward,
    graph_pool,
)
from flexrank.nn.losses import quantile_huber_grad
from flexrank.nn.optim import Adam, soft_update
from flexrank.nn.init import uniform_init
from flexrank.replay import PrioritizedBuffer
from flexrank.rewards import ma_reward  # noqa: F401  (re-exported agent API)
from flexrank.scenario import SeedStream


@dataclass
class TrainConfig:
    """Learning hyperparameters shared by both placement agents."""

    gamma: float = 0.98
    tau_soft: float = 0.005
    kappa: float = 1.0
    k_sam: int = 64            # quantile samples, online side
    k_sam_target: int = 64     # quantile samples, target side
    n_cos: int = 32
    batch_size: int = 64
    buffer_capacity: int = 5000
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    anneal_steps: int = 10000
    epsilon_decay: str = "linear"      # "linear" or "exp"
    alpha_penalty: float = 0.5
    lr: float = 0.01
    n_episodes: int = 2000
    updates_per_episode: int = 1
    d_emb: int = 256
    hidden: int = 256
    beta_start: float = 0.4            # importance-weight exponent schedule
    beta_end: float = 1.0
    double_q: bool = True              # next-state action from the online net
    shared_tau: bool = False           # reuse the online tau draw on the target side

    def __post_init__(self):
        if not 0 <= self.gamma < 1:
            raise ValueError("gamma must be in [0, 1)")
        if not 0 < self.tau_soft < 1:
            raise ValueError("tau_soft must be in (0, 1)")
        if self.epsilon_decay not in ("linear", "exp"):
            raise ValueError("epsilon_decay must be 'linear' or 'exp'")
        if self.epsilon_start < self.epsilon_end:
            raise ValueError("epsilon schedule must be nonincreasing")

    def epsilon_at(self, step: int) -> float:
        e0, e1, n = self.epsilon_start, self.epsilon_end, self.anneal_steps
        if self.epsilon_decay == "linear":
            return max(e1, e0 - step * (e0 - e1) / n)
        return max(e1, e0 * np.exp(-step * np.log(e0 / e1) / n))

    def beta_at(self, episode: int, n_episodes: int) -> float:
        if n_episodes <= 1:
            return self.beta_end
        frac = (episode - 1) / (n_episodes - 1)
        return self.beta_start + (self.beta_end - self.beta_start) * min(max(frac, 0.0), 1.0)


@dataclass
class Transition:
    obs: GraphObservation
    action: np.ndarray
    reward: float
    next_obs: GraphObservation
    terminal: bool


def topk_epsilon_greedy(q: np.ndarray, k: int, epsilon: float,
                        rng: np.random.Generator) -> np.ndarray:
    """k distinct indices: uniform with prob epsilon, else the k largest q.

    Ties break toward the lowest index (stable sort).
    """
    q = np.asarray(q)
    if k > q.shape[0]:
        raise ValueError(f"cannot pick {k} distinct actions from {q.shape[0]}")
    if rng.random() < epsilon:
        return rng.choice(q.shape[0], size=k, replace=False)
    return np.argsort(-q, kind="stable")[:k]


def fixed_tau(k_sam: int) -> np.ndarray:
    """Midpoint quantile grid used for frozen-policy evaluation."""
    return (np.arange(k_sam) + 0.5) / k_sam


class GaiqnNetwork:
    """Quantile-valued position scorer: GAT -> pool -> cosine modulation -> dueling."""

    def __init__(self, feat_dim: int, n_actions: int, cfg: TrainConfig):
        self.feat_dim = feat_dim
        self.n_actions = n_actions
        self.d_emb = cfg.d_emb
        self.hidden = cfg.hidden
        self.n_cos = cfg.n_cos

    def init_params(self, rng: np.random.Generator) -> dict:
        d, h, f, a = self.d_emb, self.hidden, self.feat_dim, self.n_actions
        u = lambda shape, fan: uniform_init(shape, fan, rng)
        return {
            "gat/W": u((f, d), f),
            "gat/b_src": u((d,), d),
            "gat/b_dst": u((d,), d),
            "phi/W": u((self.n_cos, d), self.n_cos),
            "phi/b": u((d,), self.n_cos),
            "val/W1": u((d, h), d), "val/b1": u((h,), d),
            "val/W2": u((h, 1), h), "val/b2": u((1,), h),
            "adv/W1": u((d, h), d), "adv/b1": u((h,), d),
            "adv/W2": u((h, a), h), "adv/b2": u((a,), h),
        }

    def forward(self, p: dict, obs: GraphObservation, tau: np.ndarray):
        """Quantile values Z of shape (k_sam, n_actions) plus backward cache."""
        gat_out, gat_cache = gat_forward(obs.features, obs.adjacency, p["gat/W"],
                                         p["gat/b_src"], p["gat/b_dst"])
        z = graph_pool(gat_out, self.d_emb)
        phi, phi_cache = cosine_embed_forward(tau, p["phi/W"], p["phi/b"])
        M = phi * z[None, :]
        hv_pre, hv_cache = dense_forward(M, p["val/W1"], p["val/b1"])
        hv = np.maximum(hv_pre, 0.0)
        V, v2_cache = dense_forward(hv, p["val/W2"], p["val/b2"])
        ha_pre, ha_cache = dense_forward(M, p["adv/W1"], p["adv/b1"])
        ha = np.maximum(ha_pre, 0.0)
        A, a2_cache = dense_forward(ha, p["adv/W2"], p["adv/b2"])
        Z = dueling_combine(V, A)
        cache = (obs, gat_cache, gat_out, z, phi, phi_cache, M,
                 hv_pre, hv_cache, hv, v2_cache, ha_pre, ha_cache, ha, a2_cache)
        return Z, cache

    def q_values(self, p: dict, obs: GraphObservation, tau: np.ndarray) -> np.ndarray:
        """Scalar per-position values: mean of the quantile rows."""
        Z, _ = self.forward(p, obs, tau)
        return Z.mean(axis=0)

    def backward(self, p: dict, cache, gZ: np.ndarray) -> dict:
        (obs, gat_cache, gat_out, z, phi, phi_cache, M,
         hv_pre, hv_cache, hv, v2_cache, ha_pre, ha_cache, ha, a2_cache) = cache
        grads = {}
        gV, gA = dueling_backward(gZ)
        gha, grads["adv/W2"], grads["adv/b2"] = dense_backward(gA, a2_cache)
        gha_pre = gha * (ha_pre > 0)
        gM_a, grads["adv/W1"], grads["adv/b1"] = dense_backward(gha_pre, ha_cache)
        ghv, grads["val/W2"], grads["val/b2"] = dense_backward(gV, v2_cache)
        ghv_pre = ghv * (hv_pre > 0)
        gM_v, grads["val/W1"], grads["val/b1"] = dense_backward(ghv_pre, hv_cache)
        gM = gM_a + gM_v
        gphi = gM * z[None, :]
        gz = (gM * phi).sum(axis=0)
        grads["phi/W"], grads["phi/b"] = cosine_embed_backward(gphi, phi_cache)
        g_gat_out = np.broadcast_to(gz, gat_out.shape)
        back = gat_backward(g_gat_out, gat_cache)
        if back is None:
            grads["gat/W"] = np.zeros_like(p["gat/W"])
            grads["gat/b_src"] = np.zeros_like(p["gat/b_src"])
            grads["gat/b_dst"] = np.zeros_like(p["gat/b_dst"])
        else:
            _, grads["gat/W"], grads["gat/b_src"], grads["gat/b_dst"] = back
        return grads


def quantile_td_error(net: GaiqnNetwork, params: dict, target: dict,
                      trans: Transition, tau: np.ndarray, tau_target: np.ndarray,
                      cfg: TrainConfig):
    """TD error matrix delta[k, k'] for one transition, plus the online cache.

    The online network predicts quantiles at levels tau for the taken joint
    action (mean over the selected positions); the bootstrap evaluates the
    target network at levels tau_target on the next-state joint action chosen
    by top-k over mean-over-tau values (online net when double_q, else target
    net). Terminal transitions drop the bootstrap term.
    """
    Z_s, cache = net.forward(params, trans.obs, tau)
    z_sa = Z_s[:, trans.action].mean(axis=1)                  # (k_sam,)
    if trans.terminal:
        delta = trans.reward - z_sa[:, None]
        delta = np.broadcast_to(delta, (tau.shape[0], tau_target.shape[0])).copy()
    else:
        chooser = params if cfg.double_q else target
        q_next = net.q_values(chooser, trans.next_obs, tau)
        a_star = np.argsort(-q_next, kind="stable")[: trans.action.shape[0]]
        Z_next, _ = net.forward(target, trans.next_obs, tau_target)
        z_next = Z_next[:, a_star].mean(axis=1)               # (k_sam_target,)
        delta = trans.reward + cfg.gamma * z_next[None, :] - z_sa[:, None]
    return delta, cache


def train_gaiqn(env: MaEnvironment, cfg: TrainConfig, seeds: SeedStream):
    """Run the full training loop; returns (params, target_params, log_rows).

    Log rows are (episode, cumulative reward, mean erank, mean penalty).
    Deterministic for a fixed seed stream.
    """
    feat_dim = 3 + env.m_ma
    net = GaiqnNetwork(feat_dim, env.grid.n_positions, cfg)
    params = net.init_params(seeds.rng("gaiqn-init"))
    target = copy.deepcopy(params)
    act_rng = seeds.rng("gaiqn-actions")
    tau_rng = seeds.rng("gaiqn-tau")
    buf_rng = seeds.rng("gaiqn-buffer")
    buffer = PrioritizedBuffer(cfg.buffer_capacity)
    opt = Adam(cfg.lr)
    log = []
    step_count = 0
    for episode in range(1, cfg.n_episodes + 1):
        obs = env.begin_episode(episode)
        rewards, eranks, penalties = [], [], []
        for _ in range(env.area.n_slots):
            eps = cfg.epsilon_at(step_count)
            tau = tau_rng.uniform(size=cfg.k_sam)
            q = net.q_values(params, obs, tau)
            action = topk_epsilon_greedy(q, env.m_ma, eps, act_rng)
            res = env.step(action)
            buffer.add(Transition(obs, action, res.reward, res.next_obs, res.terminal))
            rewards.append(res.reward)
            eranks.append(res.erank)
            penalties.append(res.penalty)
            obs = res.next_obs
            step_count += 1
        beta = cfg.beta_at(episode, cfg.n_episodes)
        for _ in range(cfg.updates_per_episode):
            batch = buffer.sample(cfg.batch_size, buf_rng, beta)
            if batch is None:
                break
            idx, transitions, weights = batch
            grads_total = {k: np.zeros_like(v) for k, v in params.items()}
            new_pri = np.empty(len(idx))
            for j, (trans, w) in enumerate(zip(transitions, weights)):
                tau = tau_rng.uniform(size=cfg.k_sam)
                if cfg.shared_tau:
                    tau_t = tau[: cfg.k_sam_target]
                else:
                    tau_t = tau_rng.uniform(size=cfg.k_sam_target)
                delta, cache = quantile_td_error(net, params, target, trans, tau, tau_t, cfg)
                gdelta = quantile_huber_grad(delta, tau, cfg.kappa)
                g_zsa = -gdelta.sum(axis=1)                   # d(loss)/d(Z(s,a,tau_k))
                gZ = np.zeros((cfg.k_sam, net.n_actions))
                gZ[:, trans.action] = (w / cfg.batch_size) * g_zsa[:, None] / trans.action.shape[0]
                g = net.backward(params, cache, gZ)
                for name in grads_total:
                    grads_total[name] += g[name]
                new_pri[j] = np.abs(delta).mean()
            opt.step(params, grads_total)
            buffer.update_priorities(idx, new_pri)
            soft_update(params, target, cfg.tau_soft)
        log.append((episode, float(np.sum(rewards)), float(np.mean(eranks)),
                    float(np.mean(penalties))))
    return params, target, log


def greedy_ma_policy(net: GaiqnNetwork, params: dict, m_ma: int, k_sam: int):
    """Frozen policy (epsilon = 0) on the midpoint quantile grid."""
    tau = fixed_tau(k_sam)

    def policy(obs: GraphObservation) -> np.ndarray:
        q = net.q_values(params, obs, tau)
        return np.argsort(-q, kind="stable")[:m_ma]

    return policy
