"""Multi-agent graph-attention Q-network for PA placement.

One agent per waveguide. Each agent embeds its region graph, carries a GRU
hidden state across the episode's slots, and scores its waveguide's candidate
positions with a scalar dueling Q head. All agents receive the same reward
(the global effective rank); replay stores the GRU hidden state observed at
acting time and training replays a single step from it.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np

from flexrank.envs import PaEnvironment
from flexrank.gaiqn import TrainConfig, topk_epsilon_greedy
from flexrank.graphs import GraphObservation
from flexrank.nn.layers import (
    dense_backward,
    dense_forward,
    dueling_backward,
    dueling_combine,
    gat_backward,
    gat_forward,
    graph_pool,
    gru_backward,
    gru_step,
)
from flexrank.nn.optim import Adam, soft_update
from flexrank.nn.init import uniform_init
from flexrank.replay import PrioritizedBuffer
from flexrank.rewards import pa_reward  # noqa: F401  (re-exported agent API)
from flexrank.scenario import SeedStream

_GRU_NAMES = ("w_r1", "w_r2", "b_r", "w_z1", "w_z2", "b_z", "w_h1", "w_h2", "b_h")


@dataclass
class PaTransition:
    obs: GraphObservation
    action: np.ndarray
    reward: float
    next_obs: GraphObservation
    hidden: np.ndarray         # GRU state observed at acting time
    terminal: bool


class MagaqnNetwork:
    """Scalar position scorer: GAT -> pool -> GRU -> dueling head."""

    def __init__(self, feat_dim: int, n_actions: int, cfg: TrainConfig):
        self.feat_dim = feat_dim
        self.n_actions = n_actions
        self.d_emb = cfg.d_emb
        self.hidden = cfg.hidden

    def init_params(self, rng: np.random.Generator) -> dict:
        d, h, f, a = self.d_emb, self.hidden, self.feat_dim, self.n_actions
        u = lambda shape, fan: uniform_init(shape, fan, rng)
        params = {
            "gat/W": u((f, d), f),
            "gat/b_src": u((d,), d),
            "gat/b_dst": u((d,), d),
            "val/W1": u((h, h), h), "val/b1": u((h,), h),
            "val/W2": u((h, 1), h), "val/b2": u((1,), h),
            "adv/W1": u((h, h), h), "adv/b1": u((h,), h),
            "adv/W2": u((h, a), h), "adv/b2": u((a,), h),
        }
        for name in _GRU_NAMES:
            if name.startswith("b"):
                params[f"gru/{name}"] = u((h,), h)
            elif name.endswith("1"):
                params[f"gru/{name}"] = u((d, h), d)
            else:
                params[f"gru/{name}"] = u((h, h), h)
        return params

    def zero_hidden(self) -> np.ndarray:
        return np.zeros(self.hidden)

    def forward(self, p: dict, obs: GraphObservation, h_prev: np.ndarray):
        """Returns (Q over positions, new hidden state, backward cache)."""
        gat_out, gat_cache = gat_forward(obs.features, obs.adjacency, p["gat/W"],
                                         p["gat/b_src"], p["gat/b_dst"])
        z = graph_pool(gat_out, self.d_emb)
        gru_p = {name: p[f"gru/{name}"] for name in _GRU_NAMES}
        h_new, gru_cache = gru_step(z, h_prev, gru_p)
        hv_pre, hv_cache = dense_forward(h_new, p["val/W1"], p["val/b1"])
        hv = np.maximum(hv_pre, 0.0)
        V, v2_cache = dense_forward(hv, p["val/W2"], p["val/b2"])
        ha_pre, ha_cache = dense_forward(h_new, p["adv/W1"], p["adv/b1"])
        ha = np.maximum(ha_pre, 0.0)
        A, a2_cache = dense_forward(ha, p["adv/W2"], p["adv/b2"])
        Q = dueling_combine(V, A)
        cache = (gat_cache, gat_out, gru_cache, hv_pre, hv_cache, hv, v2_cache,
                 ha_pre, ha_cache, ha, a2_cache)
        return Q, h_new, cache

    def backward(self, p: dict, cache, gQ: np.ndarray) -> dict:
        (gat_cache, gat_out, gru_cache, hv_pre, hv_cache, hv, v2_cache,
         ha_pre, ha_cache, ha, a2_cache) = cache
        grads = {}
        gV, gA = dueling_backward(gQ)
        gha, grads["adv/W2"], grads["adv/b2"] = dense_backward(gA, a2_cache)
        gha_pre = gha * (ha_pre > 0)
        gh_a, grads["adv/W1"], grads["adv/b1"] = dense_backward(gha_pre, ha_cache)
        ghv, grads["val/W2"], grads["val/b2"] = dense_backward(gV, v2_cache)
        ghv_pre = ghv * (hv_pre > 0)
        gh_v, grads["val/W1"], grads["val/b1"] = dense_backward(ghv_pre, hv_cache)
        gh_new = gh_a + gh_v
        gru_p = {name: p[f"gru/{name}"] for name in _GRU_NAMES}
        gz, _, gru_grads = gru_backward(gh_new, gru_cache, gru_p)
        for name, g in gru_grads.items():
            grads[f"gru/{name}"] = g
        g_gat_out = np.broadcast_to(gz, gat_out.shape)
        back = gat_backward(g_gat_out, gat_cache)
        if back is None:
            grads["gat/W"] = np.zeros_like(p["gat/W"])
            grads["gat/b_src"] = np.zeros_like(p["gat/b_src"])
            grads["gat/b_dst"] = np.zeros_like(p["gat/b_dst"])
        else:
            _, grads["gat/W"], grads["gat/b_src"], grads["gat/b_dst"] = back
        return grads


def select_pa_actions(net: MagaqnNetwork, agent_params: list[dict],
                      observations: list[GraphObservation],
                      hiddens: list[np.ndarray], m_pa: int, epsilon: float,
                      rng: np.random.Generator):
    """Per-waveguide top-k/uniform actions; every agent's GRU advances once.

    Returns (selections (K, m_pa), new hidden states).
    """
    if len(agent_params) != len(observations):
        raise ValueError("one observation per agent required")
    selections, new_hiddens = [], []
    for p, obs, h in zip(agent_params, observations, hiddens):
        Q, h_new, _ = net.forward(p, obs, h)
        selections.append(topk_epsilon_greedy(Q, m_pa, epsilon, rng))
        new_hiddens.append(h_new)
    return np.stack(selections), new_hiddens


def magaqn_td_residual(net: MagaqnNetwork, params: dict, target: dict,
                       trans: PaTransition, cfg: TrainConfig):
    """Bellman residual for one replayed transition, plus the online cache.

    The online net replays one GRU step from the stored hidden state; the
    target's next-step evaluation continues from the replayed hidden (no
    gradient flows through the bootstrap side).
    """
    Q_s, h1, cache = net.forward(params, trans.obs, trans.hidden)
    q_sa = Q_s[trans.action].mean()
    if trans.terminal:
        residual = trans.reward - q_sa
    else:
        Q_next_t, _, _ = net.forward(target, trans.next_obs, h1)
        if cfg.double_q:
            Q_next_o, _, _ = net.forward(params, trans.next_obs, h1)
            a_star = np.argsort(-Q_next_o, kind="stable")[: trans.action.shape[0]]
        else:
            a_star = np.argsort(-Q_next_t, kind="stable")[: trans.action.shape[0]]
        residual = trans.reward + cfg.gamma * Q_next_t[a_star].mean() - q_sa
    return residual, cache


def train_magaqn(env: PaEnvironment, cfg: TrainConfig, seeds: SeedStream):
    """Train one agent per waveguide; returns (params list, targets, log rows).

    Same log schema as the MA agent; all agents share every slot's reward.
    """
    layout = env.layout
    feat_dim = 3 + layout.k_wav
    net = MagaqnNetwork(feat_dim, layout.i_pos, cfg)
    params = [net.init_params(seeds.rng("magaqn-init", episode=k)) for k in range(layout.k_wav)]
    targets = [copy.deepcopy(p) for p in params]
    opts = [Adam(cfg.lr) for _ in range(layout.k_wav)]
    buffers = [PrioritizedBuffer(cfg.buffer_capacity) for _ in range(layout.k_wav)]
    act_rng = seeds.rng("magaqn-actions")
    buf_rng = seeds.rng("magaqn-buffer")
    log = []
    step_count = 0
    for episode in range(1, cfg.n_episodes + 1):
        obs_list = env.begin_episode(episode)
        hiddens = [net.zero_hidden() for _ in range(layout.k_wav)]
        rewards, eranks, penalties = [], [], []
        for _ in range(env.area.n_slots):
            eps = cfg.epsilon_at(step_count)
            selections, new_hiddens = select_pa_actions(
                net, params, obs_list, hiddens, layout.m_pa, eps, act_rng)
            res = env.step(selections)
            for k in range(layout.k_wav):
                buffers[k].add(PaTransition(obs_list[k], selections[k], res.reward,
                                            res.next_obs[k], hiddens[k], res.terminal))
            hiddens = new_hiddens
            obs_list = res.next_obs
            rewards.append(res.reward)
            eranks.append(res.erank)
            penalties.append(res.penalty)
            step_count += 1
        beta = cfg.beta_at(episode, cfg.n_episodes)
        for k in range(layout.k_wav):
            for _ in range(cfg.updates_per_episode):
                batch = buffers[k].sample(cfg.batch_size, buf_rng, beta)
                if batch is None:
                    break
                idx, transitions, weights = batch
                grads_total = {n: np.zeros_like(v) for n, v in params[k].items()}
                new_pri = np.empty(len(idx))
                for j, (trans, w) in enumerate(zip(transitions, weights)):
                    residual, cache = magaqn_td_residual(net, params[k], targets[k], trans, cfg)
                    gq_sa = -2.0 * w * residual / cfg.batch_size
                    gQ = np.zeros(net.n_actions)
                    gQ[trans.action] = gq_sa / trans.action.shape[0]
                    g = net.backward(params[k], cache, gQ)
                    for name in grads_total:
                        grads_total[name] += g[name]
                    new_pri[j] = abs(residual)
                opts[k].step(params[k], grads_total)
                buffers[k].update_priorities(idx, new_pri)
                soft_update(params[k], targets[k], cfg.tau_soft)
        log.append((episode, float(np.sum(rewards)), float(np.mean(eranks)),
                    float(np.mean(penalties))))
    return params, targets, log


def greedy_pa_policy(net: MagaqnNetwork, agent_params: list[dict], m_pa: int):
    """Frozen policy (epsilon = 0); caller owns the per-episode hidden reset."""

    def policy(obs_list: list[GraphObservation], hiddens: list[np.ndarray]):
        selections, new_hiddens = [], []
        for p, obs, h in zip(agent_params, obs_list, hiddens):
            Q, h_new, _ = net.forward(p, obs, h)
            selections.append(np.argsort(-Q, kind="stable")[:m_pa])
            new_hiddens.append(h_new)
        return np.stack(selections), new_hiddens

    return policy
