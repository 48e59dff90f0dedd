"""Experiment execution: evaluation protocols, artifact writing, sweeps.

Every run directory receives a ``manifest.json`` with the fully resolved
config; replaying a manifest reproduces all artifacts byte for byte. CSV
files use LF line endings and fixed 6-decimal formatting.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from flexrank.baselines import (
    MaInstance,
    PaInstance,
    exhaustive_oracle_ma,
    exhaustive_oracle_pa,
    greedy_ma_placement,
    greedy_pa_placement,
    make_ma_instance,
    make_pa_instance,
    random_ma_selection,
    random_pa_selections,
)
from flexrank.config import ExperimentConfig
from flexrank.envs import MaEnvironment, PaEnvironment
from flexrank.erank import effective_rank
from flexrank.gaiqn import GaiqnNetwork, greedy_ma_policy, train_gaiqn
from flexrank.magaqn import MagaqnNetwork, greedy_pa_policy, train_magaqn
from flexrank.ma_channel import assemble_ma_channel, sample_ma_slot
from flexrank.nn.checkpoint import save_params
from flexrank.pa_channel import assemble_pa_channel
from flexrank.rewards import collision_pairs
from flexrank.scenario import SeedStream, sample_user_positions

# Evaluation episodes live far from the training episode range so frozen
# policies are scored on fresh draws (stationary configs pin draws anyway).
EVAL_EPISODE_BASE = 1_000_000

ARTIFACT_VERSION = 1

TRAIN_LOG_HEADER = "episode,cum_reward,mean_erank,mean_penalty"
EVAL_HEADER = "system,algorithm,n_slots,mean_erank,std_erank,mean_penalty"
SWEEP_HEADER = "param,value,mean_erank,std_erank,n_seeds,std_slots"


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def write_csv(path, header: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(header + "\n")
        for row in rows:
            f.write(",".join(str(c) for c in row) + "\n")


def write_manifest(out_dir: Path, cfg: ExperimentConfig) -> None:
    manifest = {
        "artifact": "flexrank",
        "version": ARTIFACT_VERSION,
        "config": cfg.resolved().to_dict(),
    }
    text = json.dumps(manifest, sort_keys=True, indent=2) + "\n"
    (out_dir / "manifest.json").write_text(text, encoding="utf-8", newline="\n")


def _eval_slot_labels(cfg: ExperimentConfig):
    """(episode, slot) labels covering eval_slots evaluation slots."""
    labels = []
    episode = EVAL_EPISODE_BASE + 1
    slot = 1
    for _ in range(cfg.eval_slots):
        labels.append((episode, slot))
        slot += 1
        if slot > cfg.n_slots:
            slot = 1
            episode += 1
    return labels


def evaluate_baseline(cfg: ExperimentConfig, seed: int):
    """Per-slot effective ranks and penalties for random/greedy placement."""
    seeds = SeedStream(seed)
    area, alpha = cfg.area(), cfg.alpha_penalty
    grid, fading, layout = cfg.grid(), cfg.fading(), cfg.layout()
    act = seeds.rng("baseline-actions")
    distinct = cfg.random_mode == "distinct"
    eranks, penalties = [], []
    for episode, slot in _eval_slot_labels(cfg):
        ep, sl = (0, 1) if cfg.stationary else (episode, slot)
        if cfg.system == "ma":
            draws = sample_ma_slot(area, fading, seeds, sl, episode=ep)
            if cfg.algorithm == "greedy":
                inst = MaInstance(draws=draws, grid=grid, m_ma=cfg.m_ma)
                sel = greedy_ma_placement(inst)
            else:
                sel = random_ma_selection(cfg.i_pos, cfg.m_ma, act, distinct)
            H = assemble_ma_channel(sel, draws.users, draws.angles, draws.responses,
                                    grid, validate=False)
            pairs = collision_pairs(sel)
        else:
            users = sample_user_positions(area, seeds, sl, episode=ep)
            if cfg.algorithm == "greedy":
                inst = PaInstance(users=users, layout=layout)
                sel = greedy_pa_placement(inst)
            else:
                sel = random_pa_selections(layout, act, distinct)
            H = assemble_pa_channel(sel, users, layout, validate=False)
            pairs = sum(collision_pairs(sel[k]) for k in range(cfg.k_wav))
        eranks.append(effective_rank(H))
        penalties.append(alpha * pairs)
    return np.array(eranks), np.array(penalties)


def evaluate_gaiqn_policy(cfg: ExperimentConfig, params: dict, seed: int):
    """Frozen-policy (epsilon = 0) rollout over eval_slots fresh slots."""
    seeds = SeedStream(seed)
    env = MaEnvironment(cfg.area(), cfg.grid(), cfg.fading(), cfg.thresholds(),
                        seeds, m_ma=cfg.m_ma, alpha=cfg.alpha_penalty,
                        stationary=cfg.stationary)
    net = GaiqnNetwork(3 + cfg.m_ma, cfg.i_pos, cfg.train_config())
    policy = greedy_ma_policy(net, params, cfg.m_ma, cfg.k_sam)
    eranks, penalties = [], []
    episode = EVAL_EPISODE_BASE + 1
    while len(eranks) < cfg.eval_slots:
        obs = env.begin_episode(episode)
        for _ in range(cfg.n_slots):
            res = env.step(policy(obs))
            eranks.append(res.erank)
            penalties.append(res.penalty)
            obs = res.next_obs
            if len(eranks) >= cfg.eval_slots:
                break
        episode += 1
    return np.array(eranks), np.array(penalties)


def evaluate_magaqn_policy(cfg: ExperimentConfig, agent_params: list[dict], seed: int):
    seeds = SeedStream(seed)
    env = PaEnvironment(cfg.area(), cfg.layout(), cfg.thresholds(), seeds,
                        alpha=cfg.alpha_penalty, stationary=cfg.stationary)
    net = MagaqnNetwork(3 + cfg.k_wav, cfg.i_pos, cfg.train_config())
    policy = greedy_pa_policy(net, agent_params, cfg.m_pa)
    eranks, penalties = [], []
    episode = EVAL_EPISODE_BASE + 1
    while len(eranks) < cfg.eval_slots:
        obs = env.begin_episode(episode)
        hiddens = [net.zero_hidden() for _ in range(cfg.k_wav)]
        for _ in range(cfg.n_slots):
            selections, hiddens = policy(obs, hiddens)
            res = env.step(selections)
            eranks.append(res.erank)
            penalties.append(res.penalty)
            obs = res.next_obs
            if len(eranks) >= cfg.eval_slots:
                break
        episode += 1
    return np.array(eranks), np.array(penalties)


def _write_eval_summary(out_dir: Path, cfg: ExperimentConfig,
                        eranks: np.ndarray, penalties: np.ndarray) -> None:
    row = [cfg.system, cfg.algorithm, len(eranks), _fmt(eranks.mean()),
           _fmt(eranks.std()), _fmt(penalties.mean())]
    write_csv(out_dir / "eval_summary.csv", EVAL_HEADER, [row])


def run(cfg: ExperimentConfig, out_dir) -> Path:
    """Execute one configured job, writing all artifacts into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = cfg.resolved()
    write_manifest(out_dir, cfg)

    if cfg.algorithm in ("random", "greedy"):
        eranks, penalties = evaluate_baseline(cfg, cfg.seed)
        _write_eval_summary(out_dir, cfg, eranks, penalties)
    elif cfg.algorithm == "gaiqn":
        seeds = SeedStream(cfg.seed)
        env = MaEnvironment(cfg.area(), cfg.grid(), cfg.fading(), cfg.thresholds(),
                            seeds, m_ma=cfg.m_ma, alpha=cfg.alpha_penalty,
                            stationary=cfg.stationary)
        params, target, log = train_gaiqn(env, cfg.train_config(), seeds)
        _write_train_log(out_dir, log)
        save_params(out_dir / "gaiqn.ckpt",
                    _merge_online_target(params, target),
                    meta={"algorithm": "gaiqn", "seed": cfg.seed})
        eranks, penalties = evaluate_gaiqn_policy(cfg, params, cfg.seed)
        _write_eval_summary(out_dir, cfg, eranks, penalties)
    elif cfg.algorithm == "magaqn":
        seeds = SeedStream(cfg.seed)
        env = PaEnvironment(cfg.area(), cfg.layout(), cfg.thresholds(), seeds,
                            alpha=cfg.alpha_penalty, stationary=cfg.stationary)
        params_list, targets, log = train_magaqn(env, cfg.train_config(), seeds)
        _write_train_log(out_dir, log)
        for k, (p, t) in enumerate(zip(params_list, targets)):
            save_params(out_dir / f"magaqn_agent{k:02d}.ckpt",
                        _merge_online_target(p, t),
                        meta={"algorithm": "magaqn", "waveguide": k, "seed": cfg.seed})
        eranks, penalties = evaluate_magaqn_policy(cfg, params_list, cfg.seed)
        _write_eval_summary(out_dir, cfg, eranks, penalties)
    elif cfg.algorithm == "oracle":
        result = run_oracle(cfg)
        payload = {
            "system": cfg.system,
            "best_value": result.best_value,
            "best_selection": np.asarray(result.best_selection).tolist(),
            "n_evaluated": result.n_evaluated,
        }
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
        (out_dir / "oracle.json").write_text(text, encoding="utf-8", newline="\n")
    else:  # pragma: no cover - config validation rejects other names
        raise ValueError(f"unhandled algorithm {cfg.algorithm}")
    return out_dir


def run_oracle(cfg: ExperimentConfig):
    """Exhaustive search on the first evaluation slot's frozen instance."""
    seeds = SeedStream(cfg.seed)
    ep, sl = (0, 1) if cfg.stationary else (EVAL_EPISODE_BASE + 1, 1)
    if cfg.system == "ma":
        inst = make_ma_instance(cfg.area(), cfg.grid(), cfg.fading(), seeds,
                                cfg.m_ma, episode=ep, slot=sl)
        return exhaustive_oracle_ma(inst, cfg.oracle_budget)
    inst = make_pa_instance(cfg.area(), cfg.layout(), seeds, episode=ep, slot=sl)
    return exhaustive_oracle_pa(inst, cfg.oracle_budget)


def _write_train_log(out_dir: Path, log) -> None:
    rows = [(ep, _fmt(cum), _fmt(er), _fmt(pen)) for ep, cum, er, pen in log]
    write_csv(out_dir / "train_log.csv", TRAIN_LOG_HEADER, rows)


def _merge_online_target(params: dict, target: dict) -> dict:
    merged = {f"online/{k}": v for k, v in params.items()}
    merged.update({f"target/{k}": v for k, v in target.items()})
    return merged


# ------------------------------------------------------------------ sweeps

def _sweep_cell(cfg_dict: dict, param: str, value, seed: int):
    cfg = ExperimentConfig(**{**cfg_dict, param: value, "seed": seed})
    if cfg.algorithm in ("random", "greedy"):
        eranks, _ = evaluate_baseline(cfg, seed)
    elif cfg.algorithm == "gaiqn":
        seeds = SeedStream(seed)
        env = MaEnvironment(cfg.area(), cfg.grid(), cfg.fading(), cfg.thresholds(),
                            seeds, m_ma=cfg.m_ma, alpha=cfg.alpha_penalty,
                            stationary=cfg.stationary)
        params, _, _ = train_gaiqn(env, cfg.train_config(), seeds)
        eranks, _ = evaluate_gaiqn_policy(cfg, params, seed)
    elif cfg.algorithm == "magaqn":
        seeds = SeedStream(seed)
        env = PaEnvironment(cfg.area(), cfg.layout(), cfg.thresholds(), seeds,
                            alpha=cfg.alpha_penalty, stationary=cfg.stationary)
        params_list, _, _ = train_magaqn(env, cfg.train_config(), seeds)
        eranks, _ = evaluate_magaqn_policy(cfg, params_list, seed)
    else:
        raise ValueError(f"algorithm {cfg.algorithm!r} cannot be swept")
    return eranks


def sweep(cfg: ExperimentConfig, param: str, values, seed_list, out_dir,
          workers: int = 1) -> Path:
    """One run per (value, seed) cell; emits a combined mean/std table.

    Cell failures are recorded in ``failures.csv`` and the sweep continues.
    """
    if param not in ("n_users", "d_area"):
        raise ValueError(f"sweep parameter must be n_users or d_area, got {param!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = cfg.resolved()
    write_manifest(out_dir, cfg)
    cfg_dict = cfg.to_dict()
    caster = int if param == "n_users" else float
    cells = [(caster(v), s) for v in values for s in seed_list]

    results: dict = {}
    failures = []
    if workers > 1 and cells:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_sweep_cell, cfg_dict, param, v, s): (v, s)
                       for v, s in cells}
            for fut, (v, s) in futures.items():
                try:
                    results[(v, s)] = fut.result()
                except Exception as e:
                    failures.append((param, v, s, repr(e)))
    else:
        for v, s in cells:
            try:
                results[(v, s)] = _sweep_cell(cfg_dict, param, v, s)
            except Exception as e:
                failures.append((param, v, s, repr(e)))

    rows = []
    for v in [caster(x) for x in values]:
        per_seed = [results[(v, s)] for s in seed_list if (v, s) in results]
        if not per_seed:
            continue
        seed_means = np.array([e.mean() for e in per_seed])
        pooled = np.concatenate(per_seed)
        rows.append((param, v, _fmt(seed_means.mean()), _fmt(seed_means.std()),
                     len(per_seed), _fmt(pooled.std())))
    write_csv(out_dir / "sweep.csv", SWEEP_HEADER, rows)
    if failures:
        write_csv(out_dir / "failures.csv", "param,value,seed,error", failures)
    return out_dir / "sweep.csv"
