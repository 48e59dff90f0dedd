"""Experiment configuration: JSON in, validated dataclass out.

Defaults reproduce the reference simulation setup, so a config containing
only ``system`` and ``algorithm`` runs the standard scenario. Unknown keys
are rejected (with the offending line when it can be located); the antenna
budgets of the two systems are kept equal (m_ma == k_wav * m_pa) so results
stay comparable.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from flexrank.gaiqn import TrainConfig
from flexrank.graphs import GraphThresholds
from flexrank.ma_channel import FadingConfig, MaGrid
from flexrank.pa_channel import PaLayout
from flexrank.scenario import AreaConfig

SYSTEMS = ("ma", "pa")
ALGORITHMS = ("gaiqn", "magaqn", "random", "greedy", "oracle")

# Per-algorithm defaults for fields left null in the config file.
_ALGO_LR = {"gaiqn": 0.01, "magaqn": 0.001}
_ALGO_DECAY = {"gaiqn": "linear", "magaqn": "exp"}


class ConfigError(ValueError):
    """Invalid or missing configuration content."""


@dataclass
class ExperimentConfig:
    system: str
    algorithm: str
    seed: int = 0
    # geometry
    d_area: float = 200.0
    n_slots: int = 10
    n_users: int = 80
    z_bs: float = 25.0
    z_user: float = 1.5
    z_wav: float = 3.0
    wavelength: float = 0.1
    # MA array
    i_rows: int = 10
    i_cols: int = 10
    m_ma: int = 16
    n_paths: int = 10
    rho_db: float = -40.0
    path_loss_exp: float = 2.8
    # PA waveguides
    k_wav: int = 8
    m_pa: int = 2
    n_eff: float = 1.4
    # graph construction
    d_threshold: float = 20.0
    theta_threshold: float = 0.3
    # learning
    gamma: float = 0.98
    tau_soft: float = 0.005
    kappa: float = 1.0
    k_sam: int = 64
    k_sam_target: int = 64
    n_cos: int = 32
    batch_size: int = 64
    buffer_capacity: int = 5000
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    anneal_steps: int = 10000
    epsilon_decay: str | None = None   # per-algorithm default when None
    alpha_penalty: float = 0.5
    lr: float | None = None            # per-algorithm default when None
    n_episodes: int = 2000
    updates_per_episode: int = 1
    d_emb: int = 256
    hidden: int = 256
    beta_start: float = 0.4
    beta_end: float = 1.0
    double_q: bool = True
    shared_tau: bool = False
    # evaluation / baselines
    eval_slots: int = 500
    stationary: bool = False
    random_mode: str = "iid"           # "iid" reproduces the reference values
    oracle_budget: int = 10 ** 6

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ConfigError(f"system must be one of {SYSTEMS}, got {self.system!r}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.algorithm == "gaiqn" and self.system != "ma":
            raise ConfigError("algorithm 'gaiqn' requires system 'ma'")
        if self.algorithm == "magaqn" and self.system != "pa":
            raise ConfigError("algorithm 'magaqn' requires system 'pa'")
        if self.m_ma != self.k_wav * self.m_pa:
            raise ConfigError(
                f"antenna budgets differ: m_ma={self.m_ma} but k_wav*m_pa="
                f"{self.k_wav * self.m_pa}; keep them equal for a fair comparison")
        if self.m_ma > self.i_rows * self.i_cols:
            raise ConfigError("m_ma exceeds the number of candidate positions")
        if self.m_pa > self.i_pos:
            raise ConfigError("m_pa exceeds the number of candidate positions")
        if self.random_mode not in ("iid", "distinct"):
            raise ConfigError("random_mode must be 'iid' or 'distinct'")
        if self.eval_slots < 1:
            raise ConfigError("eval_slots must be >= 1")

    @property
    def i_pos(self) -> int:
        """Candidate positions per system (shared between MA plane and waveguides)."""
        return self.i_rows * self.i_cols

    def resolved(self) -> "ExperimentConfig":
        """Fill per-algorithm defaults so the manifest is fully explicit."""
        lr = self.lr if self.lr is not None else _ALGO_LR.get(self.algorithm, 0.01)
        decay = (self.epsilon_decay if self.epsilon_decay is not None
                 else _ALGO_DECAY.get(self.algorithm, "linear"))
        return dataclasses.replace(self, lr=lr, epsilon_decay=decay)

    # ---------------------------------------------------- builders

    def area(self) -> AreaConfig:
        return AreaConfig(d_area=self.d_area, n_slots=self.n_slots, n_users=self.n_users,
                          z_bs=self.z_bs, z_user=self.z_user, z_wav=self.z_wav)

    def grid(self) -> MaGrid:
        return MaGrid(i_rows=self.i_rows, i_cols=self.i_cols, wavelength=self.wavelength)

    def fading(self) -> FadingConfig:
        return FadingConfig(n_paths=self.n_paths, rho_db=self.rho_db,
                            path_loss_exp=self.path_loss_exp, wavelength=self.wavelength)

    def layout(self) -> PaLayout:
        return PaLayout(k_wav=self.k_wav, m_pa=self.m_pa, i_pos=self.i_pos,
                        d_area=self.d_area, z_wav=self.z_wav, n_eff=self.n_eff,
                        wavelength=self.wavelength)

    def thresholds(self) -> GraphThresholds:
        return GraphThresholds(d_threshold=self.d_threshold,
                               theta_threshold=self.theta_threshold)

    def train_config(self) -> TrainConfig:
        r = self.resolved()
        return TrainConfig(
            gamma=r.gamma, tau_soft=r.tau_soft, kappa=r.kappa, k_sam=r.k_sam,
            k_sam_target=r.k_sam_target, n_cos=r.n_cos, batch_size=r.batch_size,
            buffer_capacity=r.buffer_capacity, epsilon_start=r.epsilon_start,
            epsilon_end=r.epsilon_end, anneal_steps=r.anneal_steps,
            epsilon_decay=r.epsilon_decay, alpha_penalty=r.alpha_penalty, lr=r.lr,
            n_episodes=r.n_episodes, updates_per_episode=r.updates_per_episode,
            d_emb=r.d_emb, hidden=r.hidden, beta_start=r.beta_start,
            beta_end=r.beta_end, double_q=r.double_q, shared_tau=r.shared_tau)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig)}
_REQUIRED = ("system", "algorithm")


def config_from_dict(data: dict, source_text: str | None = None) -> ExperimentConfig:
    """Build a config from a parsed JSON object, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    if set(data.keys()) == {"config"} or ("config" in data and "artifact" in data):
        data = data["config"]   # manifest replay
        if not isinstance(data, dict):
            raise ConfigError("manifest 'config' entry must be an object")
    for key in data:
        if key not in _FIELDS:
            raise ConfigError(f"unknown config key {key!r}{_locate(key, source_text)}")
    for key in _REQUIRED:
        if key not in data:
            raise ConfigError(f"missing required config field {key!r}")
    return ExperimentConfig(**data)


def load_config(path) -> ExperimentConfig:
    """Read and validate a config (or manifest) file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    try:
        return config_from_dict(data, source_text=text)
    except ConfigError as e:
        raise ConfigError(f"{path}: {e}") from e


def _locate(key: str, text: str | None) -> str:
    if not text:
        return ""
    needle = f'"{key}"'
    for lineno, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return f" (line {lineno})"
    return ""
