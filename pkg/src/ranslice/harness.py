"""Run configuration, the coupled two-time-scale loop, evaluation, metrics.

One training run couples the two levels like this: every episode the
controller bandit picks a partition of the RB pool (one bandit round per
episode); the cell agents then play steps_per_episode scheduling steps under
that partition with fading redrawn each step, learning online; the episode's
mean system rate (Mbps) is fed back to the bandit. User positions are redrawn
every few episodes, keeping each user's serving cell fixed so network shapes
never change mid-run.

Reproducibility: a single root seed spawns named child streams (topology,
positions, channel, bandit, per-agent exploration and replay), so a fixed
(config, seed) pair reproduces every emitted byte, and changing how one
component consumes randomness does not disturb the others.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import _kernels
from .allocation import Allocation, ControllerAssignment
from .baselines import greedy_single_stage
from .exp3 import (
    Exp3State,
    enumerate_controller_actions,
    select_action,
    update,
)
from .netmodel import (
    GAIN_LOG_FLOOR,
    NetworkInstance,
    QosConfig,
    ScenarioConfig,
    PhysConfig,
    SliceKind,
    generate_topology,
    rate_matrix,
    redraw_positions,
    sample_channel,
)
from .neural import (
    DdqnAgent,
    Experience,
    act_greedy,
    agent_reward,
    encode_state,
    enumerate_agent_actions,
    epsilon_greedy,
    legal_action_mask,
    load_mlp,
    save_mlp,
    train_step,
)
from .oracle import exhaustive_solve_joint

POLICIES = ("sama-rl", "1sra", "oracle")

NORM_STAT_DRAWS = 1000


# ---------------------------------------------------------------------------
# Seeding: one root seed, named child streams.


def stream_seed(root: int, *parts) -> int:
    """Stable 64-bit child seed for a named stream."""
    h = hashlib.sha256(str(int(root)).encode())
    for p in parts:
        h.update(b"/")
        h.update(str(p).encode())
    return int.from_bytes(h.digest()[:8], "little")


def derive_rng(root: int, *parts) -> np.random.Generator:
    return np.random.default_rng(stream_seed(root, *parts))


# ---------------------------------------------------------------------------
# Configuration.


@dataclass(frozen=True)
class HyperConfig:
    learning_rate: float = 0.001
    gamma: float = 0.996
    epsilon: float = 1.0
    epsilon_min: float = 0.01
    epsilon_decay: float = 0.9995
    replay_capacity: int = 100000
    batch_size: int = 64
    target_sync_steps: int = 1000
    hidden: int = 256
    exp3_alpha: float = 0.1
    controller_mode: str = "auto"  # auto | full | coarse


@dataclass(frozen=True)
class LoopConfig:
    episodes: int = 3000
    steps_per_episode: int = 50
    trials: int = 1
    position_redraw_episodes: int = 10
    checkpoint_every: int = 500
    eval_trials: int = 50
    eval_steps: int = 10


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioConfig = ScenarioConfig()
    hyper: HyperConfig = HyperConfig()
    loop: LoopConfig = LoopConfig()
    seed: int = 42
    out: str = "runs/default"
    policy: str = "sama-rl"

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}; choose from {POLICIES}")
        for name in ("episodes", "steps_per_episode", "trials", "eval_trials", "eval_steps"):
            if getattr(self.loop, name) < 1:
                raise ValueError(f"loop.{name} must be positive")


_SCENARIO_KEYS = {
    "gnbs": ("num_gnbs", int),
    "embb_users": ("num_embb", int),
    "urllc_users": ("num_urllc", int),
    "rbs": ("num_rbs", int),
    "k_max": ("k_max", int),
    "embb_packet_bits": ("embb_packet_bits", float),
    "urllc_packet_bits": ("urllc_packet_bits", float),
    "arrival_rate_pps": ("arrival_rate_pps", float),
}
_PHYS_KEYS = {
    "rb_bandwidth_hz": float,
    "tx_power_dbm": float,
    "noise_power_dbm": float,
    "area_side_m": float,
}
_QOS_KEYS = {"r_min_bps": float, "d_max_s": float}
_HYPER_TYPES = {
    "learning_rate": float,
    "gamma": float,
    "epsilon": float,
    "epsilon_min": float,
    "epsilon_decay": float,
    "replay_capacity": int,
    "batch_size": int,
    "target_sync_steps": int,
    "hidden": int,
    "exp3_alpha": float,
    "controller_mode": str,
}
_LOOP_TYPES = {
    "episodes": int,
    "steps_per_episode": int,
    "trials": int,
    "position_redraw_episodes": int,
    "checkpoint_every": int,
    "eval_trials": int,
    "eval_steps": int,
}


def load_config(path, seed: int | None = None, out: str | None = None,
                policy: str | None = None) -> RunConfig:
    """Read a sectioned key/value config file; explicit arguments win over the
    file, the file wins over defaults. Sections: [scenario], [hyper], [loop],
    [run]."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise FileNotFoundError(f"config file not found: {path}")

    scen_kwargs = {}
    phys_kwargs = {}
    qos_kwargs = {}
    if parser.has_section("scenario"):
        for key, raw in parser.items("scenario"):
            if key in _SCENARIO_KEYS:
                name, conv = _SCENARIO_KEYS[key]
                scen_kwargs[name] = conv(float(raw)) if conv is int else conv(raw)
            elif key in _PHYS_KEYS:
                phys_kwargs[key] = _PHYS_KEYS[key](raw)
            elif key in _QOS_KEYS:
                qos_kwargs[key] = _QOS_KEYS[key](raw)
            else:
                raise ValueError(f"unknown scenario key {key!r}")
    scenario = ScenarioConfig(
        phys=PhysConfig(**phys_kwargs), qos=QosConfig(**qos_kwargs), **scen_kwargs
    )

    def section(name, types, build):
        kwargs = {}
        if parser.has_section(name):
            for key, raw in parser.items(name):
                if key not in types:
                    raise ValueError(f"unknown {name} key {key!r}")
                conv = types[key]
                kwargs[key] = conv(float(raw)) if conv is int else conv(raw)
        return build(**kwargs)

    hyper = section("hyper", _HYPER_TYPES, HyperConfig)
    loop = section("loop", _LOOP_TYPES, LoopConfig)

    run_kwargs = {"seed": 42, "out": "runs/default", "policy": "sama-rl"}
    if parser.has_section("run"):
        for key, raw in parser.items("run"):
            if key == "seed":
                run_kwargs["seed"] = int(float(raw))
            elif key in ("out", "policy"):
                run_kwargs[key] = raw
            else:
                raise ValueError(f"unknown run key {key!r}")
    if seed is not None:
        run_kwargs["seed"] = seed
    if out is not None:
        run_kwargs["out"] = out
    if policy is not None:
        run_kwargs["policy"] = policy
    return RunConfig(scenario=scenario, hyper=hyper, loop=loop, **run_kwargs)


def apply_param(config: RunConfig, parameter: str, value) -> RunConfig:
    """New config with one swept parameter changed. 'users' splits the total
    evenly across the two slices (eMBB gets any odd remainder)."""
    if parameter == "users":
        total = int(value)
        scen = replace(config.scenario, num_embb=(total + 1) // 2, num_urllc=total // 2)
    elif parameter == "rbs":
        scen = replace(config.scenario, num_rbs=int(value))
    elif parameter == "k_max":
        scen = replace(config.scenario, k_max=int(value))
    elif parameter == "r_min_bps":
        scen = replace(config.scenario, qos=replace(config.scenario.qos, r_min_bps=float(value)))
    elif parameter == "d_max_s":
        scen = replace(config.scenario, qos=replace(config.scenario.qos, d_max_s=float(value)))
    else:
        raise ValueError(f"unknown sweep parameter {parameter!r}")
    return replace(config, scenario=scen)


# ---------------------------------------------------------------------------
# Metrics.


@dataclass
class MetricsRecord:
    """One scheduling step's scalars."""

    trial: int
    episode: int
    step: int
    rewards: tuple[float, ...]
    loss_mean: float
    objective_mbps: float
    embb_satisfied: int
    urllc_satisfied: int
    exp3_arm: int
    infeasible_actions: int


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def metrics_header(num_agents: int) -> list[str]:
    return (
        ["trial", "episode", "step"]
        + [f"reward_b{b}" for b in range(num_agents)]
        + [
            "loss_mean",
            "objective_mbps",
            "embb_satisfied",
            "urllc_satisfied",
            "exp3_arm",
            "infeasible_actions",
        ]
    )


def emit_metrics(records: list[MetricsRecord], path, num_agents: int) -> None:
    """Comma-separated step records: header row, floats at 9 significant
    digits, newline-terminated."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(",".join(metrics_header(num_agents)) + "\n")
        for r in records:
            if len(r.rewards) != num_agents:
                raise ValueError("record agent count does not match header")
            row = (
                [str(r.trial), str(r.episode), str(r.step)]
                + [_fmt(v) for v in r.rewards]
                + [
                    _fmt(r.loss_mean),
                    _fmt(r.objective_mbps),
                    str(r.embb_satisfied),
                    str(r.urllc_satisfied),
                    str(r.exp3_arm),
                    str(r.infeasible_actions),
                ]
            )
            f.write(",".join(row) + "\n")


def parse_metrics(path) -> list[MetricsRecord]:
    """Inverse of emit_metrics."""
    records = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        n_agents = sum(1 for h in header if h.startswith("reward_b"))
        for row in reader:
            records.append(
                MetricsRecord(
                    trial=int(row[0]),
                    episode=int(row[1]),
                    step=int(row[2]),
                    rewards=tuple(float(v) for v in row[3 : 3 + n_agents]),
                    loss_mean=float(row[3 + n_agents]),
                    objective_mbps=float(row[4 + n_agents]),
                    embb_satisfied=int(row[5 + n_agents]),
                    urllc_satisfied=int(row[6 + n_agents]),
                    exp3_arm=int(row[7 + n_agents]),
                    infeasible_actions=int(row[8 + n_agents]),
                )
            )
    return records


def allocation_metrics(alloc: Allocation, ch, net: NetworkInstance):
    """Objective and QoS counts of the allocation as executed.

    RBs claimed by more than one user carry no traffic, so conflicted columns
    are zeroed before rates are computed.
    """
    x_eff = alloc.x.copy()
    conflicted = alloc.x.sum(axis=0) > 1
    x_eff[:, conflicted] = 0
    rates = rate_matrix(ch, net.phys)
    user_rates = (x_eff * rates).sum(axis=1)
    embb = urllc = 0
    for u in net.users:
        if u.slice == SliceKind.EMBB:
            if user_rates[u.id] >= net.qos.r_min_bps:
                embb += 1
        else:
            mu = user_rates[u.id] / u.packet_len_bits
            lam = u.arrival_rate_pps
            if mu > lam and 1.0 <= net.qos.d_max_s * (mu - lam):
                urllc += 1
    return float(user_rates.sum()) / 1e6, embb, urllc


# ---------------------------------------------------------------------------
# The coupled environment.


class TwoScaleEnv:
    """Shared machinery for training and greedy rollouts of the learned policy.

    Built once per trial: fixes the base topology (and with it each cell's
    user set and state length), freezes the gain-normalization statistics,
    enumerates the controller's arms and each cell's master action table, and
    precomputes which table rows are legal under every arm.
    """

    def __init__(self, config: RunConfig, trial: int = 0, build_agents: bool = True):
        self.config = config
        self.trial = trial
        scen = config.scenario
        self.base_net = generate_topology(scen, stream_seed(config.seed, "topology"))
        self.net = self.base_net

        # Normalization statistics, frozen from a dedicated stream on the
        # base topology so replayed experiences stay consistently encoded.
        rng = derive_rng(config.seed, "normstats")
        logs = []
        for _ in range(NORM_STAT_DRAWS):
            ch = sample_channel(self.base_net, rng)
            logs.append(np.log10(ch.gains + GAIN_LOG_FLOOR))
        stacked = np.stack(logs)
        self.norm_mean = float(stacked.mean())
        self.norm_std = float(max(stacked.std(), 1e-9))

        mode = config.hyper.controller_mode
        if mode == "auto":
            mode = "full" if scen.num_gnbs**scen.num_rbs <= 4096 else "coarse"
        self.controller_space = enumerate_controller_actions(
            scen.num_gnbs, scen.num_rbs, mode
        )

        self.gnb_ids = [g.id for g in self.base_net.gnbs]
        self.agent_users = [self.base_net.users_of(b) for b in self.gnb_ids]
        self.tables = [
            enumerate_agent_actions(scen.num_rbs, users, (), scen.k_max)
            for users in self.agent_users
        ]
        self.state_dims = [
            len(users) * scen.num_rbs + scen.num_rbs + 2 for users in self.agent_users
        ]
        # Legal rows of each master table under each controller arm.
        self.legal_masks = [
            [
                legal_action_mask(table, action.own_mask(b))
                for table, b in zip(self.tables, self.gnb_ids)
            ]
            for action in self.controller_space.actions
        ]

        self.agents: list[DdqnAgent] = []
        if build_agents:
            hyper = config.hyper
            for b, table, dim in zip(self.gnb_ids, self.tables, self.state_dims):
                self.agents.append(
                    DdqnAgent(
                        gnb_id=b,
                        table=table,
                        state_dim=dim,
                        rng=derive_rng(config.seed, "trial", trial, "init", b),
                        hidden=hyper.hidden,
                        learning_rate=hyper.learning_rate,
                        gamma=hyper.gamma,
                        epsilon=hyper.epsilon,
                        epsilon_min=hyper.epsilon_min,
                        epsilon_decay=hyper.epsilon_decay,
                        replay_capacity=hyper.replay_capacity,
                        batch_size=hyper.batch_size,
                        target_sync_steps=hyper.target_sync_steps,
                    )
                )

        self.arm: int | None = None
        self.assignment: ControllerAssignment | None = None
        self.own_masks: list[np.ndarray] = []
        self.legal: list[np.ndarray] = []
        self.ch = None
        self.states: list[np.ndarray] = []

    @property
    def num_agents(self) -> int:
        return len(self.gnb_ids)

    def refresh_positions(self, rng: np.random.Generator) -> None:
        self.net = redraw_positions(self.net, rng)

    def _encode_all(self) -> list[np.ndarray]:
        qos = self.net.qos
        return [
            encode_state(
                self.ch.gains[list(users)],
                mask,
                qos.r_min_bps,
                qos.d_max_s,
                self.norm_mean,
                self.norm_std,
            )
            for users, mask in zip(self.agent_users, self.own_masks)
        ]

    def begin_episode(self, arm: int, channel_rng: np.random.Generator) -> list[np.ndarray]:
        """Fix the partition for one episode and draw the first fading state."""
        self.arm = arm
        self.assignment = self.controller_space.actions[arm]
        self.own_masks = [self.assignment.own_mask(b) for b in self.gnb_ids]
        self.legal = self.legal_masks[arm]
        self.ch = sample_channel(self.net, channel_rng)
        self.states = self._encode_all()
        return self.states

    def joint_allocation(self, action_indices) -> Allocation:
        x = np.zeros((self.net.num_users, self.net.num_rbs), dtype=np.uint8)
        for users, table, a in zip(self.agent_users, self.tables, action_indices):
            ks, local = table.pairs(int(a))
            if len(ks):
                x[np.asarray(users)[local], ks] = 1
        return Allocation(x=x, assignment=self.assignment)

    def step(self, action_indices, channel_rng: np.random.Generator):
        """Execute one joint action; returns the step outcome and advances
        fading (self.states then holds the next observations)."""
        alloc = self.joint_allocation(action_indices)
        rewards = [
            agent_reward(alloc, self.ch, self.net, b) for b in self.gnb_ids
        ]
        objective_mbps, embb_sat, urllc_sat = allocation_metrics(alloc, self.ch, self.net)
        infeasible = sum(1 for r in rewards if r < 0)
        self.ch = sample_channel(self.net, channel_rng)
        self.states = self._encode_all()
        return {
            "alloc": alloc,
            "rewards": rewards,
            "objective_mbps": objective_mbps,
            "embb_satisfied": embb_sat,
            "urllc_satisfied": urllc_sat,
            "infeasible": infeasible,
        }


# ---------------------------------------------------------------------------
# Training.


def train(config: RunConfig) -> dict:
    """Run the full two-time-scale training and persist metrics, per-round
    controller weights, and network checkpoints under config.out."""
    with _kernels.training_thread_context():
        return _train_inner(config)


def _train_inner(config: RunConfig) -> dict:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    loop = config.loop
    records: list[MetricsRecord] = []
    episode_rows: list[list] = []
    controller_rows: list[list] = []
    num_agents = None

    for trial in range(loop.trials):
        env = TwoScaleEnv(config, trial=trial)
        num_agents = env.num_agents
        exp3_rng = derive_rng(config.seed, "trial", trial, "exp3")
        position_rng = derive_rng(config.seed, "trial", trial, "positions")
        channel_rng = derive_rng(config.seed, "trial", trial, "channel")
        explore_rngs = [
            derive_rng(config.seed, "trial", trial, "explore", b) for b in env.gnb_ids
        ]
        replay_rngs = [
            derive_rng(config.seed, "trial", trial, "replay", b) for b in env.gnb_ids
        ]
        bandit = Exp3State(len(env.controller_space), alpha=config.hyper.exp3_alpha)

        for episode in range(loop.episodes):
            if (
                loop.position_redraw_episodes > 0
                and episode > 0
                and episode % loop.position_redraw_episodes == 0
            ):
                env.refresh_positions(position_rng)
            arm = select_action(bandit, exp3_rng)
            states = env.begin_episode(arm, channel_rng)

            obj_sum = 0.0
            reward_sum = 0.0
            loss_sum = 0.0
            loss_count = 0
            embb_sum = 0
            urllc_sum = 0
            for step in range(loop.steps_per_episode):
                actions = [
                    epsilon_greedy(agent, states[i], explore_rngs[i], legal=env.legal[i])
                    for i, agent in enumerate(env.agents)
                ]
                outcome = env.step(actions, channel_rng)
                next_states = env.states
                last_step = step == loop.steps_per_episode - 1
                for i, agent in enumerate(env.agents):
                    agent.buffer.push(
                        Experience(states[i], actions[i], outcome["rewards"][i],
                                   next_states[i], terminal=last_step)
                    )
                losses = [
                    train_step(agent, replay_rngs[i]) for i, agent in enumerate(env.agents)
                ]
                step_losses = [l for l in losses if l is not None]
                loss_mean = float(np.mean(step_losses)) if step_losses else 0.0
                records.append(
                    MetricsRecord(
                        trial=trial,
                        episode=episode,
                        step=step,
                        rewards=tuple(outcome["rewards"]),
                        loss_mean=loss_mean,
                        objective_mbps=outcome["objective_mbps"],
                        embb_satisfied=outcome["embb_satisfied"],
                        urllc_satisfied=outcome["urllc_satisfied"],
                        exp3_arm=arm,
                        infeasible_actions=outcome["infeasible"],
                    )
                )
                obj_sum += outcome["objective_mbps"]
                reward_sum += float(np.mean(outcome["rewards"]))
                loss_sum += loss_mean
                loss_count += 1
                embb_sum += outcome["embb_satisfied"]
                urllc_sum += outcome["urllc_satisfied"]
                states = next_states

            steps = loop.steps_per_episode
            episode_reward_mbps = obj_sum / steps
            update(bandit, arm, episode_reward_mbps)
            controller_rows.append(
                [trial, episode, arm, episode_reward_mbps] + list(bandit.weights)
            )
            episode_rows.append(
                [
                    trial,
                    episode,
                    arm,
                    reward_sum / steps,
                    loss_sum / steps,
                    episode_reward_mbps,
                    embb_sum / steps,
                    urllc_sum / steps,
                    float(np.mean([a.epsilon for a in env.agents])),
                ]
            )
            if (
                loop.checkpoint_every > 0
                and (episode + 1) % loop.checkpoint_every == 0
                and episode + 1 < loop.episodes
            ):
                snap = out / "agents" / f"ep{episode + 1}"
                snap.mkdir(parents=True, exist_ok=True)
                for agent in env.agents:
                    save_mlp(snap / f"{agent.gnb_id}.bin", agent.main)

        agents_dir = out / "agents"
        agents_dir.mkdir(parents=True, exist_ok=True)
        for agent in env.agents:
            save_mlp(agents_dir / f"{agent.gnb_id}.bin", agent.main)

    emit_metrics(records, out / "metrics.csv", num_agents)
    _write_episode_csv(episode_rows, out / "episodes.csv")
    _write_controller_csv(controller_rows, out / "controller.csv")
    return {
        "out": str(out),
        "metrics": str(out / "metrics.csv"),
        "episodes": str(out / "episodes.csv"),
        "controller": str(out / "controller.csv"),
        "agents_dir": str(out / "agents"),
        "num_agents": num_agents,
        "episode_rewards": [row[3] for row in episode_rows],
        "episode_losses": [row[4] for row in episode_rows],
        "episode_objectives": [row[5] for row in episode_rows],
    }


def _write_episode_csv(rows, path) -> None:
    header = [
        "trial",
        "episode",
        "exp3_arm",
        "reward_mean",
        "loss_mean",
        "objective_mbps",
        "embb_satisfied_mean",
        "urllc_satisfied_mean",
        "epsilon",
    ]
    with open(path, "w", newline="") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(
                ",".join(
                    [str(row[0]), str(row[1]), str(row[2])]
                    + [_fmt(v) for v in row[3:]]
                )
                + "\n"
            )


def _write_controller_csv(rows, path) -> None:
    if rows:
        n_arms = len(rows[0]) - 4
    else:
        n_arms = 0
    header = ["trial", "round", "arm", "reward_mbps"] + [f"w{i}" for i in range(n_arms)]
    with open(path, "w", newline="") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(
                ",".join([str(row[0]), str(row[1]), str(row[2]), _fmt(row[3])]
                         + [_fmt(v) for v in row[4:]])
                + "\n"
            )


def _best_controller_arm(path, num_arms: int) -> int:
    """Arm to exploit at evaluation time: the one with the best mean observed
    reward over the recorded rounds (last trial). The bandit's weights are an
    importance-weighted estimator and stay noisy at desk-scale round counts;
    the per-arm empirical means separate long before the weights do."""
    sums = np.zeros(num_arms)
    counts = np.zeros(num_arms, dtype=np.int64)
    last_trial = None
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if sum(1 for h in header if h.startswith("w")) != num_arms:
            raise ValueError(f"{path}: controller arm count does not match the action space")
        for row in reader:
            trial = int(row[0])
            if last_trial is None or trial > last_trial:
                last_trial = trial
                sums[:] = 0.0
                counts[:] = 0
            arm = int(row[2])
            sums[arm] += float(row[3])
            counts[arm] += 1
    if last_trial is None:
        raise ValueError(f"{path}: no controller rounds recorded")
    means = np.where(counts > 0, sums / np.maximum(counts, 1), -np.inf)
    return int(np.argmax(means))


def even_split_assignment(num_gnbs: int, num_rbs: int) -> ControllerAssignment:
    """Contiguous near-equal partition used by the controller-less baseline."""
    base, rem = divmod(num_rbs, num_gnbs)
    owner = []
    for b in range(num_gnbs):
        owner.extend([b] * (base + (1 if b < rem else 0)))
    return ControllerAssignment(owner=tuple(owner))


# ---------------------------------------------------------------------------
# Evaluation.


def evaluate(config: RunConfig, checkpoint_dir=None) -> dict:
    """Greedy rollout of the configured policy, averaged over eval trials.

    Each trial redraws user positions (serving cells unchanged) and fading
    per step. The learned policy loads its networks from checkpoint_dir
    (default: <config.out>/agents) and replays the partition the trained
    controller favors most; the baseline runs on an even contiguous split;
    the oracle policy re-solves the joint problem exactly every step.
    """
    loop = config.loop
    policy = config.policy
    out = Path(config.out)
    per_trial = []

    if policy == "sama-rl":
        env = TwoScaleEnv(config, trial=0, build_agents=True)
        ckpt = Path(checkpoint_dir) if checkpoint_dir is not None else out / "agents"
        for agent in env.agents:
            path = ckpt / f"{agent.gnb_id}.bin"
            loaded = load_mlp(path)
            if loaded.sizes != agent.main.sizes:
                raise ValueError(
                    f"checkpoint {path} shape {loaded.sizes} does not match "
                    f"scenario shape {agent.main.sizes}"
                )
            agent.main = loaded
            agent.sync_target()
        arm = _best_controller_arm(out / "controller.csv", len(env.controller_space))
        for t in range(loop.eval_trials):
            env.net = env.base_net
            env.refresh_positions(derive_rng(config.seed, "eval", t, "positions"))
            channel_rng = derive_rng(config.seed, "eval", t, "channel")
            states = env.begin_episode(arm, channel_rng)
            obj = embb = urllc = infeas = 0.0
            for _ in range(loop.eval_steps):
                actions = [
                    act_greedy(agent, states[i], legal=env.legal[i])
                    for i, agent in enumerate(env.agents)
                ]
                outcome = env.step(actions, channel_rng)
                obj += outcome["objective_mbps"]
                embb += outcome["embb_satisfied"]
                urllc += outcome["urllc_satisfied"]
                infeas += outcome["infeasible"]
                states = env.states
            n = loop.eval_steps
            per_trial.append((t, obj / n, embb / n, urllc / n, infeas / n))
    else:
        base_net = generate_topology(config.scenario, stream_seed(config.seed, "topology"))
        assignment = even_split_assignment(config.scenario.num_gnbs, config.scenario.num_rbs)
        for t in range(loop.eval_trials):
            net = redraw_positions(base_net, derive_rng(config.seed, "eval", t, "positions"))
            channel_rng = derive_rng(config.seed, "eval", t, "channel")
            obj = embb = urllc = 0.0
            for _ in range(loop.eval_steps):
                ch = sample_channel(net, channel_rng)
                if policy == "1sra":
                    alloc = greedy_single_stage(net, ch, assignment)
                else:  # oracle
                    alloc = exhaustive_solve_joint(net, ch).best_alloc
                o, e, u = allocation_metrics(alloc, ch, net)
                obj += o
                embb += e
                urllc += u
            n = loop.eval_steps
            per_trial.append((t, obj / n, embb / n, urllc / n, 0.0))

    result = {
        "policy": policy,
        "objective_mbps": float(np.mean([r[1] for r in per_trial])),
        "embb_satisfied": float(np.mean([r[2] for r in per_trial])),
        "urllc_satisfied": float(np.mean([r[3] for r in per_trial])),
        "infeasible": float(np.mean([r[4] for r in per_trial])),
        "per_trial": per_trial,
    }
    out.mkdir(parents=True, exist_ok=True)
    eval_path = out / f"evaluation_{policy}.csv"
    with open(eval_path, "w", newline="") as f:
        f.write("trial,objective_mbps,embb_satisfied,urllc_satisfied,infeasible\n")
        for t, o, e, u, i in per_trial:
            f.write(f"{t},{_fmt(o)},{_fmt(e)},{_fmt(u)},{_fmt(i)}\n")
    result["csv"] = str(eval_path)
    return result


def sweep(config: RunConfig, parameter: str, values, policies=None, train_missing: bool = True) -> list[dict]:
    """Evaluate each policy at each parameter value; one result row per pair.

    The learned policy is trained on demand (into a per-value subdirectory)
    when no checkpoint exists there yet. Writes sweep_<parameter>.csv under
    config.out.
    """
    if policies is None:
        policies = [config.policy]
    rows = []
    for value in values:
        cfg_v = apply_param(config, parameter, value)
        sub = Path(config.out) / f"{parameter}_{value}"
        cfg_v = replace(cfg_v, out=str(sub))
        for policy in policies:
            cfg_p = replace(cfg_v, policy=policy)
            if policy == "sama-rl":
                have = all(
                    (sub / "agents" / f"{b}.bin").exists()
                    for b in range(cfg_p.scenario.num_gnbs)
                ) and (sub / "controller.csv").exists()
                if not have:
                    if not train_missing:
                        raise FileNotFoundError(f"no checkpoints under {sub}")
                    train(cfg_p)
            res = evaluate(cfg_p)
            rows.append(
                {
                    "parameter": parameter,
                    "value": value,
                    "policy": policy,
                    "objective_mbps": res["objective_mbps"],
                    "embb_satisfied": res["embb_satisfied"],
                    "urllc_satisfied": res["urllc_satisfied"],
                }
            )
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"sweep_{parameter}.csv"
    with open(path, "w", newline="") as f:
        f.write("parameter,value,policy,objective_mbps,embb_satisfied,urllc_satisfied\n")
        for r in rows:
            f.write(
                f"{r['parameter']},{_fmt(float(r['value']))},{r['policy']},"
                f"{_fmt(r['objective_mbps'])},{_fmt(r['embb_satisfied'])},{_fmt(r['urllc_satisfied'])}\n"
            )
    return rows
