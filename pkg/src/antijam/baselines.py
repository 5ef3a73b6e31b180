"""Comparison agents: epsilon-greedy variant, joint-action DQN, and DQN
frequency control paired with threshold-feedback spreading control.

All three reuse the same network core and training loop mechanics as
the dual-head agent; they differ only in head layout, action selection,
and which reward signal trains the network.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .agent import AgentHyperparams, ParallelAgent, soft_update
from .errors import ConfigurationError
from .nn import AdamState, QNetwork, adam_step
from .replay import ReplayMemory, RowHistory


@dataclass
class EpsilonSchedule:
    """Multiplicative epsilon decay clamped at a floor."""

    start: float = 0.9
    end: float = 0.05
    decay: float = 0.995

    def __post_init__(self):
        if not (0.0 <= self.end <= self.start <= 1.0):
            raise ConfigurationError("need 0 <= end <= start <= 1")
        if not (0.0 < self.decay <= 1.0):
            raise ConfigurationError("decay must lie in (0, 1]")

    def value(self, iteration: int) -> float:
        return max(self.end, self.start * self.decay ** iteration)


class EpsilonGreedyParallelAgent(ParallelAgent):
    """The dual-head agent with classic epsilon-greedy selection.

    With probability epsilon both indices are drawn uniformly; otherwise
    selection matches the exploration-free agent exactly.
    """

    name = "egreedy"

    def __init__(self, n_freq, n_spread, hyper: AgentHyperparams, seed: int,
                 schedule: EpsilonSchedule | None = None, n_bins: int = 200,
                 dtype=np.float64):
        super().__init__(n_freq, n_spread, hyper, seed, n_bins=n_bins,
                         dtype=dtype)
        self.schedule = schedule or EpsilonSchedule()

    def select(self, canvas: np.ndarray, step: int) -> tuple[int, int]:
        eps = self.schedule.value(step)
        if self.explore_rng.uniform() < eps:
            return (int(self.explore_rng.integers(self.n_freq)),
                    int(self.explore_rng.integers(self.n_spread)))
        return self.network.select_action(canvas)


class _SingleHeadDqn:
    """Shared machinery for the single-head baselines."""

    def __init__(self, n_outputs: int, hyper: AgentHyperparams,
                 rng: np.random.Generator, n_bins: int, dtype):
        input_shape = (hyper.net_rows, n_bins)
        heads = [[512, 256, n_outputs]]
        self.train_net = QNetwork(input_shape, heads, rng, dtype=dtype)
        self.apply_net = QNetwork(input_shape, heads, rng, dtype=dtype)
        self.apply_net.set_params(self.train_net.params)
        self.adam = AdamState.for_params(self.train_net.params,
                                         learning_rate=hyper.learning_rate)
        self.hyper = hyper

    def q_values(self, canvas: np.ndarray) -> np.ndarray:
        return self.apply_net.forward(canvas)[0]

    def soft_update(self) -> None:
        soft_update(self.train_net.params, self.apply_net.params,
                    self.hyper.tau)

    def train_batch(self, s, s_next, a_idx, r):
        batch = s.shape[0]
        (q_next,) = self.apply_net.forward(s_next)
        y = r + self.hyper.gamma * q_next.max(axis=1)
        (q,), cache = self.train_net.forward(s, want_cache=True)
        rows = np.arange(batch)
        taken = q[rows, a_idx]
        loss = float(np.mean((y - taken) ** 2))
        g = np.zeros_like(q)
        g[rows, a_idx] = 2.0 * (taken - y) / batch
        grad = self.train_net.backward(cache, [g])
        adam_step(self.train_net.params, grad, self.adam)
        return loss

    def state_dict(self) -> dict:
        return {
            "theta": self.train_net.params.copy(),
            "theta_minus": self.apply_net.params.copy(),
            "adam_m": self.adam.m.copy(),
            "adam_v": self.adam.v.copy(),
            "adam_steps": self.adam.step_count,
        }

    def load_state_dict(self, d: dict) -> None:
        self.train_net.set_params(d["theta"])
        self.apply_net.set_params(d["theta_minus"])
        self.adam.m[...] = d["adam_m"]
        self.adam.v[...] = d["adam_v"]
        self.adam.step_count = int(d["adam_steps"])


def joint_index(freq_idx: int, spread_idx: int, n_spread: int) -> int:
    """Row-major encoding of an action pair into one output index."""
    return freq_idx * n_spread + spread_idx


def joint_decode(index: int, n_spread: int) -> tuple[int, int]:
    """Inverse of joint_index."""
    return index // n_spread, index % n_spread


class JointDQNAgent:
    """Conventional DQN over the full (frequency x spreading) action grid.

    A single head scores all pairs; the training reward is the sum of
    both per-head rewards so the same information reaches the single
    value function. Selection is epsilon-greedy.
    """

    name = "joint"

    def __init__(self, n_freq, n_spread, hyper: AgentHyperparams, seed: int,
                 schedule: EpsilonSchedule | None = None, n_bins: int = 200,
                 dtype=np.float64):
        self.hyper = hyper
        self.n_freq = n_freq
        self.n_spread = n_spread
        self.schedule = schedule or EpsilonSchedule()
        init_ss, sample_ss, explore_ss = np.random.SeedSequence(
            (seed, 1)).spawn(3)
        self.sample_rng = np.random.default_rng(sample_ss)
        self.explore_rng = np.random.default_rng(explore_ss)
        self.dqn = _SingleHeadDqn(n_freq * n_spread, hyper,
                                  np.random.default_rng(init_ss),
                                  n_bins, dtype)
        self.replay = ReplayMemory(hyper.replay_capacity)
        self.train_count = 0

    def select(self, canvas: np.ndarray, step: int) -> tuple[int, int]:
        eps = self.schedule.value(step)
        if self.explore_rng.uniform() < eps:
            idx = int(self.explore_rng.integers(self.n_freq * self.n_spread))
        else:
            idx = int(np.argmax(self.dqn.q_values(canvas)))
        return joint_decode(idx, self.n_spread)

    def post_step(self, step, f_idx, q_idx, r_f, r_q, info) -> None:
        self.replay.push(step, f_idx, q_idx, r_f, r_q)

    def learn(self, history: RowHistory):
        if len(self.replay) < self.hyper.batch_size:
            return None
        ts, fs, qs, rfs, rqs = self.replay.sample(self.hyper.batch_size,
                                                  self.sample_rng)
        s, s_next = history.batch_pair(ts)
        a_idx = fs * self.n_spread + qs
        loss = self.dqn.train_batch(s, s_next, a_idx, rfs + rqs)
        self.train_count += 1
        if self.train_count % self.hyper.update_iteration == 0:
            self.dqn.soft_update()
        return loss, loss

    def state_dict(self) -> dict:
        return {
            "network": self.dqn.state_dict(),
            "replay": self.replay.state_dict(),
            "train_count": self.train_count,
            "sample_rng_state": self.sample_rng.bit_generator.state,
            "explore_rng_state": self.explore_rng.bit_generator.state,
            "hyper": asdict(self.hyper),
        }

    def load_state_dict(self, d: dict) -> None:
        self.dqn.load_state_dict(d["network"])
        self.replay.load_state_dict(d["replay"])
        self.train_count = int(d["train_count"])
        self.sample_rng.bit_generator.state = d["sample_rng_state"]
        self.explore_rng.bit_generator.state = d["explore_rng_state"]


@dataclass
class AdaptiveSFController:
    """Threshold-feedback spreading control with hysteresis.

    Raises the spreading index when the fed-back SJNR drops below the
    demod threshold, lowers it when the SJNR clears the threshold by
    more than the hysteresis margin, and holds otherwise. Saturates at
    the ends of the factor set.
    """

    n_spread: int
    low_threshold_db: float
    hysteresis_db: float = 6.0
    index: int = 0

    def __post_init__(self):
        if self.hysteresis_db <= 0:
            raise ConfigurationError("hysteresis must be positive")
        if not (0 <= self.index < self.n_spread):
            raise ConfigurationError("start index out of range")

    @property
    def high_threshold_db(self) -> float:
        return self.low_threshold_db + self.hysteresis_db

    def update(self, sjnr_db: float) -> int:
        if sjnr_db < self.low_threshold_db:
            self.index = min(self.index + 1, self.n_spread - 1)
        elif sjnr_db > self.high_threshold_db:
            self.index = max(self.index - 1, 0)
        return self.index


class DQNControlAgent:
    """DQN frequency selection plus adaptive spreading-factor control.

    The network scores frequencies only and trains on the frequency
    reward; the spreading index follows the previous slot's realized
    SJNR through the threshold controller.
    """

    name = "control"

    def __init__(self, n_freq, n_spread, hyper: AgentHyperparams, seed: int,
                 demod_threshold_db: float = 3.0,
                 hysteresis_db: float = 6.0,
                 schedule: EpsilonSchedule | None = None, n_bins: int = 200,
                 dtype=np.float64):
        self.hyper = hyper
        self.n_freq = n_freq
        self.n_spread = n_spread
        self.schedule = schedule or EpsilonSchedule()
        init_ss, sample_ss, explore_ss = np.random.SeedSequence(
            (seed, 1)).spawn(3)
        self.sample_rng = np.random.default_rng(sample_ss)
        self.explore_rng = np.random.default_rng(explore_ss)
        self.dqn = _SingleHeadDqn(n_freq, hyper,
                                  np.random.default_rng(init_ss),
                                  n_bins, dtype)
        self.controller = AdaptiveSFController(
            n_spread=n_spread, low_threshold_db=demod_threshold_db,
            hysteresis_db=hysteresis_db)
        self.replay = ReplayMemory(hyper.replay_capacity)
        self.train_count = 0

    def select(self, canvas: np.ndarray, step: int) -> tuple[int, int]:
        eps = self.schedule.value(step)
        if self.explore_rng.uniform() < eps:
            fi = int(self.explore_rng.integers(self.n_freq))
        else:
            fi = int(np.argmax(self.dqn.q_values(canvas)))
        return fi, self.controller.index

    def post_step(self, step, f_idx, q_idx, r_f, r_q, info) -> None:
        self.replay.push(step, f_idx, q_idx, r_f, r_q)
        self.controller.update(float(info["sjnr_db"]))

    def learn(self, history: RowHistory):
        if len(self.replay) < self.hyper.batch_size:
            return None
        ts, fs, qs, rfs, rqs = self.replay.sample(self.hyper.batch_size,
                                                  self.sample_rng)
        s, s_next = history.batch_pair(ts)
        loss = self.dqn.train_batch(s, s_next, fs, rfs)
        self.train_count += 1
        if self.train_count % self.hyper.update_iteration == 0:
            self.dqn.soft_update()
        return loss, loss

    def state_dict(self) -> dict:
        return {
            "network": self.dqn.state_dict(),
            "replay": self.replay.state_dict(),
            "train_count": self.train_count,
            "controller_index": self.controller.index,
            "sample_rng_state": self.sample_rng.bit_generator.state,
            "explore_rng_state": self.explore_rng.bit_generator.state,
            "hyper": asdict(self.hyper),
        }

    def load_state_dict(self, d: dict) -> None:
        self.dqn.load_state_dict(d["network"])
        self.replay.load_state_dict(d["replay"])
        self.train_count = int(d["train_count"])
        self.controller.index = int(d["controller_index"])
        self.sample_rng.bit_generator.state = d["sample_rng_state"]
        self.explore_rng.bit_generator.state = d["explore_rng_state"]
