"""Dual-head deep Q-learning agent.

One convolutional trunk feeds two parallel fully connected heads, one
scoring frequencies and one scoring spreading factors. Two full
parameter copies exist: the training copy takes gradient steps every
slot, and the applying copy - the only one consulted when acting - is
blended toward it every ``update_iteration`` training steps. Action
selection is a pure argmax of the applying copy: there is no epsilon
randomness anywhere, so all exploration derives from the seeded weight
initialization and the evolution of the applying copy during training.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .errors import ConfigurationError
from .nn import AdamState, QNetwork, adam_step
from .replay import ReplayMemory, RowHistory


def soft_update(theta: np.ndarray, theta_minus: np.ndarray,
                tau: float) -> None:
    """Blend the applying copy toward the training copy, in place."""
    theta_minus[...] = tau * theta + (1.0 - tau) * theta_minus


@dataclass
class AgentHyperparams:
    learning_rate: float = 0.001
    gamma: float = 0.9
    replay_capacity: int = 1000
    batch_size: int = 32
    update_iteration: int = 16  # training steps between soft updates
    tau: float = 0.2
    eta: float = 0.2
    kappa: float = 0.2
    norm_floor_dbm: float = -120.0
    norm_ceil_dbm: float = -10.0
    net_rows: int = 200  # fixed canvas height fed to the trunk

    def __post_init__(self):
        if not (0.0 <= self.gamma < 1.0):
            raise ConfigurationError("gamma must lie in [0, 1)")
        if not (0.0 < self.tau <= 1.0):
            raise ConfigurationError("tau must lie in (0, 1]")
        for name in ("learning_rate", "replay_capacity", "batch_size",
                     "update_iteration", "eta", "kappa"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive")


class DualNetwork:
    """Training and applying copies of the trunk-plus-two-heads network."""

    def __init__(self, n_freq: int, n_spread: int, hyper: AgentHyperparams,
                 rng: np.random.Generator, n_bins: int = 200,
                 dtype=np.float64):
        input_shape = (hyper.net_rows, n_bins)
        heads = [[512, 256, n_freq], [512, 256, n_spread]]
        self.train_net = QNetwork(input_shape, heads, rng, dtype=dtype)
        self.apply_net = QNetwork(input_shape, heads, rng, dtype=dtype)
        self.apply_net.set_params(self.train_net.params)
        self.adam = AdamState.for_params(self.train_net.params,
                                         learning_rate=hyper.learning_rate)
        self.hyper = hyper

    def select_action(self, canvas: np.ndarray) -> tuple[int, int]:
        """Greedy pair from the applying copy; ties take the lowest index."""
        qf, qq = self.apply_net.forward(canvas)
        return int(np.argmax(qf)), int(np.argmax(qq))

    def soft_update(self) -> None:
        soft_update(self.train_net.params, self.apply_net.params,
                    self.hyper.tau)

    def train_batch(self, s, s_next, f_idx, q_idx, r_f, r_q):
        """One gradient step on both heads over a mini-batch.

        Targets bootstrap from the applying copy; each head's loss only
        touches the Q-value of the action actually taken, and the trunk
        receives the sum of both heads' gradients in a single optimizer
        step.
        """
        batch = s.shape[0]
        qf_next, qq_next = self.apply_net.forward(s_next)
        y_f = r_f + self.hyper.gamma * qf_next.max(axis=1)
        y_q = r_q + self.hyper.gamma * qq_next.max(axis=1)

        (qf, qq), cache = self.train_net.forward(s, want_cache=True)
        rows = np.arange(batch)
        qf_taken = qf[rows, f_idx]
        qq_taken = qq[rows, q_idx]
        loss_f = float(np.mean((y_f - qf_taken) ** 2))
        loss_q = float(np.mean((y_q - qq_taken) ** 2))

        gf = np.zeros_like(qf)
        gq = np.zeros_like(qq)
        gf[rows, f_idx] = 2.0 * (qf_taken - y_f) / batch
        gq[rows, q_idx] = 2.0 * (qq_taken - y_q) / batch
        grad = self.train_net.backward(cache, [gf, gq])
        adam_step(self.train_net.params, grad, self.adam)
        return loss_f, loss_q

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


class ParallelAgent:
    """Exploration-free dual-head agent (select, store, learn loop)."""

    name = "parallel"

    def __init__(self, n_freq: int, n_spread: int, hyper: AgentHyperparams,
                 seed: int, n_bins: int = 200, dtype=np.float64):
        self.hyper = hyper
        self.n_freq = n_freq
        self.n_spread = n_spread
        init_ss, sample_ss, explore_ss = np.random.SeedSequence(
            (seed, 1)).spawn(3)
        self.sample_rng = np.random.default_rng(sample_ss)
        self.explore_rng = np.random.default_rng(explore_ss)
        self.network = DualNetwork(n_freq, n_spread, hyper,
                                   np.random.default_rng(init_ss),
                                   n_bins=n_bins, dtype=dtype)
        self.replay = ReplayMemory(hyper.replay_capacity)
        self.train_count = 0

    def select(self, canvas: np.ndarray, step: int) -> tuple[int, int]:
        return self.network.select_action(canvas)

    def post_step(self, step: int, f_idx: int, q_idx: int, r_f: float,
                  r_q: float, info: dict) -> None:
        self.replay.push(step, f_idx, q_idx, r_f, r_q)

    def learn(self, history: RowHistory):
        """One training iteration; no-op until a full batch is stored."""
        if len(self.replay) < self.hyper.batch_size:
            return None
        ts, fs, qs, rfs, rqs = self.replay.sample(self.hyper.batch_size,
                                                  self.sample_rng)
        s, s_next = history.batch_pair(ts)
        losses = self.network.train_batch(s, s_next, fs, qs, rfs, rqs)
        self.train_count += 1
        if self.train_count % self.hyper.update_iteration == 0:
            self.network.soft_update()
        return losses

    def state_dict(self) -> dict:
        return {
            "network": self.network.state_dict(),
            "replay": self.replay.state_dict(),
            "train_count": self.train_count,
            "sample_rng_state": self.sample_rng.bit_generator.state,
            "explore_rng_state": self.explore_rng.bit_generator.state,
            "hyper": asdict(self.hyper),
        }

    def load_state_dict(self, d: dict) -> None:
        self.network.load_state_dict(d["network"])
        self.replay.load_state_dict(d["replay"])
        self.train_count = int(d["train_count"])
        self.sample_rng.bit_generator.state = d["sample_rng_state"]
        self.explore_rng.bit_generator.state = d["explore_rng_state"]
