"""The slot loop tying environment, agent, replay history, and metrics.

One iteration = one sensing interval: observe the canvas, pick an
action from the applying network, step the environment, store the
transition, take one training step, and periodically soft-update. The
loop object checkpoints and resumes mid-run bit-identically.
"""

from __future__ import annotations

import numpy as np

from .metrics import MetricsWriter
from .oracle import ThroughputWindow
from .replay import RowHistory


class EpisodeRunner:
    """Drives one agent in one environment instance."""

    def __init__(self, env, agent, thr_window: int = 200):
        self.env = env
        self.agent = agent
        hyper = agent.hyper
        self.history = RowHistory(
            depth=env.history_rows,
            n_bins=env.band.bin_count,
            net_rows=hyper.net_rows,
            floor_dbm=hyper.norm_floor_dbm,
            ceil_dbm=hyper.norm_ceil_dbm,
        )
        self.history.seed_initial(env.waterfall)
        self.window = ThroughputWindow(thr_window)
        self.step_cursor = 0

    def one_step(self) -> dict:
        t = self.step_cursor
        canvas = self.history.canvas_latest()
        f_idx, q_idx = self.agent.select(canvas, t)
        _, r_f, r_q, info = self.env.step((f_idx, q_idx))
        self.history.push_row(info["new_row_dbm"])
        self.agent.post_step(t, f_idx, q_idx, r_f, r_q, info)
        losses = self.agent.learn(self.history)
        thr = self.window.push(info["rate_bps"], info["c_max_bps"])
        self.step_cursor += 1
        loss_f, loss_q = losses if losses is not None else (float("nan"),
                                                            float("nan"))
        return {
            "step": t,
            "freq_idx": f_idx,
            "spread_idx": q_idx,
            "sjnr_db": info["sjnr_db"],
            "rate_bps": info["rate_bps"],
            "c_max_bps": info["c_max_bps"],
            "r_f": r_f,
            "r_q": r_q,
            "loss_f": loss_f,
            "loss_q": loss_q,
            "thr_norm": thr,
            "jam_mode": info["jam_mode"],
            "detected": int(info["detected"]),
            "clipped": int(info["clipped"]),
        }

    def run(self, steps: int, writer: MetricsWriter | None = None,
            progress_every: int = 0) -> list[dict]:
        """Advance ``steps`` slots; returns rows unless writing to file."""
        rows = []
        for i in range(steps):
            row = self.one_step()
            if writer is not None:
                writer.write_row(row)
            else:
                rows.append(row)
            if progress_every and (i + 1) % progress_every == 0:
                print(f"step {self.step_cursor}: thr={row['thr_norm']:.3f}",
                      flush=True)
        return rows

    # -- persistence -----------------------------------------------------------

    def state_dict(self) -> dict:
        return {
            "step_cursor": self.step_cursor,
            "env": self.env.state_dict(),
            "agent": self.agent.state_dict(),
            "history": self.history.state_dict(),
            "window": self.window.state_dict(),
        }

    def load_state_dict(self, d: dict) -> None:
        self.step_cursor = int(d["step_cursor"])
        self.env.load_state_dict(d["env"])
        self.agent.load_state_dict(d["agent"])
        self.history.load_state_dict(d["history"])
        self.window.load_state_dict(d["window"])


class OraclePolicyAgent:
    """Replays the per-slot exhaustive-search best action (no learning)."""

    name = "oracle"

    def __init__(self, env):
        self._env = env

        class _Hyper:
            net_rows = env.history_rows
            norm_floor_dbm = -120.0
            norm_ceil_dbm = -10.0

        self.hyper = _Hyper()

    def select(self, canvas, step):
        _, best = self._env.oracle_preview()
        return best

    def post_step(self, *args, **kwargs):
        pass

    def learn(self, history):
        return None

    def state_dict(self) -> dict:
        return {}

    def load_state_dict(self, d: dict) -> None:
        pass
