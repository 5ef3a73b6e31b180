"""Experience replay backed by a shared row history.

Consecutive waterfalls overlap in all but one row, so experiences store
step indices into one append-only array of normalized sensed rows
instead of full matrices; states are materialized on demand. The
history also adapts waterfalls of any configured depth to the fixed
network canvas by repeating rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


class RowHistory:
    """Normalized sensed rows for a whole run, oldest first.

    Row ``i`` is the row sensed at slot ``i - depth`` (the first
    ``depth`` rows are the pre-game canvas), so the waterfall observed
    before acting at step t occupies rows [t, t + depth).
    """

    def __init__(self, depth: int, n_bins: int, net_rows: int = 200,
                 floor_dbm: float = -120.0, ceil_dbm: float = -10.0,
                 capacity_hint: int = 4096):
        if ceil_dbm <= floor_dbm:
            raise ConfigurationError("normalization ceiling below floor")
        self.depth = int(depth)
        self.n_bins = int(n_bins)
        self.net_rows = int(net_rows)
        self.floor_dbm = floor_dbm
        self.ceil_dbm = ceil_dbm
        self._rows = np.zeros((max(capacity_hint, self.depth), n_bins))
        self._count = 0
        self._repeats = self._balanced_repeats(self.depth, self.net_rows)

    @staticmethod
    def _balanced_repeats(depth: int, net_rows: int) -> np.ndarray:
        if net_rows < depth:
            raise ConfigurationError("canvas smaller than waterfall depth")
        base, rem = divmod(net_rows, depth)
        reps = np.full(depth, base, dtype=np.int64)
        reps[:rem] += 1  # oldest rows absorb the remainder
        return reps

    def normalize(self, row_dbm: np.ndarray) -> np.ndarray:
        span = self.ceil_dbm - self.floor_dbm
        return np.clip((row_dbm - self.floor_dbm) / span, 0.0, 1.0)

    def push_row(self, row_dbm: np.ndarray) -> None:
        if self._count == self._rows.shape[0]:
            grown = np.zeros((self._rows.shape[0] * 2, self.n_bins))
            grown[:self._count] = self._rows
            self._rows = grown
        self._rows[self._count] = self.normalize(row_dbm)
        self._count += 1

    def seed_initial(self, waterfall_dbm: np.ndarray) -> None:
        """Install the pre-game waterfall as rows [0, depth)."""
        if waterfall_dbm.shape != (self.depth, self.n_bins):
            raise ConfigurationError("initial waterfall shape mismatch")
        if self._count != 0:
            raise ConfigurationError("history already seeded")
        for row in waterfall_dbm:
            self.push_row(row)

    @property
    def steps_recorded(self) -> int:
        return max(0, self._count - self.depth)

    def _expand(self, block: np.ndarray) -> np.ndarray:
        if self.depth == self.net_rows:
            return block
        return np.repeat(block, self._repeats, axis=-2)

    def canvas(self, t: int) -> np.ndarray:
        """Network input for the state observed before acting at step t."""
        if t < 0 or t + self.depth > self._count:
            raise ConfigurationError(f"state {t} outside recorded history")
        return self._expand(self._rows[t:t + self.depth])

    def canvas_latest(self) -> np.ndarray:
        return self.canvas(self.steps_recorded)

    def batch_pair(self, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(S_t, S_{t+1}) canvases for a vector of step indices."""
        ts = np.asarray(ts, dtype=np.int64)
        if ts.size and ts.max() + 1 + self.depth > self._count:
            raise ConfigurationError("batch reaches past recorded history")
        idx = ts[:, None] + np.arange(self.depth + 1)[None, :]
        block = self._rows[idx]  # (B, depth + 1, n_bins)
        return self._expand(block[:, :-1]), self._expand(block[:, 1:])

    def state_dict(self) -> dict:
        return {"rows": self._rows[:self._count].copy()}

    def load_state_dict(self, d: dict) -> None:
        rows = d["rows"]
        self._rows = rows.copy()
        self._count = rows.shape[0]


@dataclass
class Experience:
    """One stored transition, materialized from the row history."""

    step: int
    freq_idx: int
    spread_idx: int
    reward_freq: float
    reward_spread: float
    state: np.ndarray
    next_state: np.ndarray


class ReplayMemory:
    """FIFO ring of transitions with uniform no-replacement sampling."""

    def __init__(self, capacity: int = 1000):
        if capacity < 1:
            raise ConfigurationError("replay capacity must be >= 1")
        self.capacity = int(capacity)
        self._data = np.zeros((self.capacity, 5))
        self._size = 0
        self._next = 0

    def __len__(self) -> int:
        return self._size

    def push(self, step: int, freq_idx: int, spread_idx: int,
             reward_freq: float, reward_spread: float) -> None:
        self._data[self._next] = (step, freq_idx, spread_idx,
                                  reward_freq, reward_spread)
        self._next = (self._next + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator):
        """Uniform sample without replacement within the mini-batch.

        Returns (steps, freq_idx, spread_idx, r_f, r_q) arrays.
        """
        if batch_size > self._size:
            raise ConfigurationError("not enough stored experience")
        pick = rng.choice(self._size, size=batch_size, replace=False)
        rows = self._data[pick]
        return (rows[:, 0].astype(np.int64), rows[:, 1].astype(np.int64),
                rows[:, 2].astype(np.int64), rows[:, 3], rows[:, 4])

    def experiences(self, history: RowHistory) -> list[Experience]:
        """Materialized view of the stored transitions (test/debug aid)."""
        out = []
        for i in range(self._size):
            t, fi, qi, rf, rq = self._data[i]
            t = int(t)
            out.append(Experience(t, int(fi), int(qi), rf, rq,
                                  history.canvas(t), history.canvas(t + 1)))
        return out

    def state_dict(self) -> dict:
        return {
            "data": self._data.copy(),
            "size": self._size,
            "next": self._next,
        }

    def load_state_dict(self, d: dict) -> None:
        self._data = d["data"].copy()
        self._size = int(d["size"])
        self._next = int(d["next"])
