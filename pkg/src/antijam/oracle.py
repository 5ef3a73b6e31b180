"""Ground-truth evaluation: per-slot exhaustive search and normalized
throughput.

The per-slot search freezes the slot's jamming waveform and channel
draws, scores every (frequency, spreading) pair under that condition
(including the tracking consequence a detectable pair would trigger
when the jammer reacts within the slot), and returns the maximum. Slots
where nothing can be transmitted (best rate zero) are excluded from
throughput ratios rather than defined.
"""

from __future__ import annotations

from collections import deque

import numpy as np


def max_rate(env) -> tuple[float, tuple[int, int]]:
    """Best achievable rate for the upcoming slot and its action.

    Ties resolve to the lowest (frequency, spreading) pair
    lexicographically.
    """
    return env.oracle_preview()


def normalized_throughput(actual_rates, max_rates) -> float:
    """Ratio of delivered to best-possible data over a window.

    Slots with a zero best rate are excluded from both sums; a window
    consisting only of such slots counts as 1 (nothing was achievable,
    nothing was missed).
    """
    actual = np.asarray(actual_rates, dtype=float)
    best = np.asarray(max_rates, dtype=float)
    if actual.shape != best.shape:
        raise ValueError("rate vectors must have equal length")
    mask = best > 0.0
    total_best = best[mask].sum()
    if total_best == 0.0:
        return 1.0
    return float(actual[mask].sum() / total_best)


class ThroughputWindow:
    """Sliding-window normalized throughput, updated per slot."""

    def __init__(self, window: int = 200):
        if window < 1:
            raise ValueError("window must be >= 1")
        self.window = window
        self._pairs = deque()
        self._sum_actual = 0.0
        self._sum_best = 0.0

    def push(self, actual_bps: float, best_bps: float) -> float:
        if best_bps > 0.0:
            self._sum_actual += actual_bps
            self._sum_best += best_bps
        self._pairs.append((actual_bps, best_bps))
        if len(self._pairs) > self.window:
            old_actual, old_best = self._pairs.popleft()
            if old_best > 0.0:
                self._sum_actual -= old_actual
                self._sum_best -= old_best
        return self.value()

    def value(self) -> float:
        if self._sum_best <= 0.0:
            return 1.0
        return self._sum_actual / self._sum_best

    def state_dict(self) -> dict:
        return {
            "window": self.window,
            "pairs": [list(p) for p in self._pairs],
        }

    def load_state_dict(self, d: dict) -> None:
        self.window = int(d["window"])
        self._pairs = deque()
        self._sum_actual = 0.0
        self._sum_best = 0.0
        for actual, best in d["pairs"]:
            self.push(float(actual), float(best))
