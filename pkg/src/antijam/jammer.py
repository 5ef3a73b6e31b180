"""Moving jammer models: reactive (tracking + sweep/comb), constant, random.

The reactive jammer patrols a straight segment, ping-ponging between the
endpoints at constant speed. Each slot it either emits tracking jamming
(if a transmission was detected ``tracking_latency_slots`` slots ago,
centered on the detected signal) or its configured indiscriminate
waveform. Constant and random jammers ignore detection entirely.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .psd import FlatBlockPsd
from .units import dbm_to_watts

REACTIVE_SWEEP = "reactive_sweep"
REACTIVE_COMB = "reactive_comb"
CONSTANT = "constant"
RANDOM = "random"
OFF = "off"

MODES = (REACTIVE_SWEEP, REACTIVE_COMB, CONSTANT, RANDOM, OFF)

# Per-slot emission labels written to metrics.
LABEL_TRACKING = "tracking"
LABEL_SWEEP = "sweep"
LABEL_COMB = "comb"
LABEL_CONSTANT = "constant"
LABEL_RANDOM = "random"
LABEL_OFF = "off"


def detect(peak_power_w: float, gain_uj: float, noise_w: float,
           threshold_w: float) -> bool:
    """Detection rule: received peak power plus noise meets the threshold."""
    return gain_uj * peak_power_w + noise_w >= threshold_w


@dataclass
class JammerConfig:
    patrol_start_m: tuple[float, float, float] = (0.0, 0.0, 300.0)
    patrol_end_m: tuple[float, float, float] = (1000.0, 1000.0, 500.0)
    speed_mps: float = 20.0
    power_dbm: float = 60.0
    detection_threshold_dbm: float = -70.0
    detection_noise_w: float | None = None  # None -> receiver noise over b_u
    mode: str = REACTIVE_SWEEP
    sweep_period_slots: int = 10
    sweep_dwell_slots: int = 1
    jam_bandwidth_hz: float = 2e6  # sweep block and tracking block width
    comb_tone_count: int = 3
    comb_tone_width_hz: float = 1e6
    constant_bandwidth_hz: float = 10e6
    constant_center_hz: float | None = None  # None -> band center
    random_bandwidth_hz: float = 2e6
    tracking_latency_slots: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown jammer mode {self.mode!r}")
        if self.speed_mps <= 0:
            raise ConfigurationError("jammer speed must be positive")
        if self.sweep_period_slots < 1 or self.sweep_dwell_slots < 1:
            raise ConfigurationError("sweep period/dwell must be >= 1")
        if self.tracking_latency_slots < 0:
            raise ConfigurationError("tracking latency must be >= 0")

    @property
    def power_w(self) -> float:
        return float(dbm_to_watts(self.power_dbm))

    @property
    def detection_threshold_w(self) -> float:
        return float(dbm_to_watts(self.detection_threshold_dbm))


@dataclass
class JammerState:
    slot: int = 0
    elapsed_s: float = 0.0
    pending_tracking: list = field(default_factory=list)  # (due_slot, center)
    random_center_hz: float = 0.0


class Jammer:
    """One jammer instance owned by its environment."""

    def __init__(self, config: JammerConfig, band_lo_hz: float,
                 band_hi_hz: float, rng: np.random.Generator):
        self.config = config
        self.band_lo = float(band_lo_hz)
        self.band_hi = float(band_hi_hz)
        self.rng = rng
        self.state = JammerState()
        if config.mode == CONSTANT and config.constant_bandwidth_hz > (
                self.band_hi - self.band_lo):
            raise ConfigurationError("constant jam bandwidth exceeds the band")
        if config.mode == REACTIVE_COMB:
            width = config.comb_tone_count * config.comb_tone_width_hz
            if width > self.band_hi - self.band_lo:
                raise ConfigurationError("comb tones do not fit in the band")
        self.begin_slot()

    # -- geometry -----------------------------------------------------------

    @property
    def patrol_length_m(self) -> float:
        a = np.asarray(self.config.patrol_start_m, dtype=float)
        b = np.asarray(self.config.patrol_end_m, dtype=float)
        return float(np.linalg.norm(b - a))

    def position(self) -> np.ndarray:
        """Current position on the patrol segment (ping-pong motion)."""
        a = np.asarray(self.config.patrol_start_m, dtype=float)
        b = np.asarray(self.config.patrol_end_m, dtype=float)
        length = self.patrol_length_m
        if length == 0.0:
            return a
        s = self.config.speed_mps * self.state.elapsed_s
        phase = s % (2.0 * length)
        along = phase if phase <= length else 2.0 * length - phase
        return a + (b - a) * (along / length)

    # -- per-slot emissions ---------------------------------------------------

    def begin_slot(self) -> None:
        """Draw this slot's randomness (random-block center)."""
        if self.config.mode == RANDOM:
            half = self.config.random_bandwidth_hz / 2.0
            self.state.random_center_hz = float(self.rng.uniform(
                self.band_lo + half, self.band_hi - half))

    def sweep_cursor_hz(self) -> float:
        step = (self.band_hi - self.band_lo) / self.config.sweep_period_slots
        idx = (self.state.slot // self.config.sweep_dwell_slots) \
            % self.config.sweep_period_slots
        return self.band_lo + idx * step

    def tracking_blocks(self, center_hz: float) -> list[FlatBlockPsd]:
        width = self.config.jam_bandwidth_hz
        density = self.config.power_w / width
        return [FlatBlockPsd(center_hz - width / 2, center_hz + width / 2,
                             density)]

    def indiscriminate_blocks(self) -> tuple[str, list[FlatBlockPsd]]:
        cfg = self.config
        if cfg.mode == OFF:
            return LABEL_OFF, []
        if cfg.mode in (REACTIVE_SWEEP,):
            lo = self.sweep_cursor_hz()
            width = cfg.jam_bandwidth_hz
            return LABEL_SWEEP, [FlatBlockPsd(lo, lo + width,
                                              cfg.power_w / width)]
        if cfg.mode == REACTIVE_COMB:
            count = cfg.comb_tone_count
            width = cfg.comb_tone_width_hz
            spacing = (self.band_hi - self.band_lo) / count
            density = cfg.power_w / (count * width)
            blocks = []
            for i in range(count):
                center = self.band_lo + (i + 0.5) * spacing
                blocks.append(FlatBlockPsd(center - width / 2,
                                           center + width / 2, density))
            return LABEL_COMB, blocks
        if cfg.mode == CONSTANT:
            center = cfg.constant_center_hz
            if center is None:
                center = (self.band_lo + self.band_hi) / 2.0
            width = cfg.constant_bandwidth_hz
            return LABEL_CONSTANT, [FlatBlockPsd(center - width / 2,
                                                 center + width / 2,
                                                 cfg.power_w / width)]
        if cfg.mode == RANDOM:
            width = cfg.random_bandwidth_hz
            center = self.state.random_center_hz
            return LABEL_RANDOM, [FlatBlockPsd(center - width / 2,
                                               center + width / 2,
                                               cfg.power_w / width)]
        raise ConfigurationError(f"unhandled mode {cfg.mode}")

    def emission(self) -> tuple[str, list[FlatBlockPsd]]:
        """This slot's emission, honoring scheduled tracking events.

        Exactly one source is active per slot: a due tracking event
        replaces the indiscriminate waveform.
        """
        due = [c for (s, c) in self.state.pending_tracking
               if s == self.state.slot]
        if due and self.config.mode in (REACTIVE_SWEEP, REACTIVE_COMB):
            return LABEL_TRACKING, self.tracking_blocks(due[-1])
        return self.indiscriminate_blocks()

    def record_detection(self, center_hz: float) -> None:
        """Schedule tracking jamming at the configured latency.

        Zero-latency configurations take effect within the current slot;
        the environment applies that substitution directly, so only
        future slots are queued here.
        """
        lat = self.config.tracking_latency_slots
        if lat >= 1:
            self.state.pending_tracking.append(
                (self.state.slot + lat, float(center_hz)))

    def advance(self, dt_s: float) -> None:
        """Move one sensing interval forward."""
        self.state.slot += 1
        self.state.elapsed_s += dt_s
        self.state.pending_tracking = [
            (s, c) for (s, c) in self.state.pending_tracking
            if s >= self.state.slot]
        self.begin_slot()

    # -- checkpointing --------------------------------------------------------

    def state_dict(self) -> dict:
        return {
            "slot": self.state.slot,
            "elapsed_s": self.state.elapsed_s,
            "pending_tracking": [list(e) for e in self.state.pending_tracking],
            "random_center_hz": self.state.random_center_hz,
            "rng_state": self.rng.bit_generator.state,
        }

    def load_state_dict(self, d: dict) -> None:
        self.state.slot = int(d["slot"])
        self.state.elapsed_s = float(d["elapsed_s"])
        self.state.pending_tracking = [tuple(e) for e in d["pending_tracking"]]
        self.state.random_center_hz = float(d["random_center_hz"])
        self.rng.bit_generator.state = d["rng_state"]
