"""Physical-layer simulation: band plan, sensing, SJNR, throughput.

One ``SpectrumEnv`` instance owns a jammer, advances one sensing
interval per ``step``, and produces the spectrum waterfall the agents
observe. Sensed bin values are absolute powers in dBm (10 log10 of the
integrated power per bin); the waterfall row order is oldest first.

Slot mechanics: all randomness of a slot (jammer placement, shadowing
draws) is fixed before the action applies, so a per-slot exhaustive
search over actions sees exactly the condition the agent faced. The
taken action only influences the slot itself when the jammer is
reactive with zero tracking latency, in which case a detected
transmission is hit within its own slot.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import jammer as jm
from . import rewards
from .channel import ChannelModel, free_space_loss_db
from .errors import ConfigurationError
from .psd import RaisedCosinePsd
from .units import db_to_lin, dbm_to_watts, watts_to_dbm


@dataclass
class BandPlan:
    """Usable band, channelization, and sensing resolution."""

    f_low_hz: float = 800e6
    f_high_hz: float = 820e6
    num_channels: int = 10
    sample_resolution_hz: float = 0.1e6

    def __post_init__(self):
        if self.f_low_hz >= self.f_high_hz:
            raise ConfigurationError("band limits inverted")
        bins = self.width_hz / self.sample_resolution_hz
        if abs(bins - round(bins)) > 1e-9:
            raise ConfigurationError(
                "band width must be an integer number of sample bins")

    @property
    def width_hz(self) -> float:
        return self.f_high_hz - self.f_low_hz

    @property
    def bin_count(self) -> int:
        return int(round(self.width_hz / self.sample_resolution_hz))

    @property
    def bin_edges_hz(self) -> np.ndarray:
        return self.f_low_hz + self.sample_resolution_hz * np.arange(
            self.bin_count + 1)

    @property
    def channel_centers_hz(self) -> np.ndarray:
        """Centers of the non-overlapping channels (801, 803, ... MHz
        for the default plan)."""
        spacing = self.width_hz / self.num_channels
        return self.f_low_hz + spacing * (np.arange(self.num_channels) + 0.5)


@dataclass
class TransmitterConfig:
    position_m: tuple[float, float, float] = (0.0, 0.0, 0.0)
    max_power_w: float = 0.2
    base_band_hz: float = 0.5e6
    spreading_factors: tuple[int, ...] = (1, 2, 4, 8, 16, 32)
    rolloff: float = 0.6

    def __post_init__(self):
        sfs = tuple(self.spreading_factors)
        if not sfs or any(q <= 0 for q in sfs) or list(sfs) != sorted(sfs):
            raise ConfigurationError(
                "spreading factors must be positive and ascending")
        if not (0.0 <= self.rolloff <= 1.0):
            raise ConfigurationError("roll-off must lie in [0, 1]")
        self.spreading_factors = sfs


@dataclass
class NoiseConfig:
    """Thermal noise floor plus receiver noise figure."""

    psd_dbm_hz: float = -174.0
    noise_figure_db: float = 6.0

    @property
    def density_w_hz(self) -> float:
        return float(dbm_to_watts(self.psd_dbm_hz + self.noise_figure_db))


@dataclass
class LinkBudget:
    """Linear gains and noise for one slot."""

    gain_user: np.ndarray       # per channel center, tx -> rx
    gain_jammer: float          # jammer -> rx at the jam emission center
    gain_user_jammer: np.ndarray  # per channel center, tx -> jammer
    noise_density_w_hz: float
    jammer_noise_w: float


def synthesize_user_psd(freq_idx: int, spread_idx: int, band: BandPlan,
                        tx: TransmitterConfig) -> RaisedCosinePsd:
    """Transmit PSD for an action: raised-cosine mask of width b_u * q,
    peak density scaled by 1/q, total power equal to the transmit power."""
    if not (0 <= freq_idx < band.num_channels):
        raise ConfigurationError(f"frequency index {freq_idx} out of range")
    if not (0 <= spread_idx < len(tx.spreading_factors)):
        raise ConfigurationError(f"spreading index {spread_idx} out of range")
    q = tx.spreading_factors[spread_idx]
    return RaisedCosinePsd(
        center_hz=float(band.channel_centers_hz[freq_idx]),
        width_hz=tx.base_band_hz * q,
        rolloff=tx.rolloff,
        total_power_w=tx.max_power_w,
    )


def validate_action(freq_idx: int, spread_idx: int, band: BandPlan,
                    tx: TransmitterConfig) -> tuple[bool, str]:
    """An action is valid when its occupied width fits inside the band.

    Invalid actions stay selectable; the environment clips their
    integration support to the band and flags them in metrics.
    """
    psd = synthesize_user_psd(freq_idx, spread_idx, band, tx)
    lo, hi = psd.support
    if lo >= band.f_low_hz and hi <= band.f_high_hz:
        return True, "ok"
    return False, "occupied width extends past a band edge"


def transmission_rate(sjnr_linear: float, base_band_hz: float,
                      threshold_linear: float) -> float:
    """Shannon rate over the base band, zero below the demod threshold."""
    if sjnr_linear < 0:
        raise ConfigurationError("SJNR must be nonnegative")
    if sjnr_linear < threshold_linear:
        return 0.0
    return base_band_hz * np.log2(1.0 + sjnr_linear)


@dataclass
class SlotContext:
    """Everything about one slot that is fixed before the action."""

    jam_label: str
    jam_blocks: list
    budget: LinkBudget
    jam_bins_w: np.ndarray        # per sensing bin, unit jammer gain
    jam_overlap_w: np.ndarray     # (N, M) jam power inside each action span
    sjnr: np.ndarray              # (N, M) linear, under this slot's emission
    sjnr_if_detected: np.ndarray  # (N, M) linear, tracking hits same slot
    detected: np.ndarray          # (N, M) bool
    rate: np.ndarray              # (N, M) bits/s including detection outcome
    nojam_rate_by_q: np.ndarray   # (M,) best no-jamming rate per factor
    c_max: float
    best_action: tuple[int, int]


class SpectrumEnv:
    """Band + transmitter + jammer, stepped one sensing interval at a time."""

    def __init__(self, band: BandPlan, tx: TransmitterConfig,
                 receiver_position_m, channel: ChannelModel,
                 noise: NoiseConfig, jammer_config: jm.JammerConfig,
                 demod_threshold_db: float = 3.0,
                 sensing_interval_s: float = 0.01,
                 history_rows: int = 200,
                 reward_eta: float = 0.2,
                 reward_kappa: float = 0.2,
                 seed: int = 0):
        self.band = band
        self.tx = tx
        self.rx_pos = np.asarray(receiver_position_m, dtype=float)
        self.channel = channel
        self.noise = noise
        self.jammer_config = jammer_config
        self.beta_lin = float(db_to_lin(demod_threshold_db))
        self.demod_threshold_db = demod_threshold_db
        self.dt = sensing_interval_s
        self.history_rows = int(history_rows)
        self.eta = reward_eta
        self.kappa = reward_kappa
        self.seed = seed

        self.n_freq = band.num_channels
        self.n_spread = len(tx.spreading_factors)
        self._precompute_action_tables()
        self.reset(seed)

    # -- setup ---------------------------------------------------------------

    def _precompute_action_tables(self):
        band, tx = self.band, self.tx
        nf, ns = self.n_freq, self.n_spread
        edges = band.bin_edges_hz
        self.user_bins_w = np.zeros((nf, ns, band.bin_count))
        # Despreading interval (receiver side): nominal occupied width,
        # regardless of band edges. Transmit power, in contrast, exists
        # only inside the band, so the numerator integral is clipped.
        self.span_lo = np.zeros((nf, ns))
        self.span_hi = np.zeros((nf, ns))
        self.num_int_w = np.zeros((nf, ns))
        self.action_valid = np.zeros((nf, ns), dtype=bool)
        self.peak_power_w = np.zeros(ns)
        for qi, q in enumerate(tx.spreading_factors):
            psd0 = RaisedCosinePsd(0.0, tx.base_band_hz * q, tx.rolloff,
                                   tx.max_power_w)
            self.peak_power_w[qi] = (psd0.peak_density_w_hz
                                     * band.sample_resolution_hz)
            for fi in range(nf):
                psd = synthesize_user_psd(fi, qi, band, tx)
                self.user_bins_w[fi, qi] = psd.bin_integrals(edges)
                lo, hi = psd.support
                self.span_lo[fi, qi] = lo
                self.span_hi[fi, qi] = hi
                self.num_int_w[fi, qi] = psd.band_power(
                    max(lo, band.f_low_hz), min(hi, band.f_high_hz))
                self.action_valid[fi, qi] = (lo >= band.f_low_hz
                                             and hi <= band.f_high_hz)
        self.spread_widths_hz = np.array(
            [tx.base_band_hz * q for q in tx.spreading_factors])
        self.gain_sf = np.array([float(q) for q in tx.spreading_factors])

    def reset(self, seed: int | None = None) -> np.ndarray:
        """Rebuild all run state; returns the initial waterfall (dBm)."""
        if seed is not None:
            self.seed = seed
        ss = np.random.SeedSequence(self.seed)
        shadow_ss, jam_ss = ss.spawn(2)
        self.shadow_rng = np.random.default_rng(shadow_ss)
        self.jammer = jm.Jammer(self.jammer_config, self.band.f_low_hz,
                                self.band.f_high_hz,
                                np.random.default_rng(jam_ss))
        self.t = 0
        self._ctx: SlotContext | None = None
        self.jammer_noise_w = (
            self.jammer_config.detection_noise_w
            if self.jammer_config.detection_noise_w is not None
            else self.noise.density_w_hz * self.tx.base_band_hz)
        # Pre-game canvas: the sensor listened for history_rows intervals
        # before the first transmission, with the world frozen at slot 0.
        ctx = self._slot_context()
        row = self._sense_row(ctx.jam_blocks, ctx.budget.gain_jammer,
                              user_bins=None, gain_user=0.0)
        self.waterfall = np.tile(row, (self.history_rows, 1))
        return self.waterfall.copy()

    # -- slot preparation ------------------------------------------------------

    def _gain_for(self, distance_m: float, freqs_hz, shadow_db: float):
        loss = np.array([free_space_loss_db(distance_m, f)
                         for f in np.atleast_1d(freqs_hz)])
        return db_to_lin(-(loss + shadow_db))

    def _slot_context(self) -> SlotContext:
        if self._ctx is not None:
            return self._ctx
        band = self.band
        centers = band.channel_centers_hz
        shadow_u = shadow_j = shadow_uj = 0.0
        if self.channel.shadowed:
            sigma = self.channel.shadow_sigma_db
            shadow_u = self.shadow_rng.normal(0.0, sigma)
            shadow_j = self.shadow_rng.normal(0.0, sigma)
            shadow_uj = self.shadow_rng.normal(0.0, sigma)

        jam_label, jam_blocks = self.jammer.emission()
        jam_pos = self.jammer.position()
        d_ur = np.linalg.norm(np.asarray(self.tx.position_m) - self.rx_pos)
        d_jr = np.linalg.norm(jam_pos - self.rx_pos)
        d_uj = np.linalg.norm(np.asarray(self.tx.position_m) - jam_pos)

        gain_user = self._gain_for(d_ur, centers, shadow_u)
        gain_uj = self._gain_for(d_uj, centers, shadow_uj)
        if jam_blocks:
            span = (min(b.lo_hz for b in jam_blocks),
                    max(b.hi_hz for b in jam_blocks))
            jam_center = 0.5 * (span[0] + span[1])
        else:
            jam_center = 0.5 * (band.f_low_hz + band.f_high_hz)
        gain_jam = float(self._gain_for(d_jr, jam_center, shadow_j)[0])

        budget = LinkBudget(
            gain_user=gain_user,
            gain_jammer=gain_jam,
            gain_user_jammer=gain_uj,
            noise_density_w_hz=self.noise.density_w_hz,
            jammer_noise_w=self.jammer_noise_w,
        )

        edges = band.bin_edges_hz
        jam_bins = np.zeros(band.bin_count)
        for b in jam_blocks:
            jam_bins += b.bin_integrals(edges)

        nf, ns = self.n_freq, self.n_spread
        jam_overlap = np.zeros((nf, ns))
        for b in jam_blocks:
            lo = np.maximum(self.span_lo, b.lo_hz)
            hi = np.minimum(self.span_hi, b.hi_hz)
            jam_overlap += np.maximum(0.0, hi - lo) * b.density_w_hz

        noise_int = budget.noise_density_w_hz * (self.span_hi - self.span_lo)
        numer = (gain_user[:, None] * self.gain_sf[None, :] * self.num_int_w)
        sjnr = numer / (noise_int + gain_jam * jam_overlap)

        # Counterfactual: a detected transmission draws tracking jamming
        # onto its own center (applies within the slot at zero latency).
        track_width = self.jammer_config.jam_bandwidth_hz
        track_density = self.jammer_config.power_w / track_width
        tlo = np.maximum(self.span_lo, centers[:, None] - track_width / 2)
        thi = np.minimum(self.span_hi, centers[:, None] + track_width / 2)
        track_overlap = np.maximum(0.0, thi - tlo) * track_density
        sjnr_detected = numer / (noise_int + gain_jam * track_overlap)

        detected = (gain_uj[:, None] * self.peak_power_w[None, :]
                    + budget.jammer_noise_w
                    >= self.jammer_config.detection_threshold_w)
        reactive = self.jammer_config.mode in (jm.REACTIVE_SWEEP,
                                               jm.REACTIVE_COMB)
        if not reactive:
            detected = np.zeros_like(detected)

        effective = sjnr.copy()
        if reactive and self.jammer_config.tracking_latency_slots == 0:
            effective = np.where(detected, sjnr_detected, sjnr)
        rate = np.where(effective >= self.beta_lin,
                        self.tx.base_band_hz * np.log2(1.0 + effective), 0.0)

        nojam_sjnr = numer / noise_int
        nojam_rate = np.where(nojam_sjnr >= self.beta_lin,
                              self.tx.base_band_hz * np.log2(1.0 + nojam_sjnr),
                              0.0)
        nojam_by_q = nojam_rate.max(axis=0)

        flat_idx = int(np.argmax(rate))  # first max: lowest (f, q) wins ties
        best = (flat_idx // ns, flat_idx % ns)
        ctx = SlotContext(
            jam_label=jam_label,
            jam_blocks=jam_blocks,
            budget=budget,
            jam_bins_w=jam_bins,
            jam_overlap_w=jam_overlap,
            sjnr=sjnr,
            sjnr_if_detected=sjnr_detected,
            detected=detected,
            rate=rate,
            nojam_rate_by_q=nojam_by_q,
            c_max=float(rate[best]),
            best_action=best,
        )
        self._ctx = ctx
        return ctx

    # -- public observation/oracle hooks ----------------------------------------

    def oracle_preview(self) -> tuple[float, tuple[int, int]]:
        """Best achievable rate this slot and the action achieving it."""
        ctx = self._slot_context()
        return ctx.c_max, ctx.best_action

    def action_rates(self) -> np.ndarray:
        """(N, M) per-action rates under this slot's frozen condition."""
        return self._slot_context().rate.copy()

    # -- stepping ----------------------------------------------------------------

    def _sense_row(self, jam_blocks, gain_jam, user_bins, gain_user,
                   jam_bins=None):
        band = self.band
        bins = np.full(band.bin_count,
                       self.noise.density_w_hz * band.sample_resolution_hz)
        if jam_blocks:
            if jam_bins is None:
                jam_bins = np.zeros(band.bin_count)
                for b in jam_blocks:
                    jam_bins += b.bin_integrals(band.bin_edges_hz)
            bins += gain_jam * jam_bins
        if user_bins is not None:
            bins = bins + gain_user * user_bins
        return watts_to_dbm(bins)

    def step(self, action: tuple[int, int]):
        """Execute one sensing interval.

        Returns (waterfall, r_f, r_q, info); the waterfall array is the
        environment's rolling view (copy it to persist).
        """
        fi, qi = int(action[0]), int(action[1])
        if not (0 <= fi < self.n_freq and 0 <= qi < self.n_spread):
            raise ConfigurationError(f"action ({fi}, {qi}) out of range")
        ctx = self._slot_context()
        reactive = self.jammer_config.mode in (jm.REACTIVE_SWEEP,
                                               jm.REACTIVE_COMB)
        detected = bool(ctx.detected[fi, qi])
        center = float(self.band.channel_centers_hz[fi])

        jam_label, jam_blocks = ctx.jam_label, ctx.jam_blocks
        jam_bins = ctx.jam_bins_w
        sjnr = float(ctx.sjnr[fi, qi])
        if reactive and detected:
            if self.jammer_config.tracking_latency_slots == 0:
                jam_label = jm.LABEL_TRACKING
                jam_blocks = self.jammer.tracking_blocks(center)
                jam_bins = None
                sjnr = float(ctx.sjnr_if_detected[fi, qi])
            else:
                self.jammer.record_detection(center)

        success = rewards.success_indicator(sjnr, self.beta_lin)
        rate = transmission_rate(sjnr, self.tx.base_band_hz, self.beta_lin)
        r_f = rewards.reward_frequency(sjnr, self.beta_lin, self.eta)
        r_q = rewards.reward_spread(
            rate, success, float(self.spread_widths_hz[qi]),
            self.eta, self.kappa, float(ctx.nojam_rate_by_q[qi]))

        row = self._sense_row(jam_blocks, ctx.budget.gain_jammer,
                              self.user_bins_w[fi, qi],
                              float(ctx.budget.gain_user[fi]),
                              jam_bins=jam_bins)
        self.waterfall[:-1] = self.waterfall[1:]
        self.waterfall[-1] = row

        info = {
            "step": self.t,
            "sjnr_db": 10.0 * np.log10(sjnr) if sjnr > 0 else -np.inf,
            "rate_bps": rate,
            "success": success,
            "c_max_bps": ctx.c_max,
            "best_action": ctx.best_action,
            "jam_mode": jam_label,
            "detected": detected,
            "clipped": not bool(self.action_valid[fi, qi]),
            "new_row_dbm": row,
        }

        self.jammer.advance(self.dt)
        self.t += 1
        self._ctx = None
        return self.waterfall, r_f, r_q, info

    # -- persistence ----------------------------------------------------------

    def export_waterfall(self, path) -> None:
        """Plain-text snapshot: header then one space-separated row per
        sensing interval (dBm values, oldest row first)."""
        header = (f"rows={self.history_rows} cols={self.band.bin_count} "
                  f"dt_s={self.dt} df_hz={self.band.sample_resolution_hz} "
                  f"f_low_hz={self.band.f_low_hz}")
        with open(path, "w", encoding="ascii") as fh:
            fh.write(header + "\n")
            for row in self.waterfall:
                fh.write(" ".join(repr(float(v)) for v in row) + "\n")

    def state_dict(self) -> dict:
        if self._ctx is not None:
            raise ConfigurationError(
                "checkpoint only between steps (slot already prepared)")
        return {
            "t": self.t,
            "seed": self.seed,
            "waterfall": self.waterfall.copy(),
            "jammer": self.jammer.state_dict(),
            "shadow_rng_state": self.shadow_rng.bit_generator.state,
        }

    def load_state_dict(self, d: dict) -> None:
        self.t = int(d["t"])
        self.seed = int(d["seed"])
        self.waterfall = d["waterfall"].copy()
        self.jammer.load_state_dict(d["jammer"])
        self.shadow_rng.bit_generator.state = d["shadow_rng_state"]
        self._ctx = None
