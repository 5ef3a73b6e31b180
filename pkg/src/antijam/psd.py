"""Power spectral density shapes for the transmitted waveform.

The transmit spectrum is a raised-cosine mask over an occupied width
``b_spread = b_u * q``: spreading by q widens the support by q and
scales the density down by 1/q, keeping total power constant. Bin
integrals use the closed-form antiderivative of the mask, which is
exact; validation tests integrate numerically instead so the two routes
stay independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class RaisedCosinePsd:
    """Raised-cosine PSD centered on ``center_hz``.

    The mask occupies exactly ``width_hz`` (flat core plus cosine
    roll-off tapering to zero at the edges) and integrates to
    ``total_power_w``.
    """

    center_hz: float
    width_hz: float
    rolloff: float
    total_power_w: float

    def __post_init__(self):
        if not (0.0 <= self.rolloff <= 1.0):
            raise ConfigurationError(f"roll-off {self.rolloff} outside [0, 1]")
        if self.width_hz <= 0 or self.total_power_w < 0:
            raise ConfigurationError("width and power must be positive")

    @property
    def nyquist_width_hz(self) -> float:
        """Width of the equivalent rectangular (brick-wall) spectrum."""
        return self.width_hz / (1.0 + self.rolloff)

    @property
    def peak_density_w_hz(self) -> float:
        return self.total_power_w / self.nyquist_width_hz

    @property
    def support(self) -> tuple[float, float]:
        half = self.width_hz / 2.0
        return (self.center_hz - half, self.center_hz + half)

    def density(self, freq_hz) -> np.ndarray:
        """PSD value in W/Hz at the given frequencies."""
        f = np.abs(np.asarray(freq_hz, dtype=float) - self.center_hz)
        w0 = self.nyquist_width_hz
        f1 = (1.0 - self.rolloff) * w0 / 2.0
        f2 = (1.0 + self.rolloff) * w0 / 2.0
        out = np.zeros_like(f)
        out[f <= f1] = 1.0
        if self.rolloff > 0:
            ramp = (f > f1) & (f <= f2)
            out[ramp] = 0.5 * (1.0 + np.cos(
                np.pi / (self.rolloff * w0) * (f[ramp] - f1)))
        return out * self.peak_density_w_hz

    def cumulative(self, freq_hz) -> np.ndarray:
        """Integral of the PSD from -inf to freq_hz, in watts. Exact."""
        x = np.asarray(freq_hz, dtype=float) - self.center_hz
        w0 = self.nyquist_width_hz
        f1 = (1.0 - self.rolloff) * w0 / 2.0
        f2 = (1.0 + self.rolloff) * w0 / 2.0
        ax = np.abs(x)
        # G(a) = integral of the unit-peak mask over [0, a]
        g = np.where(ax <= f1, ax, 0.0)
        if self.rolloff > 0:
            beta_w = self.rolloff * w0
            a = np.clip(ax, f1, f2) - f1
            ramp_part = 0.5 * (a + beta_w / np.pi * np.sin(np.pi * a / beta_w))
            g = np.where(ax > f1, f1 + ramp_part, g)
        half = w0 / 2.0  # total one-sided integral of the unit-peak mask
        g = np.minimum(g, half)
        cum = np.where(x >= 0, half + g, half - g)
        return cum * self.peak_density_w_hz

    def band_power(self, lo_hz, hi_hz) -> np.ndarray:
        """Power falling inside [lo, hi], in watts. Exact."""
        return self.cumulative(hi_hz) - self.cumulative(lo_hz)

    def bin_integrals(self, edges_hz: np.ndarray) -> np.ndarray:
        """Power per bin for consecutive bin edges (len(edges) - 1 bins)."""
        cum = self.cumulative(edges_hz)
        return np.diff(cum)


@dataclass(frozen=True)
class FlatBlockPsd:
    """Rectangular PSD block: constant density over [lo, hi]."""

    lo_hz: float
    hi_hz: float
    density_w_hz: float

    @property
    def total_power_w(self) -> float:
        return self.density_w_hz * (self.hi_hz - self.lo_hz)

    def band_power(self, lo_hz, hi_hz) -> float:
        overlap = max(0.0, min(self.hi_hz, hi_hz) - max(self.lo_hz, lo_hz))
        return self.density_w_hz * overlap

    def bin_integrals(self, edges_hz: np.ndarray) -> np.ndarray:
        clipped = np.clip(edges_hz, self.lo_hz, self.hi_hz)
        return np.diff(clipped) * self.density_w_hz
