"""Propagation: free-space path loss with optional log-normal shadowing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .units import SPEED_OF_LIGHT, db_to_lin


FSPL = "fspl"
FSPL_SHADOW = "fspl_shadow"


@dataclass
class ChannelModel:
    """Channel variant plus shadowing spread.

    Shadowing is a zero-mean normal draw in dB (log-normal in linear
    units) added to the free-space loss; sigma defaults to 4 dB, within
    the 2.7-5.6 dB span typical of rural-to-urban measurements.
    """

    variant: str = FSPL
    shadow_sigma_db: float = 4.0

    def __post_init__(self):
        if self.variant not in (FSPL, FSPL_SHADOW):
            raise ConfigurationError(f"unknown channel variant {self.variant!r}")
        if self.variant == FSPL_SHADOW and not (0.0 < self.shadow_sigma_db <= 20.0):
            raise ConfigurationError("shadow sigma out of range")

    @property
    def shadowed(self) -> bool:
        return self.variant == FSPL_SHADOW


def free_space_loss_db(distance_m: float, freq_hz: float) -> float:
    """Standard free-space path loss: 20log10(4*pi*d*f/c)."""
    if distance_m <= 0:
        raise ConfigurationError("distance must be positive")
    return 20.0 * np.log10(4.0 * np.pi * distance_m * freq_hz / SPEED_OF_LIGHT)


def path_loss_db(distance_m: float, freq_hz: float, model: ChannelModel,
                 rng: np.random.Generator | None = None) -> float:
    """Path loss in dB; draws one shadowing sample when enabled."""
    loss = free_space_loss_db(distance_m, freq_hz)
    if model.shadowed:
        if rng is None:
            raise ConfigurationError("shadowed model needs an rng stream")
        loss += rng.normal(0.0, model.shadow_sigma_db)
    return float(loss)


def gain_linear(distance_m: float, freq_hz: float, model: ChannelModel,
                rng: np.random.Generator | None = None) -> float:
    """Linear power gain for one link (reciprocal of path loss)."""
    return float(db_to_lin(-path_loss_db(distance_m, freq_hz, model, rng)))
