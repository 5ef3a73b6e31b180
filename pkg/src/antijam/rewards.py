"""Reward functions for the two decision heads.

The two heads share the same success indicator, so a slot is a joint
success or a joint failure for both: the frequency head is paid a flat
bonus on success, and the spreading head is paid a rate-proportional
bonus minus a term in the reciprocal of the occupied bandwidth.
"""

from __future__ import annotations


def success_indicator(sjnr_linear: float, threshold_linear: float) -> int:
    """1 when the link closes (SJNR at or above the demod threshold)."""
    return 1 if sjnr_linear >= threshold_linear else 0


def reward_frequency(sjnr_linear: float, threshold_linear: float,
                     eta: float) -> float:
    """eta on success, zero on failure."""
    return eta * success_indicator(sjnr_linear, threshold_linear)


def reward_spread(rate_bps: float, success: int, spread_bandwidth_hz: float,
                  eta: float, kappa: float,
                  reference_rate_bps: float) -> float:
    """Rate-weighted success bonus minus the bandwidth-reciprocal term.

    The achieved rate is normalized by the best no-jamming rate at the
    same spreading factor so the bonus is O(1); the bandwidth term uses
    the nominal occupied width in MHz.
    """
    if reference_rate_bps > 0.0:
        normalized = rate_bps / reference_rate_bps
    else:
        normalized = 0.0
    width_mhz = spread_bandwidth_hz / 1e6
    return eta * normalized * success - kappa / width_mhz
