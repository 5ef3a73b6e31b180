"""Decibel/linear conversions.

Every dB <-> linear conversion in the package goes through here so there
is exactly one sign/offset convention: powers are watts internally, dBm
at the configuration surface, positions are meters.
"""

from __future__ import annotations

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s


def db_to_lin(db):
    """Power ratio from dB."""
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def lin_to_db(ratio):
    """dB from a (positive) power ratio."""
    return 10.0 * np.log10(ratio)


def dbm_to_watts(dbm):
    """Absolute power: dBm -> W."""
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(watts):
    """Absolute power: W -> dBm."""
    return 10.0 * np.log10(watts) + 30.0
