"""Per-step metrics persistence.

Append-only tab-separated text with a version header; floats are
written with shortest round-trip repr so replaying a run reproduces the
file byte for byte.
"""

from __future__ import annotations

import math

import numpy as np

SCHEMA_VERSION = "antijam-metrics v1"
COLUMNS = (
    "step", "freq_idx", "spread_idx", "sjnr_db", "rate_bps", "c_max_bps",
    "r_f", "r_q", "loss_f", "loss_q", "thr_norm", "jam_mode", "detected",
    "clipped",
)
_FLOAT_COLUMNS = ("sjnr_db", "rate_bps", "c_max_bps", "r_f", "r_q",
                  "loss_f", "loss_q", "thr_norm")


def format_value(column: str, value) -> str:
    if column in ("step", "freq_idx", "spread_idx", "detected", "clipped"):
        return str(int(value))
    if column == "jam_mode":
        return str(value)
    v = float(value)
    if math.isnan(v):
        return "nan"
    return repr(v)


class MetricsWriter:
    def __init__(self, path, append: bool = False):
        self.path = path
        mode = "a" if append else "w"
        self._fh = open(path, mode, encoding="ascii")
        if not append:
            self._fh.write(f"# {SCHEMA_VERSION}\n")
            self._fh.write("\t".join(COLUMNS) + "\n")

    def write_row(self, row: dict) -> None:
        self._fh.write("\t".join(format_value(c, row[c]) for c in COLUMNS)
                       + "\n")

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_metrics(path) -> dict:
    """Parse a metrics file into column arrays."""
    with open(path, encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != f"# {SCHEMA_VERSION}":
            raise ValueError(f"unsupported metrics header {header!r}")
        columns = fh.readline().strip().split("\t")
        raw = [line.rstrip("\n").split("\t") for line in fh if line.strip()]
    out = {}
    for ci, name in enumerate(columns):
        vals = [r[ci] for r in raw]
        if name in ("step", "freq_idx", "spread_idx", "detected", "clipped"):
            out[name] = np.array([int(v) for v in vals], dtype=np.int64)
        elif name == "jam_mode":
            out[name] = np.array(vals)
        else:
            out[name] = np.array([float(v) for v in vals])
    return out
