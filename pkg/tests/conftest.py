"""Shared test setup.

BLAS thread counts are pinned to one before numpy loads anywhere so
that matrix products are bit-reproducible across runs and so parallel
run workers do not oversubscribe the machine.
"""

import os

for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import numpy as np  # noqa: E402
import pytest  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
