"""Free-space loss values and shadowing statistics."""

import numpy as np
import pytest

from antijam.channel import (
    FSPL_SHADOW,
    ChannelModel,
    free_space_loss_db,
    gain_linear,
    path_loss_db,
)
from antijam.errors import ConfigurationError
from antijam.units import SPEED_OF_LIGHT


class TestFreeSpaceLoss:
    def test_unit_argument_gives_zero_db(self):
        # Choose f so that 4*pi*d*f/c = 1 at d = 1 m.
        f = SPEED_OF_LIGHT / (4.0 * np.pi)
        assert free_space_loss_db(1.0, f) == pytest.approx(0.0, abs=1e-12)

    def test_1km_810mhz_hand_value(self):
        # 20log10(4*pi*1000*810e6/c) evaluated by hand: ~90.61 dB.
        loss = free_space_loss_db(1000.0, 810e6)
        assert loss == pytest.approx(90.61, abs=0.01)

    def test_zero_distance_rejected(self):
        with pytest.raises(ConfigurationError):
            free_space_loss_db(0.0, 810e6)

    def test_gain_is_reciprocal(self):
        loss = free_space_loss_db(1000.0, 810e6)
        g = gain_linear(1000.0, 810e6, ChannelModel())
        assert g == pytest.approx(10 ** (-loss / 10), rel=1e-12)


class TestShadowing:
    def test_sample_mean_near_zero(self):
        model = ChannelModel(FSPL_SHADOW, shadow_sigma_db=4.0)
        rng = np.random.default_rng(7)
        base = free_space_loss_db(500.0, 810e6)
        draws = np.array([path_loss_db(500.0, 810e6, model, rng) - base
                          for _ in range(100_000)])
        assert abs(draws.mean()) < 0.1
        assert draws.std() == pytest.approx(4.0, abs=0.1)

    def test_needs_rng(self):
        with pytest.raises(ConfigurationError):
            path_loss_db(10.0, 810e6, ChannelModel(FSPL_SHADOW))

    def test_sigma_validated(self):
        with pytest.raises(ConfigurationError):
            ChannelModel(FSPL_SHADOW, shadow_sigma_db=0.0)
