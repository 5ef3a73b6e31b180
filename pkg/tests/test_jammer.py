"""Jammer behavior: detection rule, motion, modes, energy accounting."""

import numpy as np
import pytest

from antijam import jammer as jm
from antijam.channel import ChannelModel, gain_linear
from antijam.units import dbm_to_watts


BAND = (800e6, 820e6)


def make_jammer(rng=None, **overrides):
    cfg = jm.JammerConfig(**overrides)
    return jm.Jammer(cfg, *BAND, rng or np.random.default_rng(0))


class TestDetect:
    def test_silent_user_not_detected(self):
        noise = 7.9e-15  # receiver-grade noise, far below -70 dBm
        assert not jm.detect(0.0, 1e-8, noise, dbm_to_watts(-70))

    def test_q1_at_300m_detected(self):
        # Peak sensed power of the unspread waveform: peak density x bin
        # width = 0.2 * 1.6 / 0.5 MHz * 0.1 MHz = 64 mW.
        p_peak = 0.2 * 1.6 / 0.5e6 * 0.1e6
        g = gain_linear(300.0, 810e6, ChannelModel())
        assert jm.detect(p_peak, g, 7.9e-15, dbm_to_watts(-70))

    def test_q32_at_300m_hidden(self):
        p_peak = 0.2 * 1.6 / 0.5e6 * 0.1e6 / 32.0
        g = gain_linear(300.0, 810e6, ChannelModel())
        assert not jm.detect(p_peak, g, 7.9e-15, dbm_to_watts(-70))


class TestMotion:
    def test_position_after_50s(self):
        j = make_jammer()
        for _ in range(5000):
            j.advance(0.01)
        pos = j.position()
        direction = np.array([1000.0, 1000.0, 200.0])
        direction /= np.linalg.norm(direction)
        expected = np.array([0.0, 0.0, 300.0]) + 1000.0 * direction
        assert np.allclose(pos, expected, atol=1e-6)

    def test_ping_pong_confined_to_segment(self):
        j = make_jammer(speed_mps=200.0)
        a = np.array(j.config.patrol_start_m, dtype=float)
        b = np.array(j.config.patrol_end_m, dtype=float)
        seg = b - a
        for _ in range(500):
            j.advance(0.1)
            rel = j.position() - a
            t = np.dot(rel, seg) / np.dot(seg, seg)
            assert -1e-9 <= t <= 1.0 + 1e-9
            assert np.linalg.norm(rel - t * seg) < 1e-6


class TestSweep:
    def test_cursor_advances_2mhz_per_slot(self):
        j = make_jammer()
        c0 = j.sweep_cursor_hz()
        j.advance(0.01)
        assert j.sweep_cursor_hz() - c0 == pytest.approx(2e6)

    def test_cursor_wraps(self):
        j = make_jammer()
        seen = set()
        for _ in range(30):
            seen.add(j.sweep_cursor_hz())
            j.advance(0.01)
        assert len(seen) == 10
        assert min(seen) == 800e6
        assert max(seen) == 818e6

    def test_dwell_slows_cursor(self):
        j = make_jammer(sweep_dwell_slots=3)
        cursors = []
        for _ in range(9):
            cursors.append(j.sweep_cursor_hz())
            j.advance(0.01)
        assert cursors[0] == cursors[1] == cursors[2]
        assert cursors[3] == cursors[0] + 2e6


class TestTrackingLatency:
    def test_detection_at_k_tracks_at_k_plus_1(self):
        j = make_jammer()
        label, _ = j.emission()
        assert label == jm.LABEL_SWEEP
        j.record_detection(807e6)
        label, _ = j.emission()  # same slot: still sweeping
        assert label == jm.LABEL_SWEEP
        j.advance(0.01)
        label, blocks = j.emission()
        assert label == jm.LABEL_TRACKING
        lo, hi = blocks[0].lo_hz, blocks[0].hi_hz
        assert lo < 807e6 < hi  # on-target by construction
        j.advance(0.01)
        label, _ = j.emission()
        assert label == jm.LABEL_SWEEP  # memoryless: no re-detection

    def test_zero_latency_queues_nothing(self):
        j = make_jammer(tracking_latency_slots=0)
        j.record_detection(807e6)
        assert j.state.pending_tracking == []


class TestEnergyAccounting:
    @pytest.mark.parametrize("kwargs,label", [
        ({}, jm.LABEL_SWEEP),
        ({"mode": jm.REACTIVE_COMB}, jm.LABEL_COMB),
        ({"mode": jm.CONSTANT}, jm.LABEL_CONSTANT),
        ({"mode": jm.RANDOM}, jm.LABEL_RANDOM),
    ])
    def test_integrated_power_equals_configured(self, kwargs, label):
        j = make_jammer(**kwargs)
        got_label, blocks = j.emission()
        assert got_label == label
        total = sum(b.total_power_w for b in blocks)
        assert total == pytest.approx(dbm_to_watts(60.0), rel=1e-3)

    def test_tracking_power(self):
        j = make_jammer()
        blocks = j.tracking_blocks(810e6)
        assert blocks[0].total_power_w == pytest.approx(1000.0, rel=1e-9)

    def test_mode_exclusivity(self):
        j = make_jammer()
        j.record_detection(805e6)
        j.advance(0.01)
        label, blocks = j.emission()
        assert label == jm.LABEL_TRACKING
        assert len(blocks) == 1


class TestConstantJammer:
    def test_always_on_and_placement_fixed(self):
        j = make_jammer(mode=jm.CONSTANT)
        first = j.emission()[1][0]
        for _ in range(5):
            j.advance(0.01)
            block = j.emission()[1][0]
            assert (block.lo_hz, block.hi_hz) == (first.lo_hz, first.hi_hz)
        assert first.hi_hz - first.lo_hz == pytest.approx(10e6)

    def test_ignores_detection(self):
        j = make_jammer(mode=jm.CONSTANT)
        j.record_detection(810e6)
        j.advance(0.01)
        assert j.emission()[0] == jm.LABEL_CONSTANT


class TestRandomJammer:
    def test_block_width_fixed(self):
        j = make_jammer(mode=jm.RANDOM)
        for _ in range(20):
            block = j.emission()[1][0]
            assert block.hi_hz - block.lo_hz == pytest.approx(2e6)
            j.advance(0.01)

    def test_same_seed_same_sequence(self):
        j1 = make_jammer(rng=np.random.default_rng(5), mode=jm.RANDOM)
        j2 = make_jammer(rng=np.random.default_rng(5), mode=jm.RANDOM)
        for _ in range(50):
            assert j1.emission()[1][0].lo_hz == j2.emission()[1][0].lo_hz
            j1.advance(0.01)
            j2.advance(0.01)

    def test_centers_uniform_chi_square(self):
        from scipy.stats import chi2
        j = make_jammer(rng=np.random.default_rng(11), mode=jm.RANDOM)
        centers = []
        for _ in range(10_000):
            block = j.emission()[1][0]
            centers.append((block.lo_hz + block.hi_hz) / 2)
            j.advance(0.01)
        lo, hi = 801e6, 819e6
        counts, _ = np.histogram(centers, bins=10, range=(lo, hi))
        expected = len(centers) / 10
        stat = np.sum((counts - expected) ** 2 / expected)
        assert stat < chi2.ppf(0.95, df=9)
