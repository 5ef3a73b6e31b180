"""Network-level checks: shape chain, gradient checker, determinism."""

import numpy as np
import pytest

from antijam import nn


def small_net(rng, input_shape=(12, 12), heads=((4,),)):
    return nn.QNetwork(input_shape, [list(h) for h in heads], rng,
                       conv_specs=((4, 2),))


class TestShapes:
    def test_full_agent_shape_chain(self, rng):
        net = nn.QNetwork((200, 200), [[512, 256, 10], [512, 256, 6]], rng)
        assert net.conv_out_shapes == [(99, 99), (48, 48)]
        assert net.flat_dim == 2304
        assert net.conv_layer(0).in_shape == (200, 200)
        assert net.conv_layer(1).in_shape == (99, 99)
        qf, qq = net.forward(np.zeros((200, 200)))
        assert qf.shape == (10,)
        assert qq.shape == (6,)

    def test_heads_share_trunk_output(self, rng):
        net = nn.QNetwork((20, 20), [[8, 3], [8, 5]], rng)
        outs = net.forward(rng.normal(size=(2, 20, 20)))
        assert outs[0].shape == (2, 3)
        assert outs[1].shape == (2, 5)


class TestDeterminism:
    def test_forward_bit_identical(self, rng):
        net = nn.QNetwork((30, 30), [[16, 4]], rng)
        x = rng.normal(size=(30, 30))
        a = net.forward(x)[0]
        b = net.forward(x)[0]
        assert np.array_equal(a, b)

    def test_same_seed_same_init(self):
        n1 = nn.QNetwork((16, 16), [[8, 2]], np.random.default_rng(9))
        n2 = nn.QNetwork((16, 16), [[8, 2]], np.random.default_rng(9))
        assert np.array_equal(n1.params, n2.params)

    def test_init_within_fan_in_bound(self, rng):
        net = nn.QNetwork((16, 16), [[8, 2]], rng)
        w0 = net.view("head0.w0")
        bound = 1.0 / np.sqrt(w0.shape[1])
        assert np.abs(w0).max() <= bound
        assert np.abs(net.view("conv0.kernel")).max() <= 0.25


class TestGradientCheck:
    def test_linear_network_is_exact(self, rng):
        # Identity activations throughout: a single dense head with one
        # (output) layer and a conv trunk, so finite differences agree to
        # near machine precision.
        net = nn.QNetwork((6, 6), [[1]], rng, conv_specs=((4, 2),))
        report = nn.gradient_check(net, rng.normal(size=(6, 6)),
                                   [np.array([0.3])], tolerance=1e-6)
        assert report["within_tolerance"]
        assert report["max_rel_error"] <= 1e-6

    def test_conv_dense_stack_on_12x12(self, rng):
        net = small_net(rng, (12, 12), heads=((6, 3),))
        x = rng.normal(size=(12, 12))
        report = nn.gradient_check(net, x, [rng.normal(size=3)],
                                   tolerance=1e-4)
        if report["kink_risk"]:
            pytest.skip("pre-activation too close to a ReLU kink")
        assert report["within_tolerance"], report

    def test_exact_zero_preactivation_flagged(self, rng):
        net = small_net(rng, (8, 8), heads=((4, 2),))
        # Force one hidden pre-activation exactly to zero.
        net.view("head0.w0")[...] = 0.0
        net.view("head0.b0")[...] = 0.0
        x = rng.normal(size=(8, 8))
        report = nn.gradient_check(net, x, [np.zeros(2)])
        assert report["kink_risk"]

    def test_dual_head_grads_match_fd(self, rng):
        net = nn.QNetwork((10, 10), [[5, 2], [5, 3]], rng,
                          conv_specs=((4, 2),))
        x = rng.normal(size=(10, 10))
        report = nn.gradient_check(net, x,
                                   [rng.normal(size=2), rng.normal(size=3)])
        if report["kink_risk"]:
            pytest.skip("pre-activation too close to a ReLU kink")
        assert report["within_tolerance"], report
