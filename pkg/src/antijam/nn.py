"""Minimal dense/conv network core with exact backprop and Adam.

Everything the agent networks need and nothing more: single-channel
valid convolutions with stride, fully connected layers with ReLU or
identity activations, mean-square-error loss, Adam, and a central
finite-difference gradient checker. Arrays are float64 by default;
float32 is accepted as a build option but the reference tests run in
float64.

Network parameters live in views of one flat vector (see ``QNetwork``)
so the optimizer step and the target-copy blend are single vectorized
operations over the whole network.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigurationError, TrainingError


def conv_output_dim(input_dim: int, kernel_size: int, stride: int) -> int:
    """Spatial output size of a valid convolution."""
    if input_dim < kernel_size:
        raise ConfigurationError(
            f"input dim {input_dim} smaller than kernel {kernel_size}"
        )
    return (input_dim - kernel_size) // stride + 1


@dataclass
class ConvLayer:
    """Single-channel 2-D convolution layer (linear, no activation).

    kernel is (k, k); bias is one scalar shared across the output map.
    """

    kernel: np.ndarray
    bias: float
    stride: int
    in_shape: tuple[int, int]

    @property
    def kernel_size(self) -> int:
        return self.kernel.shape[0]

    @property
    def out_shape(self) -> tuple[int, int]:
        k, s = self.kernel_size, self.stride
        return (
            conv_output_dim(self.in_shape[0], k, s),
            conv_output_dim(self.in_shape[1], k, s),
        )


@dataclass
class DenseLayer:
    """Fully connected layer: activation(W x + b).

    activation is "relu" on hidden layers or "identity" on output heads
    (Q-values may be negative, so heads must be unbounded).
    """

    weights: np.ndarray  # (out, in)
    biases: np.ndarray  # (out,)
    activation: str = "relu"

    def __post_init__(self):
        if self.activation not in ("relu", "identity"):
            raise ConfigurationError(f"unknown activation {self.activation!r}")

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


def conv_forward(x: np.ndarray, layer: ConvLayer) -> np.ndarray:
    """Forward pass. Accepts (H, W) or a batch (B, H, W)."""
    squeeze = x.ndim == 2
    if squeeze:
        x = x[None]
    if x.shape[1:] != layer.in_shape:
        raise ConfigurationError(
            f"conv input {x.shape[1:]} != declared {layer.in_shape}"
        )
    oh, ow = layer.out_shape
    out = np.empty((x.shape[0], oh, ow), dtype=x.dtype)
    _kernels.conv2d_forward(
        np.ascontiguousarray(x), layer.kernel, float(layer.bias), layer.stride, out
    )
    return out[0] if squeeze else out


def conv_backward(grad_out: np.ndarray, cached_input: np.ndarray, layer: ConvLayer):
    """Exact gradients of conv_forward.

    Returns (grad_input, grad_kernel, grad_bias) for the cached input;
    batch dimensions follow the arguments.
    """
    squeeze = grad_out.ndim == 2
    if squeeze:
        grad_out = grad_out[None]
        cached_input = cached_input[None]
    if grad_out.shape[1:] != layer.out_shape:
        raise ConfigurationError(
            f"grad_out {grad_out.shape[1:]} != layer output {layer.out_shape}"
        )
    grad_x = np.zeros_like(cached_input)
    grad_k = np.zeros_like(layer.kernel)
    grad_b = _kernels.conv2d_backward(
        np.ascontiguousarray(grad_out),
        np.ascontiguousarray(cached_input),
        layer.kernel,
        layer.stride,
        grad_x,
        grad_k,
    )
    if squeeze:
        grad_x = grad_x[0]
    return grad_x, grad_k, grad_b


def dense_forward(x: np.ndarray, layer: DenseLayer) -> np.ndarray:
    """Forward pass. Accepts (in,) or a batch (B, in)."""
    if x.shape[-1] != layer.in_dim:
        raise ConfigurationError(f"dense input {x.shape[-1]} != {layer.in_dim}")
    z = x @ layer.weights.T + layer.biases
    if layer.activation == "relu":
        np.maximum(z, 0.0, out=z)
    return z


def dense_backward(grad_out: np.ndarray, cached_input: np.ndarray, layer: DenseLayer):
    """Exact gradients of dense_forward for the cached input.

    Returns (grad_input, grad_W, grad_b). The ReLU subgradient at exactly
    zero pre-activation is taken as zero.
    """
    squeeze = grad_out.ndim == 1
    if squeeze:
        grad_out = grad_out[None]
        cached_input = cached_input[None]
    if layer.activation == "relu":
        z = cached_input @ layer.weights.T + layer.biases
        grad_out = grad_out * (z > 0.0)
    grad_w = grad_out.T @ cached_input
    grad_b = grad_out.sum(axis=0)
    grad_x = grad_out @ layer.weights
    if squeeze:
        grad_x = grad_x[0]
    return grad_x, grad_w, grad_b


def mse_loss(pred: np.ndarray, target: np.ndarray):
    """Mean squared error and its gradient w.r.t. pred."""
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape:
        raise ConfigurationError(f"shape mismatch {pred.shape} vs {target.shape}")
    if pred.size == 0:
        raise ConfigurationError("mse_loss of empty vectors")
    diff = pred - target
    loss = float(np.mean(diff * diff))
    grad = 2.0 * diff / diff.size
    return loss, grad


@dataclass
class AdamState:
    """First/second moment accumulators for one flat parameter vector."""

    m: np.ndarray
    v: np.ndarray
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    learning_rate: float = 0.001

    @classmethod
    def for_params(cls, params: np.ndarray, learning_rate: float = 0.001,
                   beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        return cls(
            m=np.zeros_like(params),
            v=np.zeros_like(params),
            beta1=beta1,
            beta2=beta2,
            eps=eps,
            learning_rate=learning_rate,
        )


def adam_step(params: np.ndarray, grads: np.ndarray, state: AdamState) -> None:
    """One Adam update, in place on params and state."""
    if params.shape != grads.shape or params.shape != state.m.shape:
        raise ConfigurationError("adam_step shape mismatch")
    state.step_count += 1
    ok = _kernels.adam_update(
        params, grads, state.m, state.v,
        state.learning_rate, state.beta1, state.beta2, state.eps,
        state.step_count,
    )
    if not ok:
        raise TrainingError("non-finite gradient in adam_step")


def _uniform_fan_in(rng: np.random.Generator, shape, fan_in: int, dtype):
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype, copy=False)


class QNetwork:
    """Conv trunk plus one or more fully connected heads on a flat vector.

    The trunk is a stack of stride-2 single-channel convolutions; the
    flattened trunk output feeds every head. Heads are ReLU MLPs with an
    identity output layer. Weights are initialised uniformly in
    [-1/sqrt(fan_in), +1/sqrt(fan_in)] from the supplied generator; that
    initial randomness is the only exploration source of the
    selection-by-argmax agents, so it must be seed-controlled.
    """

    def __init__(self, input_shape: tuple[int, int], head_sizes: list[list[int]],
                 rng: np.random.Generator, conv_specs=((4, 2), (4, 2)),
                 dtype=np.float64):
        self.input_shape = tuple(int(d) for d in input_shape)
        self.dtype = np.dtype(dtype)
        self.conv_specs = tuple((int(k), int(s)) for k, s in conv_specs)
        self.head_sizes = [list(map(int, h)) for h in head_sizes]

        slots = []  # (name, shape, fan_in)
        self.conv_out_shapes = []
        shape = self.input_shape
        for li, (k, s) in enumerate(self.conv_specs):
            slots.append((f"conv{li}.kernel", (k, k), k * k))
            slots.append((f"conv{li}.bias", (1,), k * k))
            shape = (conv_output_dim(shape[0], k, s), conv_output_dim(shape[1], k, s))
            self.conv_out_shapes.append(shape)
        self.trunk_out_shape = shape
        self.flat_dim = shape[0] * shape[1]
        for hi, sizes in enumerate(self.head_sizes):
            dims = [self.flat_dim] + sizes
            for li in range(len(sizes)):
                slots.append((f"head{hi}.w{li}", (dims[li + 1], dims[li]), dims[li]))
                slots.append((f"head{hi}.b{li}", (dims[li + 1],), dims[li]))

        total = sum(int(np.prod(sh)) for _, sh, _ in slots)
        self.params = np.empty(total, dtype=self.dtype)
        self._slots = []
        offset = 0
        for name, sh, fan_in in slots:
            n = int(np.prod(sh))
            self.params[offset:offset + n] = _uniform_fan_in(
                rng, n, fan_in, self.dtype)
            self._slots.append((name, sh, offset, n))
            offset += n
        self._views = {name: self.params[o:o + n].reshape(sh)
                       for name, sh, o, n in self._slots}

    @property
    def param_count(self) -> int:
        return int(self.params.size)

    def view(self, name: str) -> np.ndarray:
        return self._views[name]

    def grad_views(self, grad: np.ndarray) -> dict:
        """Views into a gradient vector matching the parameter layout."""
        return {name: grad[o:o + n].reshape(sh)
                for name, sh, o, n in self._slots}

    def conv_layer(self, li: int) -> ConvLayer:
        in_shape = self.input_shape if li == 0 else self.conv_out_shapes[li - 1]
        return ConvLayer(
            kernel=self._views[f"conv{li}.kernel"],
            bias=float(self._views[f"conv{li}.bias"][0]),
            stride=self.conv_specs[li][1],
            in_shape=in_shape,
        )

    def dense_layer(self, hi: int, li: int) -> DenseLayer:
        act = "identity" if li == len(self.head_sizes[hi]) - 1 else "relu"
        return DenseLayer(
            weights=self._views[f"head{hi}.w{li}"],
            biases=self._views[f"head{hi}.b{li}"],
            activation=act,
        )

    def forward(self, x: np.ndarray, want_cache: bool = False):
        """Per-head Q-values for (B, H, W) batches or a single (H, W) map."""
        squeeze = x.ndim == 2
        xb = x[None] if squeeze else x
        if xb.shape[1:] != self.input_shape:
            raise ConfigurationError(
                f"network input {xb.shape[1:]} != {self.input_shape}")
        acts = [np.ascontiguousarray(xb, dtype=self.dtype)]
        for li, (k, s) in enumerate(self.conv_specs):
            oh, ow = self.conv_out_shapes[li]
            out = np.empty((xb.shape[0], oh, ow), dtype=self.dtype)
            _kernels.conv2d_forward(
                acts[-1], self._views[f"conv{li}.kernel"],
                float(self._views[f"conv{li}.bias"][0]), s, out)
            acts.append(out)
        flat = acts[-1].reshape(xb.shape[0], self.flat_dim)
        head_outs = []
        head_hidden = []
        for hi, sizes in enumerate(self.head_sizes):
            h = flat
            hidden = [h]
            for li in range(len(sizes)):
                w = self._views[f"head{hi}.w{li}"]
                b = self._views[f"head{hi}.b{li}"]
                h = h @ w.T + b
                if li < len(sizes) - 1:
                    np.maximum(h, 0.0, out=h)
                hidden.append(h)
            head_hidden.append(hidden)
            head_outs.append(h)
        if squeeze:
            head_outs = [q[0] for q in head_outs]
        if want_cache:
            return head_outs, (acts, flat, head_hidden)
        return head_outs

    def backward(self, cache, head_grads: list) -> np.ndarray:
        """Flat gradient vector for given per-head output gradients.

        head_grads entries are (B, head_out) arrays; None skips a head.
        Trunk gradients from all heads are summed.
        """
        acts, flat, head_hidden = cache
        grad = np.zeros_like(self.params)
        gv = self.grad_views(grad)

        gflat = np.zeros_like(flat)
        for hi, sizes in enumerate(self.head_sizes):
            g = head_grads[hi]
            if g is None:
                continue
            hidden = head_hidden[hi]
            for li in range(len(sizes) - 1, -1, -1):
                if li < len(sizes) - 1:
                    # hidden[li+1] is the post-ReLU output of layer li;
                    # its positivity equals the pre-activation sign.
                    g = g * (hidden[li + 1] > 0.0)
                gv[f"head{hi}.w{li}"][...] = g.T @ hidden[li]
                gv[f"head{hi}.b{li}"][...] = g.sum(axis=0)
                g = g @ self._views[f"head{hi}.w{li}"]
            gflat += g

        gact = gflat.reshape((flat.shape[0],) + self.trunk_out_shape)
        for li in range(len(self.conv_specs) - 1, -1, -1):
            k, s = self.conv_specs[li]
            gx = np.zeros_like(acts[li])
            gk = gv[f"conv{li}.kernel"]
            gb = _kernels.conv2d_backward(
                np.ascontiguousarray(gact), acts[li],
                self._views[f"conv{li}.kernel"], s, gx, gk)
            gv[f"conv{li}.bias"][0] = gb
            gact = gx
        return grad


def gradient_check(network: QNetwork, x: np.ndarray, targets: list[np.ndarray],
                   tolerance: float = 1e-4, step: float = 1e-5) -> dict:
    """Compare analytic gradients against central finite differences.

    The scalar objective is the sum of per-head MSE losses against
    ``targets``. Intended for small networks (a few thousand
    parameters). The report flags networks whose ReLU pre-activations
    sit close enough to zero for the comparison to be unreliable; such
    cases are excluded from hard assertions by construction.
    """
    x = np.asarray(x, dtype=network.dtype)

    def total_loss(want_grads=False):
        if want_grads:
            outs, cache = network.forward(x[None], want_cache=True)
        else:
            outs = network.forward(x[None])
        loss = 0.0
        grads = []
        for q, t in zip(outs, targets):
            l, g = mse_loss(q[0], t)
            loss += l
            grads.append(g[None])
        if want_grads:
            return loss, grads, cache
        return loss

    _, head_grads, cache = total_loss(want_grads=True)
    analytic = network.backward(cache, head_grads)

    kink_risk = False
    _, _, head_hidden = cache
    for hi, sizes in enumerate(network.head_sizes):
        hidden = head_hidden[hi]
        for li in range(len(sizes) - 1):
            w = network.view(f"head{hi}.w{li}")
            b = network.view(f"head{hi}.b{li}")
            z = hidden[li] @ w.T + b
            if np.any(np.abs(z) < 10.0 * step):
                kink_risk = True

    numeric = np.empty_like(analytic)
    for i in range(network.param_count):
        orig = network.params[i]
        network.params[i] = orig + step
        lp = total_loss()
        network.params[i] = orig - step
        lm = total_loss()
        network.params[i] = orig
        numeric[i] = (lp - lm) / (2.0 * step)

    denom = np.maximum(np.abs(analytic) + np.abs(numeric), 1e-8)
    rel = np.abs(analytic - numeric) / denom
    return {
        "max_rel_error": float(rel.max()),
        "param_count": int(network.param_count),
        "within_tolerance": bool(rel.max() <= tolerance),
        "kink_risk": kink_risk,
    }
