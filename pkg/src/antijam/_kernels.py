"""Numba-compiled inner loops for the network math.

These are the only hot spots where plain numpy is memory-bound enough to
matter (single-channel convolutions and the fused Adam update). All
kernels are single-threaded with fastmath disabled so results are
bit-reproducible across runs.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def conv2d_forward(x, kernel, bias, stride, out):
    """Valid cross-correlation of a batch of single-channel images.

    x: (B, H, W), kernel: (KH, KW), out: (B, OH, OW) preallocated.
    """
    batch = x.shape[0]
    kh, kw = kernel.shape
    oh, ow = out.shape[1], out.shape[2]
    for b in range(batch):
        for i in range(oh):
            i0 = i * stride
            for j in range(ow):
                j0 = j * stride
                acc = bias
                for u in range(kh):
                    for v in range(kw):
                        acc += kernel[u, v] * x[b, i0 + u, j0 + v]
                out[b, i, j] = acc


@njit(cache=True)
def conv2d_backward(grad_out, x, kernel, stride, grad_x, grad_k):
    """Gradients of conv2d_forward. grad_x and grad_k must be zeroed.

    Returns the bias gradient (scalar). Accumulates into grad_x/grad_k.
    """
    batch = grad_out.shape[0]
    kh, kw = kernel.shape
    oh, ow = grad_out.shape[1], grad_out.shape[2]
    grad_b = 0.0
    for b in range(batch):
        for i in range(oh):
            i0 = i * stride
            for j in range(ow):
                j0 = j * stride
                g = grad_out[b, i, j]
                grad_b += g
                for u in range(kh):
                    for v in range(kw):
                        grad_k[u, v] += g * x[b, i0 + u, j0 + v]
                        grad_x[b, i0 + u, j0 + v] += g * kernel[u, v]
    return grad_b


@njit(cache=True)
def adam_update(params, grads, m, v, lr, beta1, beta2, eps, step):
    """Fused Adam step with bias correction, in place.

    Returns False as soon as a non-finite gradient entry is hit; the
    caller must treat that as fatal (parameters are partially updated).
    """
    c1 = 1.0 - beta1 ** step
    c2 = 1.0 - beta2 ** step
    ok = True
    for i in range(params.shape[0]):
        g = grads[i]
        if not np.isfinite(g):
            ok = False
            break
        mi = beta1 * m[i] + (1.0 - beta1) * g
        vi = beta2 * v[i] + (1.0 - beta2) * g * g
        m[i] = mi
        v[i] = vi
        params[i] -= lr * (mi / c1) / (np.sqrt(vi / c2) + eps)
    return ok
