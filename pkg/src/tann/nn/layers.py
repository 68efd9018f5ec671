"""Layer primitives for the minimal network engine.

Every layer implements the same small protocol:

* ``params()``        -- list of parameter arrays (mutable views, may be empty)
* ``init(rng)``       -- redraw parameters in place (Glorot uniform, zero bias)
* ``forward(x, train, rng)`` -- returns ``(output, ctx)`` where ``ctx`` holds
  whatever the backward pass needs (inputs, pre-activations, dropout masks)
* ``backward(grad_out, ctx)`` -- returns ``(grad_in, param_grads)`` with
  ``param_grads`` shaped exactly like ``params()``

Inputs and outputs are 1-D float64 vectors; the complex layers use
complex128.  Complex parameters are differentiated by treating the real and
imaginary parts as independent real coordinates, so their gradients are
stored as ``d/dRe + i * d/dIm``.
"""

from __future__ import annotations

import numpy as np

from ..exceptions import ContractError, DimensionError

__all__ = [
    "Dense",
    "ReLU",
    "Sigmoid",
    "Identity",
    "Dropout",
    "Recurrent",
    "Conv1D",
    "ComplexDense",
    "Magnitude",
]

# Sigmoid outputs are clamped into the open interval (0, 1) so downstream
# log-losses never see an exact 0 or 1 even for huge pre-activations.
_SIGMOID_CLIP = 1e-12


def _as_vector(x, dtype=np.float64):
    x = np.asarray(x, dtype=dtype)
    if x.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {x.shape}")
    return x


def stable_sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return np.clip(out, _SIGMOID_CLIP, 1.0 - _SIGMOID_CLIP)


def _glorot(rng, fan_in, fan_out, shape):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Dense:
    """Affine map ``y = W x + b`` with ``W`` of shape (out, in)."""

    def __init__(self, in_width: int, out_width: int):
        self.W = np.zeros((out_width, in_width))
        self.b = np.zeros(out_width)

    @property
    def in_width(self):
        return self.W.shape[1]

    @property
    def out_width(self):
        return self.W.shape[0]

    def params(self):
        return [self.W, self.b]

    def init(self, rng):
        out_w, in_w = self.W.shape
        self.W[...] = _glorot(rng, in_w, out_w, (out_w, in_w))
        self.b[...] = 0.0

    def forward(self, x, train, rng):
        x = _as_vector(x)
        if x.shape[0] != self.W.shape[1]:
            raise DimensionError(
                f"dense layer expects width {self.W.shape[1]}, got {x.shape[0]}"
            )
        return self.W @ x + self.b, x

    def backward(self, grad_out, ctx):
        x = ctx
        grad_W = np.outer(grad_out, x)
        grad_in = self.W.T @ grad_out
        return grad_in, [grad_W, grad_out.copy()]


class ReLU:
    """Elementwise max(0, x); applied to real and imaginary parts separately
    when the input is complex (split-ReLU)."""

    def params(self):
        return []

    def init(self, rng):
        pass

    def forward(self, x, train, rng):
        x = np.asarray(x)
        if np.iscomplexobj(x):
            mask_re = (x.real > 0).astype(np.float64)
            mask_im = (x.imag > 0).astype(np.float64)
            y = x.real * mask_re + 1j * (x.imag * mask_im)
            return y, (mask_re, mask_im)
        mask = (x > 0).astype(np.float64)
        return x * mask, mask

    def backward(self, grad_out, ctx):
        if isinstance(ctx, tuple):
            mask_re, mask_im = ctx
            grad_in = grad_out.real * mask_re + 1j * (grad_out.imag * mask_im)
            return grad_in, []
        return grad_out * ctx, []


class Sigmoid:
    def params(self):
        return []

    def init(self, rng):
        pass

    def forward(self, x, train, rng):
        y = stable_sigmoid(x)
        return y, y

    def backward(self, grad_out, ctx):
        y = ctx
        return grad_out * y * (1.0 - y), []


class Identity:
    def params(self):
        return []

    def init(self, rng):
        pass

    def forward(self, x, train, rng):
        return np.asarray(x, dtype=np.float64).copy(), None

    def backward(self, grad_out, ctx):
        return grad_out, []


class Dropout:
    """Inverted dropout: scale-by-1/(1-p) zeroing at train time, identity at
    inference.  The mask lives in the forward ctx so gradients can be checked
    with the mask frozen."""

    def __init__(self, p: float):
        if not 0.0 <= p < 1.0:
            raise ContractError(f"dropout probability must be in [0, 1), got {p}")
        self.p = p

    def params(self):
        return []

    def init(self, rng):
        pass

    def forward(self, x, train, rng):
        x = _as_vector(x)
        if not train or self.p == 0.0:
            return x.copy(), None
        if rng is None:
            raise ContractError("train-mode dropout needs an rng")
        keep = (rng.random(x.shape[0]) >= self.p).astype(np.float64)
        scale = 1.0 / (1.0 - self.p)
        return x * keep * scale, keep * scale

    def backward(self, grad_out, ctx):
        if ctx is None:
            return grad_out, []
        return grad_out * ctx, []


class Recurrent:
    """Elman recurrence over a declared sequence layout.

    A width-D input vector is read as ceil(D / step_width) steps of
    ``step_width`` entries (zero-padded at the tail), and the final hidden
    state is returned:  h_t = tanh(W_ih x_t + W_hh h_{t-1} + b).
    """

    def __init__(self, step_width: int, hidden_size: int):
        if step_width < 1 or hidden_size < 1:
            raise ContractError("step_width and hidden_size must be >= 1")
        self.step_width = step_width
        self.hidden_size = hidden_size
        self.W_ih = np.zeros((hidden_size, step_width))
        self.W_hh = np.zeros((hidden_size, hidden_size))
        self.b = np.zeros(hidden_size)

    def params(self):
        return [self.W_ih, self.W_hh, self.b]

    def init(self, rng):
        h, s = self.hidden_size, self.step_width
        self.W_ih[...] = _glorot(rng, s, h, (h, s))
        self.W_hh[...] = _glorot(rng, h, h, (h, h))
        self.b[...] = 0.0

    def _steps(self, x):
        n_steps = -(-x.shape[0] // self.step_width)
        padded = np.zeros(n_steps * self.step_width)
        padded[: x.shape[0]] = x
        return padded.reshape(n_steps, self.step_width)

    def forward(self, x, train, rng):
        x = _as_vector(x)
        steps = self._steps(x)
        h = np.zeros(self.hidden_size)
        hs = [h]
        for xt in steps:
            h = np.tanh(self.W_ih @ xt + self.W_hh @ h + self.b)
            hs.append(h)
        return h.copy(), (steps, hs, x.shape[0])

    def backward(self, grad_out, ctx):
        steps, hs, in_width = ctx
        gW_ih = np.zeros_like(self.W_ih)
        gW_hh = np.zeros_like(self.W_hh)
        gb = np.zeros_like(self.b)
        grad_steps = np.zeros_like(steps)
        grad_h = grad_out.copy()
        for t in range(len(steps) - 1, -1, -1):
            h_t = hs[t + 1]
            grad_z = grad_h * (1.0 - h_t * h_t)  # d tanh
            gW_ih += np.outer(grad_z, steps[t])
            gW_hh += np.outer(grad_z, hs[t])
            gb += grad_z
            grad_steps[t] = self.W_ih.T @ grad_z
            grad_h = self.W_hh.T @ grad_z
        return grad_steps.ravel()[:in_width], [gW_ih, gW_hh, gb]


class Conv1D:
    """Single-channel 1-D convolution, stride 1, no padding."""

    def __init__(self, kernel_width: int = 2):
        if kernel_width < 1:
            raise ContractError("kernel width must be >= 1")
        self.kernel = np.zeros(kernel_width)
        self.bias = np.zeros(1)

    def params(self):
        return [self.kernel, self.bias]

    def init(self, rng):
        k = self.kernel.shape[0]
        self.kernel[...] = _glorot(rng, k, 1, (k,))
        self.bias[...] = 0.0

    def forward(self, x, train, rng):
        x = _as_vector(x)
        k = self.kernel.shape[0]
        if x.shape[0] < k:
            raise DimensionError(
                f"conv1d needs input width >= {k}, got {x.shape[0]}"
            )
        out_w = x.shape[0] - k + 1
        y = np.empty(out_w)
        for j in range(out_w):
            y[j] = self.kernel @ x[j : j + k] + self.bias[0]
        return y, x

    def backward(self, grad_out, ctx):
        x = ctx
        k = self.kernel.shape[0]
        g_kernel = np.zeros_like(self.kernel)
        g_in = np.zeros_like(x)
        for j in range(grad_out.shape[0]):
            g_kernel += grad_out[j] * x[j : j + k]
            g_in[j : j + k] += grad_out[j] * self.kernel
        g_bias = np.array([grad_out.sum()])
        return g_in, [g_kernel, g_bias]


class ComplexDense:
    """Affine map on complex vectors; real input is promoted to complex."""

    def __init__(self, in_width: int, out_width: int):
        self.W = np.zeros((out_width, in_width), dtype=np.complex128)
        self.b = np.zeros(out_width, dtype=np.complex128)

    def params(self):
        return [self.W, self.b]

    def init(self, rng):
        out_w, in_w = self.W.shape
        scale = 1.0 / np.sqrt(2.0)
        re = _glorot(rng, in_w, out_w, (out_w, in_w)) * scale
        im = _glorot(rng, in_w, out_w, (out_w, in_w)) * scale
        self.W[...] = re + 1j * im
        self.b[...] = 0.0

    def forward(self, x, train, rng):
        x = np.asarray(x)
        if x.ndim != 1:
            raise DimensionError(f"expected a 1-D vector, got shape {x.shape}")
        x = x.astype(np.complex128)
        if x.shape[0] != self.W.shape[1]:
            raise DimensionError(
                f"complex dense expects width {self.W.shape[1]}, got {x.shape[0]}"
            )
        return self.W @ x + self.b, x

    def backward(self, grad_out, ctx):
        # grad_out carries dL/dRe(y) + i dL/dIm(y).  For y = Wx + b with all
        # quantities complex, the real-coordinate chain rule gives
        # dL/dW = g * conj(x) and dL/dx = conj(W)^T g (elementwise pairing of
        # real/imag parts).
        x = ctx
        g = grad_out.astype(np.complex128)
        grad_W = np.outer(g, np.conj(x))
        grad_b = g.copy()
        grad_in = np.conj(self.W).T @ g
        return grad_in, [grad_W, grad_b]


class Magnitude:
    """Elementwise complex modulus |z|, producing a real vector."""

    def params(self):
        return []

    def init(self, rng):
        pass

    def forward(self, x, train, rng):
        z = np.asarray(x, dtype=np.complex128)
        return np.abs(z), z

    def backward(self, grad_out, ctx):
        z = ctx
        mag = np.abs(z)
        safe = np.where(mag > 0, mag, 1.0)
        scale = np.where(mag > 0, grad_out / safe, 0.0)
        return scale * z, []
