"""Feed-forward and 1-D convolutional networks written on bare numpy.

Everything needed for the two network families: dense and convolutional
layers, batch normalization, SELU with alpha-compatible dropout, max
pooling, Adam, binary cross-entropy on logits, and a finite-difference
gradient check.  All arithmetic is float64; forward/backward are
deterministic functions of (parameters, batch, rng state).
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch
from .specs import CNNSpec, FFNNSpec

SELU_LAMBDA = 1.0507009873554804934193349852946
SELU_ALPHA = 1.6732632423543772848170429916717

# conv channel progression; smallest setup that makes three stacked blocks
# meaningful on a few hundred input cells
CONV_CHANNELS = (8, 16, 32)
POOL_WIDTH = 2
BN_EPS = 1e-5
BN_MOMENTUM = 0.1


class Layer:
    train_mode = False

    def params(self):
        return []

    def grads(self):
        return []

    def forward(self, x, rng=None):
        raise NotImplementedError

    def backward(self, gout):
        raise NotImplementedError


class Dense(Layer):
    def __init__(self, n_in, n_out, rng, init="selu"):
        if init == "selu":
            # fan-in scaled normal, the self-normalizing recipe
            self.w = rng.normal(0.0, np.sqrt(1.0 / n_in), size=(n_out, n_in))
        else:
            limit = np.sqrt(6.0 / (n_in + n_out))
            self.w = rng.uniform(-limit, limit, size=(n_out, n_in))
        self.b = np.zeros(n_out)
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)

    def params(self):
        return [self.w, self.b]

    def grads(self):
        return [self.gw, self.gb]

    def forward(self, x, rng=None):
        self._x = x
        return x @ self.w.T + self.b

    def backward(self, gout):
        self.gw[...] = gout.T @ self._x
        self.gb[...] = gout.sum(axis=0)
        return gout @ self.w


class Selu(Layer):
    def forward(self, x, rng=None):
        self._x = x
        return SELU_LAMBDA * np.where(x > 0, x, SELU_ALPHA * np.expm1(x))

    def backward(self, gout):
        d = np.where(self._x > 0, 1.0, SELU_ALPHA * np.exp(self._x))
        return SELU_LAMBDA * d * gout


class AlphaDropout(Layer):
    """SELU-compatible dropout: dropped units go to the SELU saturation
    value and the output is rescaled to preserve mean and variance."""

    def __init__(self, p):
        self.p = min(float(p), 0.99)  # p=1 would zero the variance
        ap = -SELU_LAMBDA * SELU_ALPHA
        q = 1.0 - self.p
        self.alpha_p = ap
        if self.p > 0:
            self.scale = (q * (1.0 + self.p * ap * ap)) ** -0.5
            self.shift = -self.scale * self.p * ap
        else:
            self.scale, self.shift = 1.0, 0.0
        self.stochastic = False  # masks resampled at predict time

    def forward(self, x, rng=None):
        active = (self.train_mode or self.stochastic) and self.p > 0
        if not active:
            self._mask = None
            return x
        self._mask = rng.random(x.shape) >= self.p
        return self.scale * np.where(self._mask, x, self.alpha_p) + self.shift

    def backward(self, gout):
        if self._mask is None:
            return gout
        return self.scale * self._mask * gout


class Flatten(Layer):
    def forward(self, x, rng=None):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, gout):
        return gout.reshape(self._shape)


class Conv1D(Layer):
    """1-D convolution, stride 1, zero-padded to the input length."""

    def __init__(self, c_in, c_out, k, rng):
        limit = np.sqrt(6.0 / (c_in * k + c_out * k))  # uniform fan-avg
        self.w = rng.uniform(-limit, limit, size=(c_out, c_in * k))
        self.b = np.zeros(c_out)
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)
        self.c_in, self.c_out, self.k = c_in, c_out, k

    def params(self):
        return [self.w, self.b]

    def grads(self):
        return [self.gw, self.gb]

    def forward(self, x, rng=None):
        n, c, length = x.shape
        if c != self.c_in:
            raise DimensionMismatch(f"conv expects {self.c_in} channels, got {c}")
        k = self.k
        pad_l, pad_r = (k - 1) // 2, k // 2
        xp = np.pad(x, ((0, 0), (0, 0), (pad_l, pad_r)))
        # (n, c, length, k) windows -> (n*length, c*k)
        win = np.lib.stride_tricks.sliding_window_view(xp, k, axis=2)
        patches = win.transpose(0, 2, 1, 3).reshape(n * length, c * k)
        self._patches = patches
        self._dims = (n, length, pad_l)
        out = patches @ self.w.T + self.b
        return out.reshape(n, length, self.c_out).transpose(0, 2, 1)

    def backward(self, gout):
        n, length, pad_l = self._dims
        g2 = gout.transpose(0, 2, 1).reshape(n * length, self.c_out)
        self.gw[...] = g2.T @ self._patches
        self.gb[...] = g2.sum(axis=0)
        dpatch = (g2 @ self.w).reshape(n, length, self.c_in, self.k)
        dxp = np.zeros((n, self.c_in, length + self.k - 1))
        for t in range(self.k):
            dxp[:, :, t:t + length] += dpatch[:, :, :, t].transpose(0, 2, 1)
        return dxp[:, :, pad_l:pad_l + length]


class BatchNorm1D(Layer):
    """Per-channel normalization over (batch, positions) with running stats."""

    def __init__(self, channels):
        self.gamma = np.ones(channels)
        self.beta = np.zeros(channels)
        self.ggamma = np.zeros_like(self.gamma)
        self.gbeta = np.zeros_like(self.beta)
        self.running_mean = np.zeros(channels)
        self.running_var = np.ones(channels)

    def params(self):
        return [self.gamma, self.beta]

    def grads(self):
        return [self.ggamma, self.gbeta]

    def forward(self, x, rng=None):
        if self.train_mode:
            mean = x.mean(axis=(0, 2))
            var = x.var(axis=(0, 2))
            self.running_mean += BN_MOMENTUM * (mean - self.running_mean)
            self.running_var += BN_MOMENTUM * (var - self.running_var)
        else:
            mean, var = self.running_mean, self.running_var
        self._istd = 1.0 / np.sqrt(var + BN_EPS)
        self._xhat = (x - mean[None, :, None]) * self._istd[None, :, None]
        self._m = x.shape[0] * x.shape[2]
        return self.gamma[None, :, None] * self._xhat + self.beta[None, :, None]

    def backward(self, gout):
        xhat, istd = self._xhat, self._istd
        self.ggamma[...] = (gout * xhat).sum(axis=(0, 2))
        self.gbeta[...] = gout.sum(axis=(0, 2))
        if not self.train_mode:
            return gout * (self.gamma * istd)[None, :, None]
        m = self._m
        g_mean = gout.mean(axis=(0, 2))[None, :, None]
        gx_mean = (gout * xhat).mean(axis=(0, 2))[None, :, None]
        return (self.gamma * istd)[None, :, None] * (gout - g_mean - xhat * gx_mean)


class MaxPool1D(Layer):
    def __init__(self, width=POOL_WIDTH):
        self.width = width

    def forward(self, x, rng=None):
        n, c, length = x.shape
        lo = (length // self.width) * self.width
        self._shape = x.shape
        xr = x[:, :, :lo].reshape(n, c, lo // self.width, self.width)
        self._arg = xr.argmax(axis=3)
        return xr.max(axis=3)

    def backward(self, gout):
        n, c, length = self._shape
        lo = (length // self.width) * self.width
        dxr = np.zeros((n, c, lo // self.width, self.width))
        np.put_along_axis(dxr, self._arg[..., None], gout[..., None], axis=3)
        dx = np.zeros((n, c, length))
        dx[:, :, :lo] = dxr.reshape(n, c, lo)
        return dx


class Reshape1C(Layer):
    """(n, d) -> (n, 1, d) for the first conv block."""

    def forward(self, x, rng=None):
        return x[:, None, :]

    def backward(self, gout):
        return gout[:, 0, :]


class Network:
    """Sequential stack ending in a single logit."""

    def __init__(self, layers, n_in):
        self.layers = layers
        self.n_in = n_in

    def set_train(self, flag: bool):
        for lay in self.layers:
            lay.train_mode = flag

    def set_stochastic(self, flag: bool):
        for lay in self.layers:
            if isinstance(lay, AlphaDropout):
                lay.stochastic = flag

    def forward(self, x, rng=None):
        if x.shape[1] != self.n_in:
            raise DimensionMismatch(f"expected {self.n_in} cells, got {x.shape[1]}")
        for lay in self.layers:
            x = lay.forward(x, rng)
        return x[:, 0]  # logits

    def backward(self, dlogit):
        g = dlogit[:, None]
        for lay in reversed(self.layers):
            g = lay.backward(g)
        return g

    def params(self):
        return [p for lay in self.layers for p in lay.params()]

    def grads(self):
        return [g for lay in self.layers for g in lay.grads()]

    def param_vector(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.params()])

    def set_param_vector(self, vec):
        i = 0
        for p in self.params():
            p[...] = vec[i:i + p.size].reshape(p.shape)
            i += p.size

    def grad_vector(self) -> np.ndarray:
        return np.concatenate([g.ravel() for g in self.grads()])


def build_ffnn(spec: FFNNSpec, n_in: int, rng) -> Network:
    return Network(
        [
            Dense(n_in, spec.h1, rng), Selu(),
            Dense(spec.h1, spec.h2, rng), Selu(),
            Dense(spec.h2, spec.h3, rng), Selu(),
            AlphaDropout(spec.dropout3),
            Dense(spec.h3, 1, rng),
        ],
        n_in,
    )


def build_cnn(spec: CNNSpec, n_in: int, rng) -> Network:
    layers: list[Layer] = [Reshape1C()]
    c_in = 1
    length = n_in
    for k, c_out in zip((spec.k1, spec.k2, spec.k3), CONV_CHANNELS):
        layers += [
            Conv1D(c_in, c_out, k, rng),
            BatchNorm1D(c_out),
            Selu(),
            MaxPool1D(),
        ]
        c_in = c_out
        length //= POOL_WIDTH
    if length < 1:
        raise DimensionMismatch(f"input of {n_in} cells too short for 3 pools")
    layers += [
        Flatten(),
        Dense(c_in * length, spec.h1, rng), Selu(),
        Dense(spec.h1, spec.h2, rng), Selu(),
        Dense(spec.h2, spec.h3, rng), Selu(),
        AlphaDropout(spec.dropout3),
        Dense(spec.h3, 1, rng),
    ]
    return Network(layers, n_in)


def build_net(spec, n_in: int, rng) -> Network:
    if isinstance(spec, FFNNSpec):
        return build_ffnn(spec, n_in, rng)
    if isinstance(spec, CNNSpec):
        return build_cnn(spec, n_in, rng)
    raise TypeError(f"not a network spec: {spec!r}")


# ---------------------------------------------------------------------------
# Loss and optimizer
# ---------------------------------------------------------------------------

def bce_with_logits(logits, y):
    """Mean binary cross-entropy and its gradient wrt the logits."""
    y = np.asarray(y, dtype=np.float64)
    loss = np.mean(np.maximum(logits, 0) - logits * y + np.log1p(np.exp(-np.abs(logits))))
    p = sigmoid(logits)
    return loss, (p - y) / len(y)


def sigmoid(z):
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class Adam:
    def __init__(self, params, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = params
        self.lr, self.b1, self.b2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads):
        self.t += 1
        b1t = 1.0 - self.b1 ** self.t
        b2t = 1.0 - self.b2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m += (1.0 - self.b1) * (g - m)
            v += (1.0 - self.b2) * (g * g - v)
            p -= self.lr * (m / b1t) / (np.sqrt(v / b2t) + self.eps)


# ---------------------------------------------------------------------------
# Gradient check
# ---------------------------------------------------------------------------

def grad_check(spec, x, y, seed: int = 0, h: float = 1e-5) -> float:
    """Max relative error between backprop and central finite differences.

    Dropout is disabled; batch norm runs in training mode so the loss is a
    deterministic function of the parameters.  The default step keeps the
    central-difference window clear of max-pool argmax flips (adjacent conv
    outputs are correlated, so near-ties are common at h ~ 1e-4) while
    staying well above double-precision roundoff (which bites at h ~ 1e-6).
    """
    x = np.asarray(x, dtype=np.float64)
    rng = np.random.Generator(np.random.PCG64(seed))
    net = build_net(spec, x.shape[1], rng)
    for lay in net.layers:
        if isinstance(lay, AlphaDropout):
            lay.p = 0.0
    net.set_train(True)

    def loss_at(vec):
        net.set_param_vector(vec)
        logits = net.forward(x)
        return bce_with_logits(logits, y)[0]

    theta = net.param_vector()
    logits = net.forward(x)
    loss, dlogit = bce_with_logits(logits, y)
    net.backward(dlogit)
    analytic = net.grad_vector()

    worst = 0.0
    for i in range(theta.size):
        tp = theta.copy()
        tp[i] += h
        lp = loss_at(tp)
        tp[i] -= 2 * h
        lm = loss_at(tp)
        fd = (lp - lm) / (2 * h)
        if abs(analytic[i]) < 1e-10 and abs(fd) < 1e-10:
            continue  # both negligible (e.g. conv bias cancelled by batch norm)
        denom = max(abs(analytic[i]) + abs(fd), 1e-8)
        worst = max(worst, abs(analytic[i] - fd) / denom)
    net.set_param_vector(theta)
    return worst
