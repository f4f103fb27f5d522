"""Runtime layers with hand-written forward and backward passes.

Everything is float64 and single-example (no batch axis); batching is done by
the training loop accumulating gradients. Each layer caches what its backward
pass needs during forward, so forward(train=True) then backward(dout) must be
called in that order. Gradients accumulate into .grads until zero_grads().
"""
from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def relu(x):
    return np.maximum(x, 0.0)


def softmax(z):
    # shift by the max so exp never overflows
    e = np.exp(z - np.max(z))
    return e / e.sum()


class ConvLayer:
    """Same-padded 2-d convolution, channels-last, via an im2col matmul."""

    def __init__(self, weights: np.ndarray, bias: np.ndarray, stride: int, activation: str):
        self.w = weights  # (kh, kw, cin, cout)
        self.b = bias
        self.stride = stride
        self.activation = activation
        self.dw = np.zeros_like(weights)
        self.db = np.zeros_like(bias)
        self._cache = None

    @property
    def params(self):
        return [self.w, self.b]

    @property
    def grads(self):
        return [self.dw, self.db]

    def forward(self, x, train=False, rng=None):
        kh, kw, cin, cout = self.w.shape
        h, w, _ = x.shape
        s = self.stride
        oh = math.ceil(h / s)
        ow = math.ceil(w / s)
        pad_h = max((oh - 1) * s + kh - h, 0)
        pad_w = max((ow - 1) * s + kw - w, 0)
        pt, pl = pad_h // 2, pad_w // 2
        xp = np.pad(x, ((pt, pad_h - pt), (pl, pad_w - pl), (0, 0)))
        win = sliding_window_view(xp, (kh, kw), axis=(0, 1))[::s, ::s]
        # win is (oh, ow, cin, kh, kw); reorder to match w.reshape(kh*kw*cin, cout)
        cols = win.transpose(0, 1, 3, 4, 2).reshape(oh * ow, kh * kw * cin)
        pre = cols @ self.w.reshape(-1, cout) + self.b
        out = relu(pre) if self.activation == "relu" else pre
        if train:
            self._cache = (cols, pre, x.shape, xp.shape, (pt, pl), (oh, ow))
        return out.reshape(oh, ow, cout)

    def backward(self, dout):
        cols, pre, x_shape, xp_shape, (pt, pl), (oh, ow) = self._cache
        kh, kw, cin, cout = self.w.shape
        s = self.stride
        dmat = dout.reshape(oh * ow, cout)
        if self.activation == "relu":
            dmat = dmat * (pre > 0)
        self.dw += (cols.T @ dmat).reshape(self.w.shape)
        self.db += dmat.sum(axis=0)
        dcols = (dmat @ self.w.reshape(-1, cout).T).reshape(oh, ow, kh, kw, cin)
        dxp = np.zeros(xp_shape)
        for i in range(kh):
            for j in range(kw):
                dxp[i:i + oh * s:s, j:j + ow * s:s, :] += dcols[:, :, i, j, :]
        h, w, _ = x_shape
        return dxp[pt:pt + h, pl:pl + w, :]


class MaxPoolLayer:
    """Non-overlapping max pooling; ties go to the first (row-major) maximum."""

    def __init__(self, window: int):
        self.window = window
        self.params = []
        self.grads = []
        self._cache = None

    def forward(self, x, train=False, rng=None):
        k = self.window
        h, w, c = x.shape
        oh, ow = h // k, w // k
        tiles = x[:oh * k, :ow * k, :].reshape(oh, k, ow, k, c)
        tiles = tiles.transpose(0, 2, 4, 1, 3).reshape(oh, ow, c, k * k)
        idx = tiles.argmax(axis=-1)
        out = np.take_along_axis(tiles, idx[..., None], axis=-1)[..., 0]
        if train:
            self._cache = (idx, x.shape)
        return out

    def backward(self, dout):
        idx, x_shape = self._cache
        k = self.window
        h, w, c = x_shape
        oh, ow = h // k, w // k
        dtiles = np.zeros((oh, ow, c, k * k))
        np.put_along_axis(dtiles, idx[..., None], dout[..., None], axis=-1)
        dx = np.zeros(x_shape)
        dx[:oh * k, :ow * k, :] = (
            dtiles.reshape(oh, ow, c, k, k).transpose(0, 3, 1, 4, 2).reshape(oh * k, ow * k, c)
        )
        return dx


class DropoutLayer:
    """Inverted dropout: active only in training, inference is the identity.

    At rate 0 the layer is a no-op and draws nothing from the rng, so a
    network with dropout disabled consumes the same random stream as one
    without the layer.
    """

    def __init__(self, rate: float):
        self.rate = rate
        self.params = []
        self.grads = []
        self._mask = None

    def forward(self, x, train=False, rng=None):
        if not train or self.rate == 0.0:
            self._mask = None
            return x
        keep = 1.0 - self.rate
        self._mask = (rng.random(x.shape) < keep) / keep
        return x * self._mask

    def backward(self, dout):
        if self._mask is None:
            return dout
        return dout * self._mask


class FlattenLayer:
    def __init__(self):
        self.params = []
        self.grads = []
        self._shape = None

    def forward(self, x, train=False, rng=None):
        if train:
            self._shape = x.shape
        return x.ravel()

    def backward(self, dout):
        return dout.reshape(self._shape)


class DenseLayer:
    """Fully connected layer.

    With softmax activation the backward pass expects the gradient with
    respect to the logits (the loss layer folds softmax and cross-entropy
    together), not with respect to the probabilities.
    """

    def __init__(self, weights: np.ndarray, bias: np.ndarray, activation: str):
        self.w = weights  # (n_in, n_out)
        self.b = bias
        self.activation = activation
        self.dw = np.zeros_like(weights)
        self.db = np.zeros_like(bias)
        self._cache = None

    @property
    def params(self):
        return [self.w, self.b]

    @property
    def grads(self):
        return [self.dw, self.db]

    def forward(self, x, train=False, rng=None):
        pre = x @ self.w + self.b
        if self.activation == "relu":
            out = relu(pre)
        elif self.activation == "softmax":
            out = softmax(pre)
        else:
            out = pre
        if train:
            self._cache = (x, pre)
        return out

    def backward(self, dout):
        x, pre = self._cache
        if self.activation == "relu":
            dpre = dout * (pre > 0)
        else:
            # linear, or softmax where dout is already d(loss)/d(logits)
            dpre = dout
        self.dw += np.outer(x, dpre)
        self.db += dpre
        return self.w @ dpre
