"""Layer objects with cached forward state and hand-written backward passes."""

from __future__ import annotations

import numpy as np

from ..exceptions import DataError
from .core import (
    ACCUM_DTYPE,
    STORAGE_DTYPE,
    ParamState,
    as_storage,
    dropout,
    dropout_backward,
    ensure_finite,
    linear,
    linear_backward,
    relu,
    relu_backward,
)


def uniform_init(rng: np.random.Generator, n_in: int, n_out: int) -> np.ndarray:
    # fan-in scaled uniform, the usual default for ReLU stacks
    bound = 1.0 / np.sqrt(n_in)
    return rng.uniform(-bound, bound, size=(n_in, n_out)).astype(STORAGE_DTYPE)


class Linear:
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator):
        self.n_in = n_in
        self.n_out = n_out
        self.W = ParamState(uniform_init(rng, n_in, n_out))
        self.b = ParamState(uniform_init(rng, n_in, n_out)[:1, :])
        self._x = None

    def forward(self, x) -> np.ndarray:
        x = as_storage(x)
        self._x = x
        return linear(x, self.W.value, self.b.value)

    def backward(self, dy) -> np.ndarray:
        if self._x is None:
            raise DataError("backward before forward")
        dx, dW, db = linear_backward(self._x, self.W.value, dy)
        self.W.accumulate(dW)
        self.b.accumulate(db)
        return dx

    def params(self) -> list:
        return [self.W, self.b]


class BatchNorm:
    """1-D batch normalization, eps 1e-5, running-stat momentum 0.1.

    Training mode normalizes with biased batch statistics and refreshes the
    running estimates (unbiased variance); eval mode applies the stored
    running statistics. A training batch of one row is rejected since its
    variance is degenerate.
    """

    EPS = 1e-5
    MOMENTUM = 0.1

    def __init__(self, width: int):
        self.width = width
        self.gamma = ParamState(np.ones((1, width), dtype=STORAGE_DTYPE))
        self.beta = ParamState(np.zeros((1, width), dtype=STORAGE_DTYPE))
        self.running_mean = np.zeros((1, width), dtype=STORAGE_DTYPE)
        self.running_var = np.ones((1, width), dtype=STORAGE_DTYPE)
        self._cache = None

    def forward(self, x, training: bool) -> np.ndarray:
        x = as_storage(x)
        if x.shape[1] != self.width:
            raise DataError(f"batchnorm width {self.width}, got {x.shape[1]}")
        x64 = x.astype(ACCUM_DTYPE)
        if training:
            n = x.shape[0]
            if n < 2:
                raise DataError("batchnorm training requires batch size >= 2")
            mean = x64.mean(axis=0, keepdims=True)
            var = x64.var(axis=0, keepdims=True)  # biased, used to normalize
            unbiased = var * n / (n - 1)
            self.running_mean = (
                (1 - self.MOMENTUM) * self.running_mean.astype(ACCUM_DTYPE)
                + self.MOMENTUM * mean
            ).astype(STORAGE_DTYPE)
            self.running_var = (
                (1 - self.MOMENTUM) * self.running_var.astype(ACCUM_DTYPE)
                + self.MOMENTUM * unbiased
            ).astype(STORAGE_DTYPE)
        else:
            mean = self.running_mean.astype(ACCUM_DTYPE)
            var = self.running_var.astype(ACCUM_DTYPE)
        inv_std = 1.0 / np.sqrt(var + self.EPS)
        x_hat = (x64 - mean) * inv_std
        y = self.gamma.value.astype(ACCUM_DTYPE) * x_hat + self.beta.value.astype(
            ACCUM_DTYPE
        )
        ensure_finite("batchnorm", y)
        self._cache = (x64, x_hat, inv_std, training)
        return y.astype(STORAGE_DTYPE)

    def backward(self, dy) -> np.ndarray:
        if self._cache is None:
            raise DataError("backward before forward")
        x64, x_hat, inv_std, training = self._cache
        dy64 = np.asarray(dy, dtype=ACCUM_DTYPE)
        gamma = self.gamma.value.astype(ACCUM_DTYPE)
        self.beta.accumulate(dy64.sum(axis=0, keepdims=True))
        self.gamma.accumulate((dy64 * x_hat).sum(axis=0, keepdims=True))
        dx_hat = dy64 * gamma
        if not training:
            dx = dx_hat * inv_std
            return dx.astype(STORAGE_DTYPE)
        n = x64.shape[0]
        # analytic batch-norm gradient through the batch statistics
        dx = (
            inv_std
            / n
            * (
                n * dx_hat
                - dx_hat.sum(axis=0, keepdims=True)
                - x_hat * (dx_hat * x_hat).sum(axis=0, keepdims=True)
            )
        )
        ensure_finite("batchnorm backward", dx)
        return dx.astype(STORAGE_DTYPE)

    def params(self) -> list:
        return [self.gamma, self.beta]


class ReLU:
    def __init__(self):
        self._x = None

    def forward(self, x) -> np.ndarray:
        self._x = np.asarray(x, dtype=STORAGE_DTYPE)
        return relu(self._x)

    def backward(self, dy) -> np.ndarray:
        if self._x is None:
            raise DataError("backward before forward")
        return relu_backward(self._x, dy)

    def params(self) -> list:
        return []


class Dropout:
    def __init__(self, p: float):
        if not 0.0 <= p < 1.0:
            raise DataError(f"dropout probability must be in [0, 1), got {p}")
        self.p = p
        self._mask = None

    def forward(self, x, training: bool, rng: np.random.Generator) -> np.ndarray:
        y, mask = dropout(x, self.p, rng, training)
        self._mask = mask
        return y

    def backward(self, dy) -> np.ndarray:
        if self._mask is None:
            raise DataError("backward before forward")
        return dropout_backward(dy, self._mask)

    def params(self) -> list:
        return []
