"""Dense numerical primitives for the regressor and GCN pathways.

Convention throughout: parameters and activations are stored float32;
matmuls and reductions run in float64 and are cast back on the way out,
so results are deterministic for a given seed on a given build. A 2-D
float32 C-order ndarray plays the tensor role (rows/cols = shape, data =
buffer). Every op checks its output and raises NumericError on NaN/Inf.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..exceptions import DataError, NumericError

STORAGE_DTYPE = np.float32
ACCUM_DTYPE = np.float64


def ensure_finite(name: str, arr) -> None:
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{name} produced non-finite values")


def as_storage(x, name: str = "x") -> np.ndarray:
    arr = np.ascontiguousarray(x, dtype=STORAGE_DTYPE)
    if arr.ndim != 2:
        raise DataError(f"{name} must be 2-D, got shape {arr.shape}")
    ensure_finite(name, arr)
    return arr


@dataclass
class ParamState:
    """A trainable tensor with its gradient and Adam moment buffers."""

    value: np.ndarray
    grad: np.ndarray = field(init=False)
    adam_m: np.ndarray = field(init=False)
    adam_v: np.ndarray = field(init=False)
    step: int = field(default=0, init=False)

    def __post_init__(self) -> None:
        self.value = np.ascontiguousarray(self.value, dtype=STORAGE_DTYPE)
        if self.value.ndim != 2:
            raise DataError(f"parameters must be 2-D, got {self.value.shape}")
        self.grad = np.zeros_like(self.value)
        self.adam_m = np.zeros_like(self.value)
        self.adam_v = np.zeros_like(self.value)

    @property
    def shape(self):
        return self.value.shape

    def zero_grad(self) -> None:
        self.grad.fill(0.0)

    def accumulate(self, grad) -> None:
        g = np.asarray(grad, dtype=ACCUM_DTYPE)
        if g.shape != self.value.shape:
            raise DataError(
                f"gradient shape {g.shape} does not match parameter "
                f"shape {self.value.shape}"
            )
        ensure_finite("grad", g)
        self.grad += g.astype(STORAGE_DTYPE)


# ---------------------------------------------------------------------------
# functional ops


def linear(x, W, b) -> np.ndarray:
    """y = xW + b with float64 accumulation."""
    x = as_storage(x)
    W = as_storage(W, "W")
    b = as_storage(b, "b")
    if x.shape[1] != W.shape[0]:
        raise DataError(f"linear: x has {x.shape[1]} cols, W has {W.shape[0]} rows")
    if b.shape != (1, W.shape[1]):
        raise DataError(f"linear: bias must be 1x{W.shape[1]}, got {b.shape}")
    y = x.astype(ACCUM_DTYPE) @ W.astype(ACCUM_DTYPE) + b.astype(ACCUM_DTYPE)
    ensure_finite("linear", y)
    return y.astype(STORAGE_DTYPE)


def linear_backward(x, W, dy):
    """Chain-rule gradients (dx, dW, db) for y = xW + b."""
    x64 = np.asarray(x, dtype=ACCUM_DTYPE)
    W64 = np.asarray(W, dtype=ACCUM_DTYPE)
    dy64 = np.asarray(dy, dtype=ACCUM_DTYPE)
    dx = dy64 @ W64.T
    dW = x64.T @ dy64
    db = dy64.sum(axis=0, keepdims=True)
    for name, g in (("dx", dx), ("dW", dW), ("db", db)):
        ensure_finite(name, g)
    return dx.astype(STORAGE_DTYPE), dW.astype(STORAGE_DTYPE), db.astype(STORAGE_DTYPE)


def relu(x) -> np.ndarray:
    return np.maximum(np.asarray(x, dtype=STORAGE_DTYPE), STORAGE_DTYPE(0.0))


def relu_backward(x, dy) -> np.ndarray:
    mask = np.asarray(x) > 0
    return (np.asarray(dy, dtype=STORAGE_DTYPE) * mask).astype(STORAGE_DTYPE)


def dropout(x, p: float, rng: np.random.Generator, training: bool):
    """Inverted dropout; returns (y, mask). Eval mode is the identity."""
    if not 0.0 <= p < 1.0:
        raise DataError(f"dropout probability must be in [0, 1), got {p}")
    x = np.asarray(x, dtype=STORAGE_DTYPE)
    if not training or p == 0.0:
        return x, np.ones_like(x)
    keep = (rng.random(x.shape) >= p).astype(STORAGE_DTYPE)
    scale = STORAGE_DTYPE(1.0 / (1.0 - p))
    return x * keep * scale, keep * scale


def dropout_backward(dy, mask) -> np.ndarray:
    return (np.asarray(dy, dtype=STORAGE_DTYPE) * mask).astype(STORAGE_DTYPE)


def mse_loss(pred, target):
    """Mean squared error and its gradient 2(pred - target)/n."""
    p = np.asarray(pred, dtype=ACCUM_DTYPE).ravel()
    t = np.asarray(target, dtype=ACCUM_DTYPE).ravel()
    if p.size == 0:
        raise DataError("mse_loss on empty input")
    if p.shape != t.shape:
        raise DataError(f"mse_loss shapes differ: {p.shape} vs {t.shape}")
    resid = p - t
    loss = float(np.mean(resid * resid))
    grad = (2.0 * resid / p.size).astype(STORAGE_DTYPE)
    if not np.isfinite(loss):
        raise NumericError("mse_loss produced a non-finite value")
    return loss, grad.reshape(np.asarray(pred).shape)


def cosine_lr(epoch: int, lr0: float, t_max: int, lr_min: float = 0.0) -> float:
    """lr_min + (lr0 - lr_min)/2 * (1 + cos(pi * epoch / t_max))."""
    if not 0 <= epoch <= t_max:
        raise DataError(f"epoch {epoch} outside [0, {t_max}]")
    return lr_min + 0.5 * (lr0 - lr_min) * (1.0 + np.cos(np.pi * epoch / t_max))
