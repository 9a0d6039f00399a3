"""Adam optimizer over ParamState buffers."""

from __future__ import annotations

import numpy as np

from ..exceptions import DataError
from .core import ACCUM_DTYPE, STORAGE_DTYPE, ParamState, ensure_finite


class Adam:
    """Adam with bias correction.

    Weight decay is coupled by default (added to the gradient before the
    moment updates, classic L2); decoupled=True applies it directly to the
    parameters instead.
    """

    def __init__(
        self,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        weight_decay: float = 0.0,
        decoupled: bool = False,
    ):
        if not 0.0 <= beta1 < 1.0 or not 0.0 <= beta2 < 1.0:
            raise DataError("adam betas must be in [0, 1)")
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.weight_decay = weight_decay
        self.decoupled = decoupled

    def step(self, params: list, lr: float) -> None:
        for p in params:
            self._step_one(p, lr)

    def _step_one(self, p: ParamState, lr: float) -> None:
        value = p.value.astype(ACCUM_DTYPE)
        g = p.grad.astype(ACCUM_DTYPE)
        if self.weight_decay and not self.decoupled:
            g = g + self.weight_decay * value
        p.step += 1
        m = self.beta1 * p.adam_m.astype(ACCUM_DTYPE) + (1 - self.beta1) * g
        v = self.beta2 * p.adam_v.astype(ACCUM_DTYPE) + (1 - self.beta2) * g * g
        m_hat = m / (1 - self.beta1 ** p.step)
        v_hat = v / (1 - self.beta2 ** p.step)
        update = lr * m_hat / (np.sqrt(v_hat) + self.eps)
        if self.weight_decay and self.decoupled:
            update = update + lr * self.weight_decay * value
        new_value = value - update
        ensure_finite("adam", new_value)
        p.adam_m = m.astype(STORAGE_DTYPE)
        p.adam_v = v.astype(STORAGE_DTYPE)
        p.value = new_value.astype(STORAGE_DTYPE)
