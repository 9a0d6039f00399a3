from .core import (
    ACCUM_DTYPE,
    STORAGE_DTYPE,
    ParamState,
    as_storage,
    cosine_lr,
    dropout,
    dropout_backward,
    ensure_finite,
    linear,
    linear_backward,
    mse_loss,
    relu,
    relu_backward,
)
from .layers import BatchNorm, Dropout, Linear, ReLU, uniform_init
from .optim import Adam

__all__ = [
    "ACCUM_DTYPE",
    "STORAGE_DTYPE",
    "Adam",
    "BatchNorm",
    "Dropout",
    "Linear",
    "ParamState",
    "ReLU",
    "as_storage",
    "cosine_lr",
    "dropout",
    "dropout_backward",
    "ensure_finite",
    "linear",
    "linear_backward",
    "mse_loss",
    "relu",
    "relu_backward",
    "uniform_init",
]
