"""Minimal neural-network engine: layers, losses, optimizers, gradients."""

from .gradcheck import finite_diff_gradients, max_relative_error
from .layers import (
    ComplexDense,
    Conv1D,
    Dense,
    Dropout,
    Identity,
    Magnitude,
    Recurrent,
    ReLU,
    Sigmoid,
)
from .losses import BCE, CROSS_ENTROPY, LOSS_KINDS, MSE, loss_grad, loss_value
from .network import (
    ForwardCache,
    Network,
    flat_grads,
    init_params,
    mini_nn,
    target_vector,
    zero_grads,
)
from .optim import SGD, Adam, make_optimizer

__all__ = [
    "Adam",
    "BCE",
    "CROSS_ENTROPY",
    "ComplexDense",
    "Conv1D",
    "Dense",
    "Dropout",
    "ForwardCache",
    "Identity",
    "LOSS_KINDS",
    "MSE",
    "Magnitude",
    "Network",
    "Recurrent",
    "ReLU",
    "SGD",
    "Sigmoid",
    "finite_diff_gradients",
    "flat_grads",
    "init_params",
    "loss_grad",
    "loss_value",
    "make_optimizer",
    "max_relative_error",
    "mini_nn",
    "target_vector",
    "zero_grads",
]
