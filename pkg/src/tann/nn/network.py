"""Network container: an ordered layer stack plus a loss kind."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..exceptions import ContractError, DimensionError
from . import losses
from .layers import Dense, ReLU, Sigmoid

INFER = "infer"
TRAIN = "train"


@dataclass
class ForwardCache:
    """Per-layer contexts recorded by a forward pass, for backward."""

    net_id: int
    train: bool
    x: np.ndarray
    contexts: list = field(default_factory=list)
    output: np.ndarray | None = None


class Network:
    """Sequence of layers with a single loss kind attached.

    Networks are plain values: forward never mutates them, so the same
    instance can serve many threads as long as parameter updates are
    serialized by the trainer.
    """

    def __init__(self, layers, loss: str = losses.BCE):
        if loss not in losses.LOSS_KINDS:
            raise ContractError(f"unknown loss kind {loss!r}")
        self.layers = list(layers)
        self.loss = loss

    def params(self) -> list[np.ndarray]:
        """Flat parameter list; order is stable (layer by layer)."""
        out = []
        for layer in self.layers:
            out.extend(layer.params())
        return out

    def param_count(self) -> int:
        return sum(p.size for p in self.params())

    def forward(self, x, train: bool = False, rng=None):
        """Run the stack on a vector; returns (output, cache).

        Infer mode is deterministic: dropout layers pass their input through
        unchanged and record no mask.
        """
        x = np.asarray(x)
        if not np.iscomplexobj(x):
            x = x.astype(np.float64)
        cache = ForwardCache(net_id=id(self), train=train, x=x.copy())
        h: Any = x
        for i, layer in enumerate(self.layers):
            try:
                h, ctx = layer.forward(h, train, rng)
            except DimensionError as err:
                raise DimensionError(f"layer {i}: {err}") from None
            cache.contexts.append(ctx)
        out = np.asarray(h)
        if np.iscomplexobj(out):
            raise DimensionError(
                "network output is complex; add a Magnitude layer before the loss"
            )
        if not np.all(np.isfinite(out)):
            raise ContractError("network produced a non-finite output")
        cache.output = out
        return out, cache

    def backward(self, cache: ForwardCache, target):
        """Gradients of loss(output, target) w.r.t. every parameter.

        Returns one block per layer (a list of arrays shaped like that
        layer's params; empty for parameterless layers).
        """
        if cache.net_id != id(self) or len(cache.contexts) != len(self.layers):
            raise ContractError("cache does not belong to this network")
        if not cache.train:
            raise ContractError("backward requires a cache from a train-mode forward")
        grad = losses.loss_grad(self.loss, cache.output, target)
        blocks: list[list[np.ndarray]] = [[] for _ in self.layers]
        for i in range(len(self.layers) - 1, -1, -1):
            grad, param_grads = self.layers[i].backward(grad, cache.contexts[i])
            blocks[i] = param_grads
        return blocks

    def loss_value(self, pred, target) -> float:
        return losses.loss_value(self.loss, pred, target)

    def __repr__(self):
        names = ", ".join(type(l).__name__ for l in self.layers)
        return f"Network([{names}], loss={self.loss!r})"


def flat_grads(blocks) -> list[np.ndarray]:
    """Flatten per-layer gradient blocks to align with Network.params()."""
    return [g for block in blocks for g in block]


def zero_grads(net: Network) -> list[np.ndarray]:
    """Gradient list of zeros shaped like net.params()."""
    return [np.zeros_like(p) for p in net.params()]


def init_params(net: Network, seed: int) -> Network:
    """Redraw all parameters deterministically from ``seed``; returns ``net``.

    Weights are Glorot-uniform in +/- sqrt(6 / (fan_in + fan_out)); biases
    are zero; complex weights draw real and imaginary parts independently,
    scaled by 1/sqrt(2).
    """
    rng = np.random.default_rng(seed)
    for layer in net.layers:
        layer.init(rng)
    return net


def mini_nn(input_size: int, hidden_size: int) -> Network:
    """The per-trie-node network: Dense -> ReLU -> Dense -> Sigmoid, BCE."""
    return Network(
        [Dense(input_size, hidden_size), ReLU(), Dense(hidden_size, 1), Sigmoid()],
        loss=losses.BCE,
    )


def target_vector(loss_kind: str, label: int, width: int):
    """Represent an integer class label as the target the loss expects."""
    if loss_kind == losses.CROSS_ENTROPY:
        return label
    if width == 1:
        return np.array([float(label)])
    t = np.zeros(width)
    t[label] = 1.0
    return t
