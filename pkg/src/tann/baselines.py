"""Factories for the comparison and text-classification architectures.

Each architecture can be built standalone or embedded in every node of a
balanced trie.  The four gate-benchmark models come with their fixed benchmark
training configurations (``make_comparison_config``).
"""

from __future__ import annotations

from dataclasses import dataclass

from .exceptions import ContractError
from .nn import losses
from .nn.layers import (
    ComplexDense,
    Conv1D,
    Dense,
    Dropout,
    Magnitude,
    Recurrent,
    ReLU,
    Sigmoid,
)
from .nn.network import Network, init_params
from .training import TrainConfig
from .trie import BitConsume, Trie, build_trie_with

SIMPLE_DROPOUT = "simple_dropout"
TINY_CNN = "tiny_cnn"
TINY_RNN = "tiny_rnn"
COMPLEX = "complex"
TEXT_FFN = "text_ffn"
TEXT_RNN = "text_rnn"

GATE_KINDS = (SIMPLE_DROPOUT, TINY_CNN, TINY_RNN, COMPLEX)
TEXT_KINDS = (TEXT_FFN, TEXT_RNN)

# text RNN reads the document vector as a fixed number of steps
_TEXT_RNN_STEPS = 20
_TEXT_RNN_HIDDEN = 128


@dataclass(frozen=True)
class ArchSpec:
    kind: str
    input_size: int = 2
    num_classes: int = 2
    dropout: bool = False

    def __post_init__(self):
        if self.kind not in GATE_KINDS + TEXT_KINDS:
            raise ContractError(f"unknown architecture kind {self.kind!r}")
        if self.kind in GATE_KINDS and self.input_size != 2:
            raise ContractError(f"{self.kind} expects input_size 2")
        if self.input_size < 1 or self.num_classes < 2:
            raise ContractError("input_size >= 1 and num_classes >= 2 required")


def make_network(spec: ArchSpec, seed: int) -> Network:
    """Build and initialize one instance of the architecture."""
    if spec.kind == SIMPLE_DROPOUT:
        layers = [Dense(2, 4), Sigmoid(), Dropout(0.5), Dense(4, 1), Sigmoid()]
        net = Network(layers, loss=losses.BCE)
    elif spec.kind == TINY_CNN:
        # width-2 input, kernel 2, one channel: conv output is a single value
        layers = [Conv1D(2), Sigmoid(), Dense(1, 1), Sigmoid()]
        net = Network(layers, loss=losses.BCE)
    elif spec.kind == TINY_RNN:
        # the 2-element input is a sequence of two 1-wide steps
        layers = [Recurrent(1, 2), Dense(2, 1), Sigmoid()]
        net = Network(layers, loss=losses.BCE)
    elif spec.kind == COMPLEX:
        layers = [ComplexDense(2, 2), ReLU(), ComplexDense(2, 1), Magnitude()]
        net = Network(layers, loss=losses.MSE)
    elif spec.kind == TEXT_FFN:
        layers = [Dense(spec.input_size, 1024), ReLU()]
        if spec.dropout:
            layers.append(Dropout(0.5))
        layers += [Dense(1024, 512), ReLU()]
        if spec.dropout:
            layers.append(Dropout(0.5))
        layers.append(Dense(512, spec.num_classes))
        net = Network(layers, loss=losses.CROSS_ENTROPY)
    else:  # TEXT_RNN
        step = -(-spec.input_size // _TEXT_RNN_STEPS)
        layers = [Recurrent(step, _TEXT_RNN_HIDDEN)]
        if spec.dropout:
            layers.append(Dropout(0.5))
        layers.append(Dense(_TEXT_RNN_HIDDEN, spec.num_classes))
        net = Network(layers, loss=losses.CROSS_ENTROPY)
    return init_params(net, seed)


def make_comparison_config(kind: str) -> TrainConfig:
    """The fixed gate-benchmark training setup for each architecture."""
    if kind not in GATE_KINDS:
        raise ContractError(f"{kind!r} is not one of the comparison architectures")
    if kind == COMPLEX:
        return TrainConfig(
            lr=0.2, epochs=10, optimizer="adam", loss=losses.MSE, routing=BitConsume()
        )
    return TrainConfig(
        lr=0.2, epochs=10, optimizer="sgd", loss=losses.BCE, routing=BitConsume()
    )


def embed_in_trie(spec: ArchSpec, depth: int, seed: int = 0) -> Trie:
    """Balanced trie with one instance of the architecture per node."""
    if depth < 1:
        raise ContractError(f"embedding needs depth >= 1, got {depth}")
    return build_trie_with(lambda s: make_network(spec, s), depth, seed)
