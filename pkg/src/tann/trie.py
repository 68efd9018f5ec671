"""Binary trie of networks: construction, routing, stats, cost, snapshots.

Nodes live in an arena (a flat list) and reference children by index, so a
trie is a plain value with no parent links or cycles.  Node initialization
seeds are derived from the build seed and the node's heap position (root=1,
children 2i and 2i+1), so deepening a trie never reshuffles the parameters
of nodes that already existed.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import ContractError, StructureError
from .nn import losses
from .nn.layers import (
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
from .nn.network import Network, init_params, mini_nn

__all__ = [
    "TrieNode",
    "Trie",
    "BitConsume",
    "FeatureThreshold",
    "CostModel",
    "StructuralStats",
    "CostEstimate",
    "node_seed",
    "build_trie",
    "build_trie_with",
    "traverse_trie",
    "route",
    "leaf_of",
    "assign_feature_indices",
    "structural_stats",
    "estimate_cost",
    "aggregate_path_inference",
    "save_trie",
    "load_trie",
]


@dataclass
class TrieNode:
    net: Network
    left: Optional[int] = None
    right: Optional[int] = None
    feature_index: int = 0


@dataclass
class Trie:
    nodes: list[TrieNode] = field(default_factory=list)
    root: Optional[int] = None
    depth: int = 0

    def __len__(self):
        return len(self.nodes)

    @property
    def is_empty(self):
        return self.root is None


@dataclass(frozen=True)
class BitConsume:
    """Consume input entries as bits: left on 0, right otherwise.

    Routing stops when the bits run out or the required child is absent;
    the node reached at that point serves the input.
    """


@dataclass(frozen=True)
class FeatureThreshold:
    """Read the node's designated feature; left if value < threshold,
    right on ties or above.  Stops at a leaf (or where a child is absent)."""

    threshold: float = 0.5


@dataclass(frozen=True)
class CostModel:
    neurons: int
    layers: int
    per_neuron_cost: float

    def __post_init__(self):
        if self.neurons <= 0 or self.layers <= 0 or self.per_neuron_cost < 0:
            raise ContractError("cost model fields must be positive")


@dataclass(frozen=True)
class StructuralStats:
    node_count: int
    leaf_count: int
    height: int  # nodes on the longest root-to-leaf path (single node -> 1)
    is_balanced: bool


@dataclass(frozen=True)
class CostEstimate:
    t_node: float
    per_inference: float


def node_seed(seed: int, position: int) -> int:
    """Derive a node's init seed from the build seed and heap position."""
    ss = np.random.SeedSequence([seed % 2**63, position])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def build_trie_with(net_factory: Callable[[int], Network], depth: int, seed: int = 0) -> Trie:
    """Balanced full binary trie of 2^depth - 1 nodes; depth 0 is empty.

    ``net_factory(node_seed)`` builds one node's network.
    """
    if depth < 0:
        raise ContractError(f"depth must be >= 0, got {depth}")
    trie = Trie(depth=depth)

    def grow(levels: int, position: int) -> Optional[int]:
        if levels == 0:
            return None
        node = TrieNode(net=net_factory(node_seed(seed, position)))
        idx = len(trie.nodes)
        trie.nodes.append(node)  # arena order = pre-order
        node.left = grow(levels - 1, 2 * position)
        node.right = grow(levels - 1, 2 * position + 1)
        return idx

    trie.root = grow(depth, 1)
    return trie


def build_trie(input_size: int, hidden_size: int, depth: int, seed: int = 0) -> Trie:
    """Standard build: every node holds an independently initialized
    Dense -> ReLU -> Dense -> Sigmoid network with BCE loss."""
    return build_trie_with(
        lambda s: init_params(mini_nn(input_size, hidden_size), s), depth, seed
    )


def traverse_trie(trie: Trie) -> list[int]:
    """Pre-order node ids (node, left subtree, right subtree)."""
    order: list[int] = []

    def walk(idx: Optional[int]):
        if idx is None:
            return
        order.append(idx)
        walk(trie.nodes[idx].left)
        walk(trie.nodes[idx].right)

    walk(trie.root)
    return order


def _feature_value(node: TrieNode, x: np.ndarray) -> float:
    if node.feature_index >= x.shape[0]:
        raise ContractError(
            f"feature index {node.feature_index} out of range for input width {x.shape[0]}"
        )
    return float(x[node.feature_index])


def route(trie: Trie, x, policy) -> list[int]:
    """Walk root-to-terminal under the policy; returns the visited node ids."""
    if trie.is_empty:
        raise StructureError("cannot route through an empty trie")
    x = np.asarray(x, dtype=np.float64)
    path = [trie.root]
    node = trie.nodes[trie.root]
    if isinstance(policy, BitConsume):
        if not np.all((x == 0.0) | (x == 1.0)):
            raise ContractError("bit-consume routing requires entries in {0, 1}")
        for val in x:
            nxt = node.left if val == 0.0 else node.right
            if nxt is None:
                break
            path.append(nxt)
            node = trie.nodes[nxt]
        return path
    if isinstance(policy, FeatureThreshold):
        while True:
            if node.left is None and node.right is None:
                return path
            f = _feature_value(node, x)
            nxt = node.left if f < policy.threshold else node.right
            if nxt is None:
                return path
            path.append(nxt)
            node = trie.nodes[nxt]
    raise ContractError(f"unknown routing policy {policy!r}")


def leaf_of(trie: Trie, x, policy) -> int:
    """Terminal node of route()."""
    return route(trie, x, policy)[-1]


def assign_feature_indices(trie: Trie, strategy) -> Trie:
    """Set each node's routing feature.

    ``strategy`` is either ``("cycle", input_dim)``, where the feature index
    cycles with node depth, or ``("explicit", {node_id: feature_index})`` covering
    every node.
    """
    kind = strategy[0]
    if kind == "cycle":
        input_dim = int(strategy[1])
        if input_dim < 1:
            raise ContractError("input_dim must be >= 1")

        def walk(idx, depth):
            if idx is None:
                return
            trie.nodes[idx].feature_index = depth % input_dim
            walk(trie.nodes[idx].left, depth + 1)
            walk(trie.nodes[idx].right, depth + 1)

        walk(trie.root, 0)
        return trie
    if kind == "explicit":
        mapping = strategy[1]
        missing = [i for i in traverse_trie(trie) if i not in mapping]
        if missing:
            raise ContractError(f"explicit feature map missing nodes {missing}")
        for i in traverse_trie(trie):
            trie.nodes[i].feature_index = int(mapping[i])
        return trie
    raise ContractError(f"unknown feature assignment strategy {kind!r}")


def structural_stats(trie: Trie) -> StructuralStats:
    """Node/leaf counts, height (nodes on the longest root-to-leaf path),
    and height-balance: every node's left and right subtree heights differ
    by at most one (an absent child counts as height 0)."""
    if trie.is_empty:
        return StructuralStats(0, 0, 0, True)
    node_count = 0
    leaf_count = 0
    balanced = True

    def walk(idx) -> int:
        nonlocal node_count, leaf_count, balanced
        if idx is None:
            return 0
        node_count += 1
        node = trie.nodes[idx]
        if node.left is None and node.right is None:
            leaf_count += 1
            return 1
        hl = walk(node.left)
        hr = walk(node.right)
        if abs(hl - hr) > 1:
            balanced = False
        return 1 + max(hl, hr)

    height = walk(trie.root)
    return StructuralStats(
        node_count=node_count,
        leaf_count=leaf_count,
        height=height,
        is_balanced=balanced,
    )


def estimate_cost(trie: Trie, cm: CostModel) -> CostEstimate:
    """Per-node cost N*L*C; per-inference cost scales with the deepest
    root-to-leaf walk (= height for balanced tries)."""
    t_node = cm.neurons * cm.layers * cm.per_neuron_cost
    stats = structural_stats(trie)
    return CostEstimate(t_node=t_node, per_inference=stats.height * t_node)


def aggregate_path_inference(trie: Trie, x, policy) -> np.ndarray:
    """Elementwise mean of infer-mode outputs of every node on the route."""
    path = route(trie, x, policy)
    outputs = []
    for idx in path:
        out, _ = trie.nodes[idx].net.forward(x)
        outputs.append(out)
    width = outputs[0].shape[0]
    if any(o.shape[0] != width for o in outputs):
        raise ContractError("route networks disagree on output width")
    return np.mean(outputs, axis=0)


# ----------------------------------------------------------------- snapshots
#
# Binary snapshot, little-endian throughout:
#   magic "TANNSNAP", u32 version, i64 root (-1 = empty), u32 depth,
#   u32 node count, then per node (arena order):
#     i64 left, i64 right, u32 feature_index, u8 loss tag, u32 layer count,
#     per layer: u8 kind tag + kind-specific shape ints + raw parameter
#     bytes (float64 / complex128 little-endian).
# Exact byte round-trips: parameters are written bit-for-bit.

_MAGIC = b"TANNSNAP"
_VERSION = 1

_LOSS_TAGS = {losses.BCE: 0, losses.MSE: 1, losses.CROSS_ENTROPY: 2}
_LOSS_FROM_TAG = {v: k for k, v in _LOSS_TAGS.items()}

_L_DENSE, _L_RELU, _L_SIGMOID, _L_IDENTITY = 0, 1, 2, 3
_L_DROPOUT, _L_RECURRENT, _L_CONV1D, _L_CPLXDENSE, _L_MAGNITUDE = 4, 5, 6, 7, 8


def _le(a: np.ndarray) -> bytes:
    return np.ascontiguousarray(a).astype(a.dtype.newbyteorder("<")).tobytes()


def _write_layer(out: list[bytes], layer):
    if isinstance(layer, Dense):
        out.append(struct.pack("<BII", _L_DENSE, *layer.W.shape))
        out.append(_le(layer.W))
        out.append(_le(layer.b))
    elif isinstance(layer, ReLU):
        out.append(struct.pack("<B", _L_RELU))
    elif isinstance(layer, Sigmoid):
        out.append(struct.pack("<B", _L_SIGMOID))
    elif isinstance(layer, Identity):
        out.append(struct.pack("<B", _L_IDENTITY))
    elif isinstance(layer, Dropout):
        out.append(struct.pack("<Bd", _L_DROPOUT, layer.p))
    elif isinstance(layer, Recurrent):
        out.append(struct.pack("<BII", _L_RECURRENT, layer.step_width, layer.hidden_size))
        out.append(_le(layer.W_ih))
        out.append(_le(layer.W_hh))
        out.append(_le(layer.b))
    elif isinstance(layer, Conv1D):
        out.append(struct.pack("<BI", _L_CONV1D, layer.kernel.shape[0]))
        out.append(_le(layer.kernel))
        out.append(_le(layer.bias))
    elif isinstance(layer, ComplexDense):
        out.append(struct.pack("<BII", _L_CPLXDENSE, *layer.W.shape))
        out.append(_le(layer.W))
        out.append(_le(layer.b))
    elif isinstance(layer, Magnitude):
        out.append(struct.pack("<B", _L_MAGNITUDE))
    else:
        raise ContractError(f"cannot snapshot layer of type {type(layer).__name__}")


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def unpack(self, fmt):
        vals = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += struct.calcsize(fmt)
        return vals

    def array(self, shape, dtype):
        dt = np.dtype(dtype).newbyteorder("<")
        n = int(np.prod(shape)) * dt.itemsize
        arr = np.frombuffer(self.data[self.pos : self.pos + n], dtype=dt)
        self.pos += n
        return arr.reshape(shape).astype(dtype)


def _read_layer(r: _Reader):
    (tag,) = r.unpack("<B")
    if tag == _L_DENSE:
        rows, cols = r.unpack("<II")
        layer = Dense(cols, rows)
        layer.W[...] = r.array((rows, cols), np.float64)
        layer.b[...] = r.array((rows,), np.float64)
        return layer
    if tag == _L_RELU:
        return ReLU()
    if tag == _L_SIGMOID:
        return Sigmoid()
    if tag == _L_IDENTITY:
        return Identity()
    if tag == _L_DROPOUT:
        (p,) = r.unpack("<d")
        return Dropout(p)
    if tag == _L_RECURRENT:
        step, hidden = r.unpack("<II")
        layer = Recurrent(step, hidden)
        layer.W_ih[...] = r.array((hidden, step), np.float64)
        layer.W_hh[...] = r.array((hidden, hidden), np.float64)
        layer.b[...] = r.array((hidden,), np.float64)
        return layer
    if tag == _L_CONV1D:
        (k,) = r.unpack("<I")
        layer = Conv1D(k)
        layer.kernel[...] = r.array((k,), np.float64)
        layer.bias[...] = r.array((1,), np.float64)
        return layer
    if tag == _L_CPLXDENSE:
        rows, cols = r.unpack("<II")
        layer = ComplexDense(cols, rows)
        layer.W[...] = r.array((rows, cols), np.complex128)
        layer.b[...] = r.array((rows,), np.complex128)
        return layer
    if tag == _L_MAGNITUDE:
        return Magnitude()
    raise ContractError(f"unknown layer tag {tag} in snapshot")


def save_trie(trie: Trie, path) -> None:
    chunks: list[bytes] = [
        _MAGIC,
        struct.pack(
            "<IqII",
            _VERSION,
            -1 if trie.root is None else trie.root,
            trie.depth,
            len(trie.nodes),
        ),
    ]
    for node in trie.nodes:
        chunks.append(
            struct.pack(
                "<qqIBI",
                -1 if node.left is None else node.left,
                -1 if node.right is None else node.right,
                node.feature_index,
                _LOSS_TAGS[node.net.loss],
                len(node.net.layers),
            )
        )
        for layer in node.net.layers:
            _write_layer(chunks, layer)
    blob = b"".join(chunks)
    with open(path, "wb") as fh:
        fh.write(blob)


def load_trie(path) -> Trie:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[: len(_MAGIC)] != _MAGIC:
        raise ContractError("not a trie snapshot (bad magic header)")
    r = _Reader(data)
    r.pos = len(_MAGIC)
    version, root, depth, count = r.unpack("<IqII")
    if version != _VERSION:
        raise ContractError(f"unsupported snapshot version {version}")
    trie = Trie(depth=depth, root=None if root < 0 else root)
    for _ in range(count):
        left, right, fi, loss_tag, n_layers = r.unpack("<qqIBI")
        layers = [_read_layer(r) for _ in range(n_layers)]
        net = Network(layers, loss=_LOSS_FROM_TAG[loss_tag])
        trie.nodes.append(
            TrieNode(
                net=net,
                left=None if left < 0 else left,
                right=None if right < 0 else right,
                feature_index=fi,
            )
        )
    return trie
