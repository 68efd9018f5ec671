"""Training and inference loops for tries and standalone networks.

Per sample, only the terminal node of the route is forwarded and
backpropagated; what distinguishes the two step modes is which optimizers
get stepped afterwards:

* ``route-local`` steps only the terminal node's optimizer;
* ``global`` steps every node's optimizer each sample.  For nodes that saw
  no data this feeds a zero gradient, which on fresh (zero-moment) Adam
  states is an exact no-op but applies residual moment decay to nodes that
  were trained earlier.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .datasets import Dataset
from .exceptions import ContractError, StructureError
from .metrics import MetricsReport, confusion, report
from .nn import losses
from .nn.network import Network, flat_grads, target_vector, zero_grads
from .nn.optim import make_optimizer
from .trie import BitConsume, Trie, route, traverse_trie

ROUTE_LOCAL = "route-local"
GLOBAL_STEP = "global"

TRACE_CSV_HEADER = "epoch,mean_loss,last_loss"


@dataclass
class TrainConfig:
    lr: float = 0.01
    epochs: int = 10
    optimizer: str = "adam"  # or "sgd"
    loss: str = losses.BCE
    step_mode: str = ROUTE_LOCAL
    routing: object = field(default_factory=BitConsume)
    batch_size: int = 1
    seed: int = 0
    shuffle: bool = False
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.epochs < 1:
            raise ContractError(f"epochs must be >= 1, got {self.epochs}")
        if self.lr <= 0:
            raise ContractError(f"lr must be positive, got {self.lr}")
        if self.batch_size < 1:
            raise ContractError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.optimizer not in ("sgd", "adam"):
            raise ContractError(f"unknown optimizer {self.optimizer!r}")
        if self.loss not in losses.LOSS_KINDS:
            raise ContractError(f"unknown loss {self.loss!r}")
        if self.step_mode not in (ROUTE_LOCAL, GLOBAL_STEP):
            raise ContractError(f"unknown step mode {self.step_mode!r}")


@dataclass
class EpochRecord:
    epoch: int
    mean_loss: float
    last_loss: float
    samples_per_leaf: dict = field(default_factory=dict)  # node id -> count


@dataclass
class TrainReport:
    records: list
    model: object  # the trained Trie or Network
    seconds: float

    @property
    def final_mean_loss(self) -> float:
        return self.records[-1].mean_loss


def _optimizer_for(net: Network, cfg: TrainConfig):
    return make_optimizer(
        net.params(), cfg.optimizer, cfg.lr,
        beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.epsilon,
    )


def _epoch_order(rng, n, shuffle):
    return rng.permutation(n) if shuffle else np.arange(n)


def train_tann(trie: Trie, data: Dataset, cfg: TrainConfig) -> TrainReport:
    """Online training: route each sample, train its terminal node."""
    if trie.is_empty:
        raise StructureError("cannot train an empty trie")
    data.validate()
    start = time.perf_counter()
    node_ids = traverse_trie(trie)
    opts = {i: _optimizer_for(trie.nodes[i].net, cfg) for i in node_ids}
    rng = np.random.default_rng(cfg.seed)
    records = []
    for epoch in range(1, cfg.epochs + 1):
        sample_losses = []
        per_leaf: dict[int, int] = {}
        for i in _epoch_order(rng, len(data), cfg.shuffle):
            x, label = data.samples[i]
            nid = route(trie, x, cfg.routing)[-1]
            node = trie.nodes[nid]
            out, cache = node.net.forward(x, train=True, rng=rng)
            target = target_vector(cfg.loss, label, out.shape[0])
            sample_losses.append(losses.loss_value(cfg.loss, out, target))
            grads = flat_grads(node.net.backward(cache, target))
            if cfg.step_mode == ROUTE_LOCAL:
                opts[nid].step(grads)
            else:
                for m in node_ids:
                    opts[m].step(grads if m == nid else zero_grads(trie.nodes[m].net))
            per_leaf[nid] = per_leaf.get(nid, 0) + 1
        records.append(
            EpochRecord(
                epoch=epoch,
                mean_loss=float(np.mean(sample_losses)),
                last_loss=sample_losses[-1],
                samples_per_leaf=per_leaf,
            )
        )
    return TrainReport(records=records, model=trie, seconds=time.perf_counter() - start)


def train_single(net: Network, data: Dataset, cfg: TrainConfig) -> TrainReport:
    """Same loop as train_tann without any routing: one network sees all."""
    data.validate()
    start = time.perf_counter()
    opt = _optimizer_for(net, cfg)
    rng = np.random.default_rng(cfg.seed)
    records = []
    for epoch in range(1, cfg.epochs + 1):
        sample_losses = []
        for i in _epoch_order(rng, len(data), cfg.shuffle):
            x, label = data.samples[i]
            out, cache = net.forward(x, train=True, rng=rng)
            target = target_vector(cfg.loss, label, out.shape[0])
            sample_losses.append(losses.loss_value(cfg.loss, out, target))
            opt.step(flat_grads(net.backward(cache, target)))
        records.append(
            EpochRecord(
                epoch=epoch,
                mean_loss=float(np.mean(sample_losses)),
                last_loss=sample_losses[-1],
                samples_per_leaf={},
            )
        )
    return TrainReport(records=records, model=net, seconds=time.perf_counter() - start)


def train_tann_batched(trie: Trie, data: Dataset, cfg: TrainConfig) -> TrainReport:
    """Mini-batch training for multiclass scores.

    Each batch fills a zero-initialized (B x num_classes) output block row by
    row from the routed leaf networks, takes the mean cross-entropy over the
    block, backpropagates each row's share into its own leaf, and steps the
    optimizers of the touched nodes once per batch.
    """
    if cfg.loss != losses.CROSS_ENTROPY:
        raise ContractError("batched training requires the cross-entropy loss")
    if trie.is_empty:
        raise StructureError("cannot train an empty trie")
    data.validate()
    start = time.perf_counter()
    opts = {i: _optimizer_for(trie.nodes[i].net, cfg) for i in traverse_trie(trie)}
    rng = np.random.default_rng(cfg.seed)
    k = data.num_classes
    records = []
    for epoch in range(1, cfg.epochs + 1):
        order = _epoch_order(rng, len(data), cfg.shuffle)
        row_losses = []
        last_batch_loss = float("nan")
        per_leaf: dict[int, int] = {}
        for lo in range(0, len(order), cfg.batch_size):
            batch = order[lo : lo + cfg.batch_size]
            b = len(batch)
            block = np.zeros((b, k))
            routed = []
            for j, i in enumerate(batch):
                x, label = data.samples[i]
                nid = route(trie, x, cfg.routing)[-1]
                out, cache = trie.nodes[nid].net.forward(x, train=True, rng=rng)
                if out.shape[0] != k:
                    raise ContractError(
                        f"node output width {out.shape[0]} != num_classes {k}"
                    )
                block[j] = out
                routed.append((nid, cache, label))
                per_leaf[nid] = per_leaf.get(nid, 0) + 1
            batch_losses = [
                losses.loss_value(losses.CROSS_ENTROPY, block[j], label)
                for j, (_, _, label) in enumerate(routed)
            ]
            row_losses.extend(batch_losses)
            last_batch_loss = float(np.mean(batch_losses))
            acc: dict[int, list] = {}
            for nid, cache, label in routed:
                grads = flat_grads(trie.nodes[nid].net.backward(cache, label))
                if nid in acc:
                    for a, g in zip(acc[nid], grads):
                        a += g
                else:
                    acc[nid] = grads
            for nid in sorted(acc):
                opts[nid].step([g / b for g in acc[nid]])
        records.append(
            EpochRecord(
                epoch=epoch,
                mean_loss=float(np.mean(row_losses)),
                last_loss=last_batch_loss,
                samples_per_leaf=per_leaf,
            )
        )
    return TrainReport(records=records, model=trie, seconds=time.perf_counter() - start)


def infer(trie: Trie, x, policy) -> np.ndarray:
    """Infer-mode forward of the network at the route's terminal node."""
    nid = route(trie, x, policy)[-1]
    out, _ = trie.nodes[nid].net.forward(x)
    return out


def _model_output(model, x, policy) -> tuple[np.ndarray, str]:
    if isinstance(model, Trie):
        nid = route(model, x, policy)[-1]
        net = model.nodes[nid].net
    else:
        net = model
    out, _ = net.forward(x)
    return out, net.loss


def predict_label(out: np.ndarray, threshold: float = 0.5) -> int:
    """One sigmoid unit thresholded for binary, argmax of scores otherwise."""
    if out.shape[0] == 1:
        return int(out[0] >= threshold)
    return int(np.argmax(out))


def evaluate(model, data: Dataset, policy=None, threshold: float = 0.5) -> MetricsReport:
    """Accuracy, weighted F1, confusion matrix and mean loss on a dataset."""
    if len(data) == 0:
        raise ContractError("cannot evaluate on an empty dataset")
    if policy is None:
        policy = BitConsume()
    preds, labels, sample_losses = [], [], []
    for x, label in data.samples:
        out, loss_kind = _model_output(model, x, policy)
        preds.append(predict_label(out, threshold))
        labels.append(label)
        target = target_vector(loss_kind, label, out.shape[0])
        sample_losses.append(losses.loss_value(loss_kind, out, target))
    cm = confusion(preds, labels, data.num_classes)
    return report(cm, mean_loss=float(np.mean(sample_losses)))


def trace_csv(records) -> str:
    """Per-epoch loss trace with the fixed ``epoch,mean_loss,last_loss`` header."""
    lines = [TRACE_CSV_HEADER]
    for r in records:
        lines.append(f"{r.epoch},{r.mean_loss!r},{r.last_loss!r}")
    return "\n".join(lines) + "\n"


def config_for_gate_tann(epochs: int = 200, lr: float = 0.01, seed: int = 1,
                         step_mode: str = ROUTE_LOCAL) -> TrainConfig:
    """Default gate-benchmark setup: Adam + BCE + bit-consume routing."""
    return TrainConfig(lr=lr, epochs=epochs, optimizer="adam", loss=losses.BCE,
                       step_mode=step_mode, routing=BitConsume(), seed=seed)


def with_seed(cfg: TrainConfig, seed: int) -> TrainConfig:
    return replace(cfg, seed=seed)
