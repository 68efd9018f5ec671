"""Training loops: routing-local updates, batched updates, determinism."""

import numpy as np
import pytest

from tann.datasets import Dataset, gate_dataset
from tann.exceptions import ContractError, StructureError
from tann.nn import losses
from tann.nn.network import init_params, mini_nn
from tann.trie import BitConsume, FeatureThreshold, build_trie, build_trie_with, leaf_of, node_seed
from tann.training import (
    GLOBAL_STEP,
    ROUTE_LOCAL,
    TRACE_CSV_HEADER,
    TrainConfig,
    config_for_gate_tann,
    evaluate,
    infer,
    trace_csv,
    train_single,
    train_tann,
    train_tann_batched,
)


def params_snapshot(trie):
    return [[p.copy() for p in n.net.params()] for n in trie.nodes]


def params_equal(a, b):
    return all(
        np.array_equal(pa, pb) for na, nb in zip(a, b) for pa, pb in zip(na, nb)
    )


def toy_text_dataset(num_classes=2):
    """10 separable 6-feature docs, 2 classes."""
    rng = np.random.default_rng(0)
    samples = []
    for i in range(10):
        label = i % 2
        x = np.zeros(6)
        base = 0 if label == 0 else 3
        x[base : base + 3] = rng.uniform(0.5, 1.0, size=3)
        samples.append((x, label))
    return Dataset(samples=samples, num_classes=num_classes, feature_width=6)


def scores_net_factory(in_w, hidden, k):
    from tann.nn.layers import Dense, ReLU
    from tann.nn.network import Network

    def make(seed):
        return init_params(
            Network([Dense(in_w, hidden), ReLU(), Dense(hidden, k)],
                    loss=losses.CROSS_ENTROPY),
            seed,
        )

    return make


# ------------------------------------------------------------------ configs


def test_config_validation():
    with pytest.raises(ContractError):
        TrainConfig(epochs=0)
    with pytest.raises(ContractError):
        TrainConfig(lr=0.0)
    with pytest.raises(ContractError):
        TrainConfig(batch_size=0)
    with pytest.raises(ContractError):
        TrainConfig(step_mode="sideways")


# ------------------------------------------------------------------- online


def test_xor_depth3_pinned_seed_reaches_4_of_4():
    data = gate_dataset("xor")
    trie = build_trie(2, 20, 3, seed=1)
    report = train_tann(trie, data, config_for_gate_tann(epochs=200, seed=1))
    assert len(report.records) == 200
    metrics = evaluate(trie, data, BitConsume())
    assert metrics.accuracy == 1.0
    # the trained trie answers the [0,1] pattern with a confident "1"
    assert infer(trie, [0.0, 1.0], BitConsume())[0] > 0.5


def test_train_tann_empty_trie_rejected():
    with pytest.raises(StructureError):
        train_tann(build_trie(2, 2, 0), gate_dataset("xor"), TrainConfig())


def test_route_local_never_touches_off_route_nodes():
    data = gate_dataset("xor")
    # depth 4: the four 2-bit patterns stop at level-2 internal nodes,
    # leaving every level-3/4 node untouched
    trie = build_trie(2, 4, 4, seed=2)
    routed = {leaf_of(trie, x, BitConsume()) for x, _ in data.samples}
    before = params_snapshot(trie)
    train_tann(trie, data, config_for_gate_tann(epochs=3, seed=2))
    after = params_snapshot(trie)
    for nid in range(len(trie)):
        same = all(np.array_equal(a, b) for a, b in zip(before[nid], after[nid]))
        assert same == (nid not in routed)


def test_global_step_first_sample_matches_route_local():
    data = Dataset(samples=[gate_dataset("xor").samples[0]], num_classes=2,
                   feature_width=2)
    a = build_trie(2, 4, 3, seed=5)
    b = build_trie(2, 4, 3, seed=5)
    train_tann(a, data, config_for_gate_tann(epochs=1, seed=5, step_mode=ROUTE_LOCAL))
    train_tann(b, data, config_for_gate_tann(epochs=1, seed=5, step_mode=GLOBAL_STEP))
    assert params_equal(params_snapshot(a), params_snapshot(b))


def test_global_step_leaves_fresh_nodes_unchanged_one_sample():
    data = Dataset(samples=[gate_dataset("xor").samples[0]], num_classes=2,
                   feature_width=2)
    trie = build_trie(2, 4, 3, seed=6)
    target_nid = leaf_of(trie, data.samples[0][0], BitConsume())
    before = params_snapshot(trie)
    train_tann(trie, data, config_for_gate_tann(epochs=1, seed=6,
                                                step_mode=GLOBAL_STEP))
    after = params_snapshot(trie)
    for nid in range(len(trie)):
        same = all(np.array_equal(a, b) for a, b in zip(before[nid], after[nid]))
        assert same == (nid != target_nid)


def test_global_step_applies_residual_decay_after_training():
    # two samples to the same leaf: after the second, other nodes are still
    # untouched, but the trained node's moments decay on later zero-grad steps
    data = gate_dataset("xor")
    trie = build_trie(2, 4, 3, seed=7)
    cfg = config_for_gate_tann(epochs=2, seed=7, step_mode=GLOBAL_STEP)
    r1 = train_tann(trie, data, cfg)
    assert len(r1.records) == 2


def test_training_is_bit_deterministic():
    data = gate_dataset("or")
    runs = []
    for _ in range(2):
        trie = build_trie(2, 8, 3, seed=3)
        rep = train_tann(trie, data, config_for_gate_tann(epochs=5, seed=3))
        runs.append((params_snapshot(trie), [r.mean_loss for r in rep.records],
                     [r.last_loss for r in rep.records]))
    assert params_equal(runs[0][0], runs[1][0])
    assert runs[0][1] == runs[1][1]
    assert runs[0][2] == runs[1][2]


def test_xor_depth3_one_pattern_per_leaf_each_epoch():
    data = gate_dataset("xor")
    trie = build_trie(2, 4, 3, seed=1)
    rep = train_tann(trie, data, config_for_gate_tann(epochs=3, seed=1))
    for record in rep.records:
        assert sorted(record.samples_per_leaf.values()) == [1, 1, 1, 1]
        assert sum(record.samples_per_leaf.values()) == len(data)


def test_mean_loss_is_mean_of_sample_losses():
    # with one sample, mean_loss == last_loss exactly
    data = Dataset(samples=[gate_dataset("and").samples[3]], num_classes=2,
                   feature_width=2)
    trie = build_trie(2, 4, 1, seed=0)
    rep = train_tann(trie, data, config_for_gate_tann(epochs=4, seed=0))
    for r in rep.records:
        assert r.mean_loss == r.last_loss


# ------------------------------------------------------------------- single


def test_single_net_learns_and_gate():
    data = gate_dataset("and")
    net = init_params(mini_nn(2, 20), 1)
    rep = train_single(net, data, config_for_gate_tann(epochs=200, seed=1))
    assert evaluate(net, data).accuracy == 1.0
    assert rep.final_mean_loss < 0.2


def test_tann_beats_single_on_xor_median_over_seeds():
    data = gate_dataset("xor")
    tann_losses, single_losses = [], []
    for seed in range(1, 6):
        cfg = config_for_gate_tann(epochs=10, seed=seed)
        trie = build_trie(2, 20, 3, seed=seed)
        tann_losses.append(train_tann(trie, data, cfg).final_mean_loss)
        net = init_params(mini_nn(2, 20), node_seed(seed, 1))
        single_losses.append(train_single(net, data, cfg).final_mean_loss)
    assert np.median(tann_losses) < np.median(single_losses)


def test_zero_epochs_is_a_precondition_error():
    with pytest.raises(ContractError):
        config_for_gate_tann(epochs=0)


# ------------------------------------------------------------------ batched


def test_batched_b1_matches_online_route_local_exactly():
    data = toy_text_dataset()
    factory = scores_net_factory(6, 5, 2)
    a = build_trie_with(factory, 2, seed=4)
    b = build_trie_with(factory, 2, seed=4)
    cfg = TrainConfig(lr=0.01, epochs=3, optimizer="adam",
                      loss=losses.CROSS_ENTROPY, routing=FeatureThreshold(),
                      batch_size=1, seed=4)
    ra = train_tann(a, data, cfg)
    rb = train_tann_batched(b, data, cfg)
    assert params_equal(params_snapshot(a), params_snapshot(b))
    assert [r.mean_loss for r in ra.records] == [r.mean_loss for r in rb.records]
    assert [r.last_loss for r in ra.records] == [r.last_loss for r in rb.records]


def test_batched_learns_toy_text_at_depth1():
    data = toy_text_dataset()
    trie = build_trie_with(scores_net_factory(6, 8, 2), 1, seed=9)
    cfg = TrainConfig(lr=0.01, epochs=50, optimizer="adam",
                      loss=losses.CROSS_ENTROPY, routing=FeatureThreshold(),
                      batch_size=4, seed=9, shuffle=True)
    train_tann_batched(trie, data, cfg)
    assert evaluate(trie, data, FeatureThreshold()).accuracy == 1.0


def test_batched_requires_cross_entropy():
    trie = build_trie(2, 4, 1)
    with pytest.raises(ContractError):
        train_tann_batched(trie, gate_dataset("xor"),
                           TrainConfig(loss=losses.BCE, batch_size=2))


def test_batched_leaf_accounting_sums_to_batch():
    data = toy_text_dataset()
    trie = build_trie_with(scores_net_factory(6, 4, 2), 2, seed=1)
    cfg = TrainConfig(lr=0.01, epochs=1, optimizer="adam",
                      loss=losses.CROSS_ENTROPY, routing=FeatureThreshold(),
                      batch_size=4, seed=1)
    rep = train_tann_batched(trie, data, cfg)
    assert sum(rep.records[0].samples_per_leaf.values()) == len(data)


# ---------------------------------------------------------------- inference


def test_infer_zero_weight_trie_outputs_half():
    trie = build_trie_with(lambda s: mini_nn(2, 4), 3, seed=0)
    assert infer(trie, [1.0, 0.0], BitConsume())[0] == pytest.approx(0.5)


def test_infer_wrong_width_is_contract_error():
    trie = build_trie(2, 4, 1, seed=0)
    with pytest.raises(ContractError):
        infer(trie, [1.0, 0.0, 1.0, 0.0], BitConsume())


# ----------------------------------------------------------------- evaluate


def test_evaluate_perfect_and_constant_predictors():
    data = gate_dataset("or")
    trie = build_trie(2, 20, 3, seed=1)
    train_tann(trie, data, config_for_gate_tann(epochs=200, seed=1))
    m = evaluate(trie, data, BitConsume())
    assert m.accuracy == 1.0 and m.weighted_f1 == 1.0
    # an untrained zero-weight net outputs 0.5 -> constant class 1
    net = mini_nn(2, 4)
    balanced = Dataset(samples=gate_dataset("xor").samples, num_classes=2,
                       feature_width=2)
    assert evaluate(net, balanced).accuracy == 0.5


def test_evaluate_agrees_with_bruteforce_metric_oracle():
    from oracles import oracle_metrics

    from tann.trie import route

    data = toy_text_dataset()
    trie = build_trie_with(scores_net_factory(6, 8, 2), 2, seed=3)
    cfg = TrainConfig(lr=0.01, epochs=10, optimizer="adam",
                      loss=losses.CROSS_ENTROPY, routing=FeatureThreshold(),
                      seed=3)
    train_tann(trie, data, cfg)
    m = evaluate(trie, data, FeatureThreshold())
    pairs = []
    for x, label in data.samples:
        nid = route(trie, x, FeatureThreshold())[-1]
        out, _ = trie.nodes[nid].net.forward(x)
        pairs.append((label, int(np.argmax(out))))
    acc_o, wf1_o = oracle_metrics(pairs, 2)
    assert abs(m.accuracy - acc_o) <= 1e-12
    assert abs(m.weighted_f1 - wf1_o) <= 1e-12


def test_evaluate_empty_dataset_rejected():
    empty = Dataset(samples=[], num_classes=2, feature_width=2)
    with pytest.raises(ContractError):
        evaluate(mini_nn(2, 4), empty)


# -------------------------------------------------------------------- trace


def test_trace_csv_header_and_rows():
    data = gate_dataset("xor")
    trie = build_trie(2, 4, 3, seed=1)
    rep = train_tann(trie, data, config_for_gate_tann(epochs=3, seed=1))
    text = trace_csv(rep.records)
    lines = text.strip().split("\n")
    assert lines[0] == TRACE_CSV_HEADER == "epoch,mean_loss,last_loss"
    assert len(lines) == 4
    assert lines[1].startswith("1,")
