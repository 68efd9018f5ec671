"""Acceptance suite: one test per release criterion.

Each test prints a ``[criterion NN] PASS/FAIL`` line (run with ``-s`` to see
them live; pytest shows them on failure regardless).  Budgets and tolerances
are pinned here, not configurable.

Criterion 9's full-corpus stretch check runs only when the environment
variable TANN_SMS_CORPUS points at a local label<TAB>text copy of the full
SMS corpus; the bundled miniature corpus stands in otherwise.
"""

import functools
import os
import time

import numpy as np
import pytest
from oracles import AdamOracle, oracle_metrics, sgd_oracle

from tann.cli import main as cli_main
from tann.datasets import gate_dataset
from tann.nn import finite_diff_gradients, max_relative_error
from tann.nn.network import init_params, mini_nn
from tann.nn.optim import SGD, Adam
from tann.metrics import accuracy as cm_accuracy
from tann.metrics import confusion
from tann.metrics import weighted_f1 as cm_weighted_f1
from tann.training import TrainConfig, evaluate, train_tann, train_single
from tann.trie import (
    BitConsume,
    CostModel,
    build_trie,
    estimate_cost,
    leaf_of,
    node_seed,
    structural_stats,
)

SEEDS = [1, 2, 3, 4, 5]


def criterion(number, title):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"[criterion {number:02d}] FAIL  {title}")
                raise
            print(f"[criterion {number:02d}] PASS  {title}")

        return wrapper

    return deco


def gate_cfg(epochs, seed):
    return TrainConfig(lr=0.01, epochs=epochs, optimizer="adam", loss="bce",
                       step_mode="route-local", routing=BitConsume(), seed=seed)


@criterion(1, "gradient soundness: analytic vs central differences, 100 nets")
def test_c1_gradient_soundness():
    from test_nn_engine import random_net

    start = time.perf_counter()
    rng = np.random.default_rng(42)
    for _ in range(100):
        net, x, target = random_net(rng)
        seed = int(rng.integers(0, 2**31))
        _, cache = net.forward(x, train=True, rng=np.random.default_rng(seed))
        analytic = net.backward(cache, target)
        numeric = finite_diff_gradients(net, x, target, step=1e-5, mask_seed=seed)
        assert max_relative_error(analytic, numeric) < 1e-4
    assert time.perf_counter() - start < 10.0


@criterion(2, "optimizer single steps match the hand-computed scalar oracle")
def test_c2_optimizer_oracle():
    p = np.array([1.0])
    SGD([p], lr=0.2).step([np.array([0.5])])
    assert abs(p[0] - sgd_oracle(1.0, 0.5, 0.2)) <= 1e-12

    p = np.array([0.0])
    opt = Adam([p], lr=0.001)
    oracle = AdamOracle(lr=0.001)
    opt.step([np.array([1.0])])
    expected = oracle.step(0.0, 1.0)
    assert abs(p[0] - expected) <= 1e-12
    opt.step([np.array([0.0])])  # second step, zero gradient
    expected = oracle.step(expected, 0.0)
    assert abs(p[0] - expected) <= 1e-12


@criterion(3, "trie structure for depths 1..10 and XOR leaf separation")
def test_c3_trie_structure():
    for d in range(1, 11):
        stats = structural_stats(build_trie(2, 3, d, seed=d))
        assert stats.node_count == 2**d - 1
        assert stats.leaf_count == 2 ** (d - 1)
        assert stats.is_balanced
    trie = build_trie(2, 20, 3, seed=1)
    leaves = {
        leaf_of(trie, x, BitConsume()) for x, _ in gate_dataset("xor").samples
    }
    assert len(leaves) == 4


@criterion(4, "XOR/AND/OR learnability at depth 3 within 200 epochs, seeds 1-5")
def test_c4_gate_learnability():
    for gate in ("xor", "and", "or"):
        data = gate_dataset(gate)
        for seed in SEEDS:
            trie = build_trie(2, 20, 3, seed=seed)
            train_tann(trie, data, gate_cfg(200, seed))
            assert evaluate(trie, data, BitConsume()).accuracy == 1.0, (gate, seed)


@criterion(5, "median final loss: depth-3 trie strictly below the single net")
def test_c5_tann_vs_single_ordering():
    start = time.perf_counter()
    data = gate_dataset("xor")
    tann_finals, single_finals = [], []
    for seed in SEEDS:
        cfg = gate_cfg(10, seed)
        trie = build_trie(2, 20, 3, seed=seed)
        tann_finals.append(train_tann(trie, data, cfg).final_mean_loss)
        net = init_params(mini_nn(2, 20), node_seed(seed, 1))
        single_finals.append(train_single(net, data, cfg).final_mean_loss)
    assert float(np.median(tann_finals)) < float(np.median(single_finals))
    assert time.perf_counter() - start < 5.0


@criterion(6, "depth insensitivity: depths 1..5 all reach 4/4 on XOR")
def test_c6_depth_insensitivity(tmp_path):
    out = tmp_path / "sweep"
    rc = cli_main(["depth-sweep", "xor", "--depths", "1,2,3,4,5",
                   "--epochs", "200", "--seeds", "1,2,3,4,5",
                   "--out", str(out)])
    assert rc == 0
    rows = (out / "sweep.csv").read_text().strip().split("\n")
    assert rows[0] == "depth,median_final_loss,min_accuracy"
    assert len(rows) == 6
    for row in rows[1:]:
        depth, _, min_acc = row.split(",")
        assert float(min_acc) == 1.0, f"depth {depth} below 4/4"


@criterion(7, "comparison harness: 8 runs with the benchmark configurations")
def test_c7_comparison_harness(tmp_path):
    start = time.perf_counter()
    out = tmp_path / "compare"
    rc = cli_main(["compare", "--arch", "all", "--out", str(out)])
    assert rc == 0
    rows = (out / "summary.csv").read_text().strip().split("\n")
    assert len(rows) == 9
    body = "\n".join(rows[1:])
    assert body.count("lr=0.2") == 8
    assert body.count("epochs=10") == 8
    assert body.count("optimizer=sgd;loss=bce") == 6  # three architectures x 2
    assert body.count("optimizer=adam;loss=mse") == 2  # the complex-valued net
    assert "simple_dropout" in body
    assert time.perf_counter() - start < 30.0


@criterion(8, "metrics match the brute-force oracle on 1000 random matrices")
def test_c8_metrics_equivalence():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        k = int(rng.integers(2, 7))
        n = int(rng.integers(1, 50))
        pairs = [(int(rng.integers(0, k)), int(rng.integers(0, k)))
                 for _ in range(n)]
        cm = confusion([p for _, p in pairs], [t for t, _ in pairs], k)
        acc_o, wf1_o = oracle_metrics(pairs, k)
        assert abs(cm_accuracy(cm) - acc_o) <= 1e-12
        assert abs(cm_weighted_f1(cm) - wf1_o) <= 1e-12
    labels = [0, 1, 2, 1, 0]
    perfect = confusion(labels, labels, 3)
    assert cm_accuracy(perfect) == 1.0
    assert cm_weighted_f1(perfect) == 1.0


@criterion(9, "text desk scale: bundled corpus, depth-1 accuracy and sweep rows")
def test_c9_text_desk_scale(tmp_path):
    for depth in range(1, 6):
        out = tmp_path / f"text-d{depth}"
        rc = cli_main(["text", "--model", "ffn", "--depth", str(depth),
                       "--epochs", "3", "--seed", "1", "--out", str(out)])
        assert rc == 0
        rows = (out / "metrics.csv").read_text().strip().split("\n")
        assert rows[0] == "model,config,depth,final_loss,accuracy,weighted_f1"
        assert len(rows) == 2
        acc = float(rows[1].split(",")[-2])
        if depth == 1:
            assert acc >= 0.90


def test_c9_stretch_full_sms_corpus(tmp_path):
    """Optional: only with a locally supplied full corpus (TANN_SMS_CORPUS)."""
    corpus = os.environ.get("TANN_SMS_CORPUS")
    if not corpus or not os.path.exists(corpus):
        pytest.skip("full SMS corpus not supplied; set TANN_SMS_CORPUS to run")
    out = tmp_path / "sms-full"
    rc = cli_main(["text", "--data", corpus, "--model", "ffn", "--depth", "1",
                   "--epochs", "3", "--seed", "1", "--out", str(out)])
    assert rc == 0
    rows = (out / "metrics.csv").read_text().strip().split("\n")
    acc = float(rows[1].split(",")[-2])
    assert abs(acc - 0.9883) <= 0.03


@criterion(10, "cost estimator: t_node 42, per-inference 126, exact")
def test_c10_cost_estimator():
    trie = build_trie(2, 20, 3, seed=0)
    est = estimate_cost(trie, CostModel(neurons=21, layers=2, per_neuron_cost=1.0))
    assert est.t_node == 42
    assert est.per_inference == 126


@criterion(11, "determinism: manifest replays reproduce every CSV byte for byte")
def test_c11_manifest_replay_determinism(tmp_path):
    runs = [
        ["gate", "xor", "--depth", "3", "--epochs", "5", "--seeds", "1,2"],
        ["depth-sweep", "and", "--depths", "1,2", "--epochs", "3",
         "--seeds", "1"],
        ["text", "--model", "ffn", "--depth", "1", "--epochs", "2",
         "--seed", "1"],
    ]
    for i, argv in enumerate(runs):
        first = tmp_path / f"run{i}"
        assert cli_main(argv + ["--out", str(first)]) == 0
        second = tmp_path / f"replay{i}"
        assert cli_main(["replay", str(first / "manifest.json"),
                         "--out", str(second)]) == 0
        csvs = sorted(p.name for p in first.iterdir() if p.suffix == ".csv")
        assert csvs
        for name in csvs:
            assert (first / name).read_bytes() == (second / name).read_bytes(), name
