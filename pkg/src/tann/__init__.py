"""Trie-augmented neural networks: a binary trie with a small network in
every node.  Inputs are routed root-to-leaf and classified by the terminal
node's network.

The estimator classes (`TannClassifier`, `NetworkClassifier`,
`TfidfTextVectorizer`) are the high-level entry points; the functional
layers underneath (``tann.nn``, ``tann.trie``, ``tann.training``, ...) are
importable directly for finer control.  ``python -m tann.cli`` (or the
``tann`` console script) runs the experiment harness.
"""

from .baselines import ArchSpec, embed_in_trie, make_comparison_config, make_network
from .datasets import (
    Dataset,
    VectorizerConfig,
    Vocab,
    build_vocab,
    bundled_spam_path,
    gate_dataset,
    load_dir_per_class,
    load_labeled_lines,
    tokenize,
    train_test_split,
    vectorize,
)
from .estimators import NetworkClassifier, TannClassifier, TfidfTextVectorizer
from .metrics import (
    ConfusionMatrix,
    MetricsReport,
    accuracy,
    confusion,
    f1_score,
    weighted_f1,
)
from .nn import Network, finite_diff_gradients, init_params, mini_nn
from .training import (
    EpochRecord,
    TrainConfig,
    TrainReport,
    evaluate,
    infer,
    train_single,
    train_tann,
    train_tann_batched,
)
from .trie import (
    BitConsume,
    CostModel,
    FeatureThreshold,
    Trie,
    TrieNode,
    aggregate_path_inference,
    assign_feature_indices,
    build_trie,
    estimate_cost,
    leaf_of,
    load_trie,
    route,
    save_trie,
    structural_stats,
    traverse_trie,
)

__version__ = "0.1.0"

__all__ = [
    "ArchSpec",
    "BitConsume",
    "ConfusionMatrix",
    "CostModel",
    "Dataset",
    "EpochRecord",
    "FeatureThreshold",
    "MetricsReport",
    "Network",
    "NetworkClassifier",
    "TannClassifier",
    "TfidfTextVectorizer",
    "TrainConfig",
    "TrainReport",
    "Trie",
    "TrieNode",
    "VectorizerConfig",
    "Vocab",
    "accuracy",
    "aggregate_path_inference",
    "assign_feature_indices",
    "build_trie",
    "build_vocab",
    "bundled_spam_path",
    "confusion",
    "embed_in_trie",
    "estimate_cost",
    "evaluate",
    "f1_score",
    "finite_diff_gradients",
    "gate_dataset",
    "infer",
    "init_params",
    "leaf_of",
    "load_dir_per_class",
    "load_labeled_lines",
    "load_trie",
    "make_comparison_config",
    "make_network",
    "mini_nn",
    "route",
    "save_trie",
    "structural_stats",
    "tokenize",
    "train_single",
    "train_tann",
    "train_tann_batched",
    "train_test_split",
    "traverse_trie",
    "vectorize",
    "weighted_f1",
]
