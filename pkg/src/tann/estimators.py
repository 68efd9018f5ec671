"""Scikit-learn compatible estimators wrapping the trie training machinery.

``TannClassifier`` and ``NetworkClassifier`` follow the fit/predict
convention (with ``get_params``/``set_params`` via ``BaseEstimator``), so
they drop into pipelines, grid search, and cross-validation.
``TfidfTextVectorizer`` exposes the text pipeline as a transformer.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.exceptions import NotFittedError

from . import baselines
from .datasets import VectorizerConfig, build_vocab, vectorize
from .exceptions import ContractError
from .nn import losses
from .nn.layers import Dense, ReLU
from .nn.network import Network, init_params, mini_nn
from .trie import (
    BitConsume,
    FeatureThreshold,
    assign_feature_indices,
    build_trie_with,
    node_seed,
    route,
)
from .training import (
    TrainConfig,
    train_single,
    train_tann,
    train_tann_batched,
)


def _routing_policy(name: str, threshold: float):
    if name == "bits":
        return BitConsume()
    if name == "threshold":
        return FeatureThreshold(threshold=threshold)
    raise ContractError(f"unknown routing {name!r}; expected 'bits' or 'threshold'")


def _node_network(arch, input_size, hidden_size, n_classes, loss, seed):
    """One node's network for the requested label shape."""
    if arch is not None:
        return baselines.make_network(arch, seed)
    if loss == losses.CROSS_ENTROPY:
        net = Network(
            [Dense(input_size, hidden_size), ReLU(), Dense(hidden_size, n_classes)],
            loss=losses.CROSS_ENTROPY,
        )
    else:
        net = mini_nn(input_size, hidden_size)
    return init_params(net, seed)


class TannClassifier(BaseEstimator, ClassifierMixin):
    """Trie-augmented classifier: route each sample to a node, classify there.

    Parameters mirror the training configuration; ``arch`` may name one of
    the baseline architectures (an ``ArchSpec``) to embed per node instead of
    the default two-layer network.
    """

    def __init__(self, depth=3, hidden_size=20, lr=0.01, epochs=200,
                 optimizer="adam", loss="bce", routing="bits",
                 step_mode="route-local", batch_size=1, shuffle=False,
                 threshold=0.5, arch=None, random_state=1):
        self.depth = depth
        self.hidden_size = hidden_size
        self.lr = lr
        self.epochs = epochs
        self.optimizer = optimizer
        self.loss = loss
        self.routing = routing
        self.step_mode = step_mode
        self.batch_size = batch_size
        self.shuffle = shuffle
        self.threshold = threshold
        self.arch = arch
        self.random_state = random_state

    def _config(self):
        return TrainConfig(
            lr=self.lr,
            epochs=self.epochs,
            optimizer=self.optimizer,
            loss=self.loss,
            step_mode=self.step_mode,
            routing=_routing_policy(self.routing, self.threshold),
            batch_size=self.batch_size,
            seed=self.random_state,
            shuffle=self.shuffle,
        )

    def fit(self, X, y):
        from .validation import dataset_from_arrays

        if self.depth < 1:
            raise ContractError(f"depth must be >= 1, got {self.depth}")
        data = dataset_from_arrays(X, y)
        self.classes_ = np.arange(data.num_classes)
        self.n_features_in_ = data.feature_width
        cfg = self._config()
        trie = build_trie_with(
            lambda s: _node_network(
                self.arch, data.feature_width, self.hidden_size,
                data.num_classes, self.loss, s,
            ),
            self.depth,
            seed=self.random_state,
        )
        assign_feature_indices(trie, ("cycle", data.feature_width))
        if self.loss == losses.CROSS_ENTROPY and self.batch_size > 1:
            self.report_ = train_tann_batched(trie, data, cfg)
        else:
            self.report_ = train_tann(trie, data, cfg)
        self.trie_ = trie
        return self

    def _check_fitted(self):
        if not hasattr(self, "trie_"):
            raise NotFittedError("this TannClassifier has not been fitted yet")

    def _outputs(self, X):
        from .validation import check_feature_matrix

        X = check_feature_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ContractError(
                f"X has {X.shape[1]} features; fit saw {self.n_features_in_}"
            )
        policy = _routing_policy(self.routing, self.threshold)
        outs = []
        for row in X:
            nid = route(self.trie_, row, policy)[-1]
            out, _ = self.trie_.nodes[nid].net.forward(row)
            outs.append(out)
        return np.stack(outs)

    def predict_proba(self, X):
        self._check_fitted()
        outs = self._outputs(X)
        if outs.shape[1] == 1:  # sigmoid unit: p(class 1)
            p1 = outs[:, 0]
            return np.column_stack([1.0 - p1, p1])
        m = outs.max(axis=1, keepdims=True)
        e = np.exp(outs - m)
        return e / e.sum(axis=1, keepdims=True)

    def predict(self, X):
        self._check_fitted()
        outs = self._outputs(X)
        if outs.shape[1] == 1:
            return (outs[:, 0] >= 0.5).astype(np.int64)
        return np.argmax(outs, axis=1)


class NetworkClassifier(BaseEstimator, ClassifierMixin):
    """A single network trained on the whole input space (no routing)."""

    def __init__(self, hidden_size=20, lr=0.01, epochs=200, optimizer="adam",
                 loss="bce", shuffle=False, arch=None, random_state=1):
        self.hidden_size = hidden_size
        self.lr = lr
        self.epochs = epochs
        self.optimizer = optimizer
        self.loss = loss
        self.shuffle = shuffle
        self.arch = arch
        self.random_state = random_state

    def fit(self, X, y):
        from .validation import dataset_from_arrays

        data = dataset_from_arrays(X, y)
        self.classes_ = np.arange(data.num_classes)
        self.n_features_in_ = data.feature_width
        cfg = TrainConfig(
            lr=self.lr, epochs=self.epochs, optimizer=self.optimizer,
            loss=self.loss, seed=self.random_state, shuffle=self.shuffle,
        )
        net = _node_network(
            self.arch, data.feature_width, self.hidden_size,
            data.num_classes, self.loss, node_seed(self.random_state, 1),
        )
        self.report_ = train_single(net, data, cfg)
        self.network_ = net
        return self

    def _outputs(self, X):
        from .validation import check_feature_matrix

        if not hasattr(self, "network_"):
            raise NotFittedError("this NetworkClassifier has not been fitted yet")
        X = check_feature_matrix(X)
        return np.stack([self.network_.forward(row)[0] for row in X])

    def predict(self, X):
        outs = self._outputs(X)
        if outs.shape[1] == 1:
            return (outs[:, 0] >= 0.5).astype(np.int64)
        return np.argmax(outs, axis=1)

    def predict_proba(self, X):
        outs = self._outputs(X)
        if outs.shape[1] == 1:
            p1 = outs[:, 0]
            return np.column_stack([1.0 - p1, p1])
        m = outs.max(axis=1, keepdims=True)
        e = np.exp(outs - m)
        return e / e.sum(axis=1, keepdims=True)


class TfidfTextVectorizer(BaseEstimator, TransformerMixin):
    """Fit a vocabulary on raw texts, transform texts to TF/TFIDF rows."""

    def __init__(self, max_features=2000, weighting="tfidf", lowercase=True):
        self.max_features = max_features
        self.weighting = weighting
        self.lowercase = lowercase

    def _config(self):
        return VectorizerConfig(
            max_features=self.max_features,
            weighting=self.weighting,
            lowercase=self.lowercase,
        )

    def fit(self, texts, y=None):
        corpus = [("", t) for t in texts]
        self.vocab_ = build_vocab(corpus, self._config())
        return self

    def transform(self, texts):
        if not hasattr(self, "vocab_"):
            raise NotFittedError("this TfidfTextVectorizer has not been fitted yet")
        corpus = [("", t) for t in texts]
        ds = vectorize(corpus, self.vocab_, self._config())
        return np.stack([x for x, _ in ds.samples])
