"""SGD and Adam over flat parameter lists.

Parameters are updated in place.  Complex parameter arrays are viewed as
interleaved float64 pairs, so both optimizers treat real and imaginary parts
as independent real coordinates (matching how gradients are produced).
"""

from __future__ import annotations

import numpy as np

from ..exceptions import ContractError


def _real_view(a: np.ndarray) -> np.ndarray:
    if np.iscomplexobj(a):
        return a.view(np.float64)
    return a


def _check_pairing(params, grads):
    if len(grads) != len(params):
        raise ContractError(
            f"got {len(grads)} gradient arrays for {len(params)} parameters"
        )
    for p, g in zip(params, grads):
        if p.shape != np.asarray(g).shape:
            raise ContractError(
                f"gradient shape {np.asarray(g).shape} != parameter shape {p.shape}"
            )


class SGD:
    """Plain stochastic gradient descent: p <- p - lr * g."""

    def __init__(self, params, lr: float):
        if lr <= 0:
            raise ContractError(f"learning rate must be positive, got {lr}")
        self.params = list(params)
        self.lr = lr

    def step(self, grads):
        _check_pairing(self.params, grads)
        for p, g in zip(self.params, grads):
            _real_view(p)[...] -= self.lr * _real_view(np.asarray(g))


class Adam:
    """Adam with bias correction (beta1=0.9, beta2=0.999, eps=1e-8 defaults).

    Moments are allocated lazily on the first step, so constructing one
    optimizer per trie node costs nothing for nodes that never see data.
    A step with an all-zero gradient on fresh (zero) moments is an exact
    no-op; on decayed moments it applies the residual moment decay.
    """

    def __init__(self, params, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        if lr <= 0:
            raise ContractError(f"learning rate must be positive, got {lr}")
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self._m: list[np.ndarray] | None = None
        self._v: list[np.ndarray] | None = None

    def step(self, grads):
        _check_pairing(self.params, grads)
        if self._m is None:
            self._m = [np.zeros_like(_real_view(p)) for p in self.params]
            self._v = [np.zeros_like(_real_view(p)) for p in self.params]
        self.step_count += 1
        t = self.step_count
        c1 = 1.0 - self.beta1**t
        inv_sqrt_c2 = 1.0 / np.sqrt(1.0 - self.beta2**t)
        for p, g, m, v in zip(self.params, grads, self._m, self._v):
            gr = _real_view(np.asarray(g))
            m *= self.beta1
            m += (1.0 - self.beta1) * gr
            v *= self.beta2
            v += (1.0 - self.beta2) * gr * gr
            # p -= lr * (m/c1) / (sqrt(v/c2) + eps), with minimal temporaries
            denom = np.sqrt(v)
            denom *= inv_sqrt_c2
            denom += self.eps
            np.divide(m, denom, out=denom)
            denom *= self.lr / c1
            _real_view(p)[...] -= denom


def make_optimizer(params, kind: str, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
    if kind == "sgd":
        return SGD(params, lr)
    if kind == "adam":
        return Adam(params, lr, beta1=beta1, beta2=beta2, eps=eps)
    raise ContractError(f"unknown optimizer kind {kind!r}")
