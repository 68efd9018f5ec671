"""Loss functions: value and gradient with respect to the prediction.

Cross-entropy takes raw scores and folds the softmax into the loss via
log-sum-exp, so it stays finite for score magnitudes far beyond anything the
tiny networks here produce.  BCE clamps predictions into [1e-7, 1 - 1e-7]
before the logs, so it never returns Inf for in-range inputs.
"""

from __future__ import annotations

import numpy as np

from ..exceptions import ContractError, DomainError

BCE = "bce"
MSE = "mse"
CROSS_ENTROPY = "cross_entropy"
LOSS_KINDS = (BCE, MSE, CROSS_ENTROPY)

_BCE_CLAMP = 1e-7


def _check_kind(kind):
    if kind not in LOSS_KINDS:
        raise ContractError(f"unknown loss kind {kind!r}; expected one of {LOSS_KINDS}")


def _target_for(kind, target, width):
    """Normalize a target to the vector/index form the loss expects."""
    if kind == CROSS_ENTROPY:
        t = np.asarray(target)
        if t.ndim == 0:  # class index
            idx = int(t)
            if not 0 <= idx < width:
                raise ContractError(f"class index {idx} out of range for width {width}")
            return idx
        if t.shape[0] != width:
            raise ContractError(
                f"one-hot target width {t.shape[0]} != prediction width {width}"
            )
        return int(np.argmax(t))
    t = np.asarray(target, dtype=np.float64)
    if t.ndim == 0:
        t = t.reshape(1)
    if t.shape[0] != width:
        raise ContractError(f"target width {t.shape[0]} != prediction width {width}")
    return t


def loss_value(kind, pred, target) -> float:
    _check_kind(kind)
    pred = np.asarray(pred, dtype=np.float64)
    t = _target_for(kind, target, pred.shape[0])
    if kind == BCE:
        if np.any(pred < 0.0) or np.any(pred > 1.0):
            raise DomainError("BCE predictions must lie in [0, 1]")
        p = np.clip(pred, _BCE_CLAMP, 1.0 - _BCE_CLAMP)
        return float(-np.mean(t * np.log(p) + (1.0 - t) * np.log(1.0 - p)))
    if kind == MSE:
        return float(np.mean((pred - t) ** 2))
    # cross-entropy on raw scores
    m = pred.max()
    lse = m + np.log(np.sum(np.exp(pred - m)))
    return float(lse - pred[t])


def loss_grad(kind, pred, target) -> np.ndarray:
    """d loss / d pred, matching :func:`loss_value`."""
    _check_kind(kind)
    pred = np.asarray(pred, dtype=np.float64)
    n = pred.shape[0]
    t = _target_for(kind, target, n)
    if kind == BCE:
        if np.any(pred < 0.0) or np.any(pred > 1.0):
            raise DomainError("BCE predictions must lie in [0, 1]")
        p = np.clip(pred, _BCE_CLAMP, 1.0 - _BCE_CLAMP)
        return (p - t) / (p * (1.0 - p)) / n
    if kind == MSE:
        return 2.0 * (pred - t) / n
    m = pred.max()
    softmax = np.exp(pred - m)
    softmax /= softmax.sum()
    grad = softmax
    grad[t] -= 1.0
    return grad
