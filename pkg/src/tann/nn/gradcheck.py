"""Central finite-difference gradients, the engine's independent oracle.

The estimate perturbs one real coordinate at a time (complex parameters are
walked through their real view), re-running a train-mode forward with a
freshly reseeded rng so dropout masks are frozen across perturbations.
"""

from __future__ import annotations

import numpy as np

from ..exceptions import ContractError
from .network import Network


def _loss_at(net: Network, x, target, mask_seed: int) -> float:
    out, _ = net.forward(x, train=True, rng=np.random.default_rng(mask_seed))
    return net.loss_value(out, target)


def finite_diff_gradients(net: Network, x, target, step: float, mask_seed: int = 0):
    """Per-parameter central differences of the loss; blocks mirror backward().

    ``mask_seed`` pins the dropout masks: every evaluation reseeds with it, so
    the loss surface being probed is the one a single train-mode forward with
    that seed would see.
    """
    if step <= 0:
        raise ContractError(f"step must be positive, got {step}")
    blocks = []
    for layer in net.layers:
        layer_grads = []
        for p in layer.params():
            view = p.view(np.float64) if np.iscomplexobj(p) else p
            grad_view = np.zeros_like(view)
            flat = view.ravel()
            gflat = grad_view.ravel()
            for k in range(flat.size):
                orig = flat[k]
                flat[k] = orig + step
                up = _loss_at(net, x, target, mask_seed)
                flat[k] = orig - step
                down = _loss_at(net, x, target, mask_seed)
                flat[k] = orig
                gflat[k] = (up - down) / (2.0 * step)
            if np.iscomplexobj(p):
                layer_grads.append(grad_view.view(np.complex128).reshape(p.shape))
            else:
                layer_grads.append(grad_view.reshape(p.shape))
        blocks.append(layer_grads)
    return blocks


def max_relative_error(analytic_blocks, numeric_blocks, floor: float = 1e-8) -> float:
    """max |a - n| / max(|a|, |n|, floor) over all coordinates."""
    worst = 0.0
    for a_block, n_block in zip(analytic_blocks, numeric_blocks):
        for a, n in zip(a_block, n_block):
            av = a.view(np.float64) if np.iscomplexobj(a) else np.asarray(a)
            nv = n.view(np.float64) if np.iscomplexobj(n) else np.asarray(n)
            denom = np.maximum(np.maximum(np.abs(av), np.abs(nv)), floor)
            err = np.abs(av - nv) / denom
            if err.size:
                worst = max(worst, float(err.max()))
    return worst
