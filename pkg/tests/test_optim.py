"""Optimizer updates against a hand-written scalar oracle.

The oracle (tests/oracles.py) is deliberately independent of the package:
it walks the textbook update rules one scalar at a time, so any indexing or
broadcasting mistake in the real implementation shows up as a mismatch.
"""

import numpy as np
import pytest
from oracles import AdamOracle, sgd_oracle

from tann.exceptions import ContractError
from tann.nn.optim import SGD, Adam


def test_sgd_single_step():
    p = np.array([1.0])
    opt = SGD([p], lr=0.2)
    opt.step([np.array([0.5])])
    assert p[0] == pytest.approx(0.9, abs=1e-15)
    assert p[0] == sgd_oracle(1.0, 0.5, 0.2)


def test_adam_first_step_matches_oracle():
    p = np.array([0.0])
    opt = Adam([p], lr=0.001)
    opt.step([np.array([1.0])])
    oracle = AdamOracle(lr=0.001)
    expected = oracle.step(0.0, 1.0)
    assert abs(p[0] - expected) < 1e-12
    # bias correction makes m_hat = v_hat = 1 on the first step
    assert p[0] == pytest.approx(-0.001, abs=1e-9)


def test_adam_second_step_zero_gradient_moves_less_than_lr():
    p = np.array([0.0])
    opt = Adam([p], lr=0.001)
    oracle = AdamOracle(lr=0.001)

    opt.step([np.array([1.0])])
    expected = oracle.step(0.0, 1.0)
    assert abs(p[0] - expected) < 1e-12

    before = p[0]
    opt.step([np.array([0.0])])
    expected = oracle.step(expected, 0.0)
    assert abs(p[0] - expected) < 1e-12
    assert 0 < abs(p[0] - before) < 0.001  # residual moment decay, below lr


def test_adam_many_steps_random_gradients():
    rng = np.random.default_rng(7)
    p = np.array([0.3])
    opt = Adam([p], lr=0.01)
    oracle = AdamOracle(lr=0.01)
    val = 0.3
    for _ in range(50):
        g = float(rng.normal())
        opt.step([np.array([g])])
        val = oracle.step(val, g)
        assert abs(p[0] - val) < 1e-12


def test_adam_zero_gradients_fresh_state_is_exact_noop():
    p = np.array([1.5, -2.0, 0.25])
    start = p.copy()
    opt = Adam([p], lr=0.1)
    for _ in range(20):
        opt.step([np.zeros(3)])
    assert np.array_equal(p, start)


def test_adam_elementwise_matches_oracle_on_arrays():
    rng = np.random.default_rng(3)
    p = rng.normal(size=(4, 3))
    grads = [rng.normal(size=(4, 3)) for _ in range(10)]
    oracles = [AdamOracle(lr=0.05) for _ in range(p.size)]
    vals = p.ravel().copy()

    opt = Adam([p], lr=0.05)
    for g in grads:
        opt.step([g])
        for k, o in enumerate(oracles):
            vals[k] = o.step(vals[k], g.ravel()[k])
    assert np.max(np.abs(p.ravel() - vals)) < 1e-12


def test_adam_complex_parameter_treats_parts_independently():
    p = np.array([0.5 + 0.25j], dtype=np.complex128)
    g = np.array([1.0 - 2.0j], dtype=np.complex128)
    opt = Adam([p], lr=0.001)
    opt.step([g])
    o_re, o_im = AdamOracle(lr=0.001), AdamOracle(lr=0.001)
    expected = o_re.step(0.5, 1.0) + 1j * o_im.step(0.25, -2.0)
    assert abs(p[0] - expected) < 1e-12


def test_step_count_increments_once_per_call():
    p = np.array([0.0])
    opt = Adam([p], lr=0.001)
    for k in range(1, 5):
        opt.step([np.array([1.0])])
        assert opt.step_count == k


def test_shape_mismatch_rejected():
    p = np.zeros((2, 2))
    opt = SGD([p], lr=0.1)
    with pytest.raises(ContractError):
        opt.step([np.zeros(3)])
    opt2 = Adam([p], lr=0.1)
    with pytest.raises(ContractError):
        opt2.step([np.zeros((3, 2))])


def test_learning_rate_must_be_positive():
    with pytest.raises(ContractError):
        SGD([np.zeros(1)], lr=0.0)
    with pytest.raises(ContractError):
        Adam([np.zeros(1)], lr=-1.0)
