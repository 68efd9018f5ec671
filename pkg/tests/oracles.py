"""Independent test oracles shared across test modules.

Everything here is deliberately written from first principles (scalar loops,
pair counting) with no imports from the package under test, so a bug in the
implementation cannot hide in its own oracle.
"""

import math


def sgd_oracle(p, g, lr):
    return p - lr * g


class AdamOracle:
    """Scalar Adam with bias correction, one parameter at a time."""

    def __init__(self, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, beta1, beta2, eps
        self.m = 0.0
        self.v = 0.0
        self.t = 0

    def step(self, p, g):
        self.t += 1
        self.m = self.b1 * self.m + (1 - self.b1) * g
        self.v = self.b2 * self.v + (1 - self.b2) * g * g
        m_hat = self.m / (1 - self.b1**self.t)
        v_hat = self.v / (1 - self.b2**self.t)
        return p - self.lr * m_hat / (math.sqrt(v_hat) + self.eps)


def oracle_metrics(pairs, k):
    """(accuracy, weighted F1) from (label, pred) pairs by explicit counting."""
    n = len(pairs)
    acc = sum(1 for t, p in pairs if t == p) / n
    wf1 = 0.0
    for c in range(k):
        tp = sum(1 for t, p in pairs if t == c and p == c)
        fp = sum(1 for t, p in pairs if t != c and p == c)
        fn = sum(1 for t, p in pairs if t == c and p != c)
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall > 0
            else 0.0
        )
        support = sum(1 for t, _ in pairs if t == c)
        wf1 += f1 * support / n
    return acc, wf1
