"""AdamW with decoupled weight decay."""

from __future__ import annotations

import numpy as np


class AdamW:
    """Decay is applied directly to the weights, never through the moments."""

    def __init__(self, params, lr=3e-4, betas=(0.9, 0.999), eps=1e-8, weight_decay=0.01):
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.step_count = 0
        self._m = [np.zeros_like(p.value) for p in self.params]
        self._v = [np.zeros_like(p.value) for p in self.params]

    def step(self):
        self.step_count += 1
        b1, b2 = self.beta1, self.beta2
        bc1 = 1.0 - b1**self.step_count
        bc2 = 1.0 - b2**self.step_count
        for p, m, v in zip(self.params, self._m, self._v):
            if self.weight_decay:
                p.value *= 1.0 - self.lr * self.weight_decay
            if p.grad is None:
                continue
            m *= b1
            m += (1.0 - b1) * p.grad
            v *= b2
            v += (1.0 - b2) * p.grad**2
            p.value -= self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)

    def zero_grad(self):
        for p in self.params:
            p.grad = None


def adamw_step(params, grads, lr, betas=(0.9, 0.999), eps=1e-8, weight_decay=0.01,
               moments=None, step_count=0):
    """Functional single step on raw arrays; returns (params, moments, step).

    Convenience surface mirroring AdamW.step for stateless callers.
    """
    b1, b2 = betas
    if moments is None:
        moments = ([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params])
    ms, vs = moments
    step_count += 1
    bc1 = 1.0 - b1**step_count
    bc2 = 1.0 - b2**step_count
    new_params = []
    for p, g, m, v in zip(params, grads, ms, vs):
        p = p * (1.0 - lr * weight_decay)
        if g is not None:
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g**2
            p = p - lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
        new_params.append(p)
    return new_params, (ms, vs), step_count
