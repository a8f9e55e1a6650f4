"""AdamW closed-form behaviors."""

import numpy as np

from lpde.ssl import AdamW, Tensor, adamw_step


class TestAdamW:
    def test_zero_grad_zero_decay_unchanged(self):
        p = Tensor(np.array([1.0, -2.0]), requires_grad=True)
        opt = AdamW([p], lr=0.1, weight_decay=0.0)
        p.grad = np.zeros(2)
        opt.step()
        assert np.array_equal(p.value, [1.0, -2.0])

    def test_first_step_is_signed_lr(self):
        # from zero moments: update ~= -lr * g / (|g| + eps)
        p = Tensor(np.array([0.5, -0.5, 2.0]), requires_grad=True)
        g = np.array([3.0, -0.01, 1e-4])
        opt = AdamW([p], lr=1e-3, weight_decay=0.0)
        p.grad = g.copy()
        before = p.value.copy()
        opt.step()
        expected = before - 1e-3 * g / (np.abs(g) + 1e-8)
        assert np.max(np.abs(p.value - expected)) < 1e-12

    def test_decay_only_two_steps(self):
        p = Tensor(np.array([4.0]), requires_grad=True)
        opt = AdamW([p], lr=0.1, weight_decay=0.5)
        for _ in range(2):
            p.grad = np.zeros(1)
            opt.step()
        assert abs(p.value[0] - 4.0 * (1 - 0.1 * 0.5) ** 2) < 1e-14

    def test_decay_is_decoupled_from_moments(self):
        # with decay, a zero-gradient step must not touch the moments
        p = Tensor(np.array([1.0]), requires_grad=True)
        opt = AdamW([p], lr=0.1, weight_decay=0.1)
        p.grad = np.zeros(1)
        opt.step()
        assert np.all(opt._m[0] == 0.0) and np.all(opt._v[0] == 0.0)

    def test_functional_variant_matches(self):
        rng = np.random.default_rng(0)
        vals = [rng.standard_normal(4), rng.standard_normal((2, 3))]
        grads = [rng.standard_normal(4), rng.standard_normal((2, 3))]
        tensors = [Tensor(v.copy(), requires_grad=True) for v in vals]
        opt = AdamW(tensors, lr=0.01)
        for t, g in zip(tensors, grads):
            t.grad = g.copy()
        opt.step()
        out, _, _ = adamw_step([v.copy() for v in vals], grads, lr=0.01)
        for t, o in zip(tensors, out):
            assert np.max(np.abs(t.value - o)) < 1e-14
