"""Loss fixtures computed by hand before the implementation existed."""

import numpy as np
import pytest

from lpde.errors import BatchError
from lpde.ssl import Tensor, VICRegConfig, backward, vicreg_loss


def loss_value(z, zp, **cfg):
    return float(vicreg_loss(Tensor(z), Tensor(zp), VICRegConfig(**cfg)).value)


class TestFixtures:
    def test_zero_loss_batch(self):
        # per-dimension variance exactly 1 (ddof=1), orthogonal columns, Z=Z'
        cols = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=float)
        cols /= cols.std(axis=0, ddof=1)
        assert abs(loss_value(cols, cols.copy())) <= 1e-12

    def test_collapsed_batch(self):
        # identical rows: L_inv = L_cov = 0, L_var = 2 gamma, total 50
        z = np.full((4, 3), 0.7)
        assert abs(loss_value(z, z.copy()) - 50.0) <= 1e-12

    def test_hand_computed_75(self):
        z = np.array([[1.0, 0.0], [-1.0, 0.0]])
        zp = np.array([[0.0, 1.0], [0.0, -1.0]])
        assert abs(loss_value(z, zp) - 75.0) <= 1e-12

    def test_covariance_uses_n_minus_one(self):
        # Cov(Z) of the 75-fixture must be [[2,0],[0,0]], i.e. 1/(N-1).
        z = np.array([[1.0, 0.0], [-1.0, 0.0]])
        c = z - z.mean(axis=0)
        cov = c.T @ c / (len(z) - 1)
        assert np.allclose(cov, [[2.0, 0.0], [0.0, 0.0]])

    def test_weights_scale_terms(self):
        z = np.array([[1.0, 0.0], [-1.0, 0.0]])
        zp = np.array([[0.0, 1.0], [0.0, -1.0]])
        inv_only = loss_value(z, zp, lambda_var=0.0, lambda_cov=0.0, lambda_inv=1.0)
        assert abs(inv_only - 2.0) <= 1e-12
        var_only = loss_value(z, zp, lambda_var=1.0, lambda_cov=0.0, lambda_inv=0.0)
        assert abs(var_only - 1.0) <= 1e-12


class TestInvariances:
    def test_row_permutation_exact(self):
        rng = np.random.default_rng(0)
        z, zp = rng.standard_normal((8, 5)), rng.standard_normal((8, 5))
        perm = rng.permutation(8)
        assert loss_value(z, zp) == loss_value(z[perm], zp[perm])

    def test_batch_too_small(self):
        with pytest.raises(BatchError):
            vicreg_loss(Tensor(np.ones((1, 4))), Tensor(np.ones((1, 4))))

    def test_shape_mismatch(self):
        with pytest.raises(BatchError):
            vicreg_loss(Tensor(np.ones((4, 3))), Tensor(np.ones((4, 2))))


class TestGradients:
    def test_fixture_gradient_matches_fd(self):
        # stabilized hinge (the trainer's setting) keeps the gradient finite
        cfg = VICRegConfig(variance_eps=1e-8)
        z = Tensor(np.array([[1.0, 0.0], [-1.0, 0.0]]), requires_grad=True)
        zp = Tensor(np.array([[0.0, 1.0], [0.0, -1.0]]), requires_grad=True)
        backward(vicreg_loss(z, zp, cfg))
        assert np.allclose(z.grad, [[25.0, -25.0], [-25.0, 25.0]], atol=1e-9)
        h = 1e-6
        worst = 0.0
        for tens, first in ((z, True), (zp, False)):
            other = (zp if first else z).value
            for i in range(2):
                for j in range(2):
                    plus = tens.value.copy()
                    minus = tens.value.copy()
                    plus[i, j] += h
                    minus[i, j] -= h
                    args = ((plus, other), (minus, other)) if first else (
                        (other, plus), (other, minus))
                    fd = (
                        float(vicreg_loss(Tensor(args[0][0]), Tensor(args[0][1]), cfg).value)
                        - float(vicreg_loss(Tensor(args[1][0]), Tensor(args[1][1]), cfg).value)
                    ) / (2 * h)
                    an = tens.grad[i, j]
                    worst = max(worst, abs(fd - an) / max(abs(fd), abs(an), 1.0))
        assert worst <= 1e-6

    def test_random_batch_gradient(self):
        cfg = VICRegConfig(variance_eps=1e-8)
        rng = np.random.default_rng(5)
        z = Tensor(rng.standard_normal((6, 4)), requires_grad=True)
        zp = Tensor(rng.standard_normal((6, 4)), requires_grad=True)
        backward(vicreg_loss(z, zp, cfg))
        h = 1e-6
        worst = 0.0
        for _ in range(30):
            i, j = rng.integers(6), rng.integers(4)
            plus, minus = z.value.copy(), z.value.copy()
            plus[i, j] += h
            minus[i, j] -= h
            fd = (
                float(vicreg_loss(Tensor(plus), Tensor(zp.value), cfg).value)
                - float(vicreg_loss(Tensor(minus), Tensor(zp.value), cfg).value)
            ) / (2 * h)
            worst = max(worst, abs(fd - z.grad[i, j]) / max(abs(fd), 1e-8))
        assert worst <= 1e-5
