"""Variance-invariance-covariance loss on paired embedding batches."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import BatchError
from . import autodiff as ad
from .autodiff import Tensor


@dataclass(frozen=True)
class VICRegConfig:
    """Weights and variance target.

    variance_eps smooths the hinge's square root; it defaults to 0 so the
    printed fixtures hold exactly, and the trainer passes 1e-8 to keep the
    gradient bounded near collapsed batches.
    """

    lambda_var: float = 25.0
    lambda_inv: float = 25.0
    lambda_cov: float = 1.0
    gamma: float = 1.0
    variance_eps: float = 0.0

    def __post_init__(self):
        if min(self.lambda_var, self.lambda_inv, self.lambda_cov, self.gamma) < 0:
            raise BatchError("loss weights and gamma must be nonnegative")

    def to_dict(self):
        return {
            "lambda_var": self.lambda_var,
            "lambda_inv": self.lambda_inv,
            "lambda_cov": self.lambda_cov,
            "gamma": self.gamma,
            "variance_eps": self.variance_eps,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def _variance_and_cov_penalties(z: Tensor, cfg: VICRegConfig):
    n, d = z.shape
    centered = z - ad.tmean(z, axis=0, keepdims=True)
    cov = ad.matmul(ad.transpose(centered, (1, 0)), centered) * Tensor(1.0 / (n - 1))
    diag = ad.tsum(cov * Tensor(np.eye(d)), axis=1)  # Cov_jj
    hinge = ad.relu(Tensor(cfg.gamma) - ad.sqrt(diag + Tensor(cfg.variance_eps)))
    var_term = ad.tsum(hinge) * Tensor(1.0 / d)
    off = cov * Tensor(1.0 - np.eye(d))
    cov_term = ad.tsum(off * off) * Tensor(1.0 / d)
    return var_term, cov_term


def vicreg_loss(z: Tensor, z_prime: Tensor, cfg: VICRegConfig = VICRegConfig()) -> Tensor:
    """L = lambda_var L_var + lambda_cov L_cov + lambda_inv L_inv.

    L_var sums hinge(gamma - sqrt(Cov_jj)) over the D dimensions of both
    batches with a 1/D prefactor; L_cov the squared off-diagonals likewise;
    L_inv is the mean squared row difference.  Covariances use 1/(N-1).
    """
    if z.shape != z_prime.shape:
        raise BatchError(f"batch shapes differ: {z.shape} vs {z_prime.shape}")
    if len(z.shape) != 2 or z.shape[0] < 2:
        raise BatchError(f"need an (N>=2, D) embedding matrix, got {z.shape}")
    n = z.shape[0]
    var_a, cov_a = _variance_and_cov_penalties(z, cfg)
    var_b, cov_b = _variance_and_cov_penalties(z_prime, cfg)
    diff = z - z_prime
    inv_term = ad.tsum(diff * diff) * Tensor(1.0 / n)
    return (
        Tensor(cfg.lambda_var) * (var_a + var_b)
        + Tensor(cfg.lambda_cov) * (cov_a + cov_b)
        + Tensor(cfg.lambda_inv) * inv_term
    )
