"""Lie-algebra vectors and approximations of the exponential map.

Two routes from an algebra element to a group action: truncated Taylor
series of the flow (cheap, leaves the solution manifold at O(eps^{k+1})),
and symmetric product formulas composing exact single-generator actions
(stays on the manifold up to regridding error).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ArgumentError, AugmentationTooStrongError, DomainError
from ..fields import SolutionField
from ..residuals import time_derivative, x_derivative
from .apply import apply_closed_form
from .catalog import catalog, generator


@dataclass(frozen=True)
class LieVector:
    """Weighted sum of basis generators: coefficients keyed by generator id."""

    equation: str
    coefficients: dict[str, float]

    def __post_init__(self):
        for gen_id in self.coefficients:
            generator(self.equation, gen_id)  # raises CatalogError if unknown

    def active(self):
        """(GeneratorSpec, coefficient) pairs in catalog order, zeros dropped."""
        return [
            (gen, float(self.coefficients[gen.gen_id]))
            for gen in catalog(self.equation)
            if self.coefficients.get(gen.gen_id, 0.0) != 0.0
        ]


@dataclass(frozen=True)
class TrotterConfig:
    """Product-formula order p (even) and segment count r."""

    order: int = 2
    segments: int = 1

    def __post_init__(self):
        if self.order not in (2, 4, 6):
            raise ArgumentError(f"product-formula order must be 2, 4, or 6, got {self.order}")
        if self.segments < 1:
            raise ArgumentError(f"segments must be >= 1, got {self.segments}")


def suzuki_coefficient(k: int) -> float:
    """u_k = 1 / (4 - 4^{1/(2k-1)}) of the order-raising recursion."""
    return 1.0 / (4.0 - 4.0 ** (1.0 / (2 * k - 1)))


def _suzuki_scales(order: int) -> tuple[float, ...]:
    """Stage scale factors expressing T_order as a composition of T_2 blocks:
    T_{2k}(v) = T_{2k-2}(u_k v)^2 T_{2k-2}((1-4u_k) v) T_{2k-2}(u_k v)^2."""
    if order == 2:
        return (1.0,)
    u = suzuki_coefficient(order // 2)
    inner = _suzuki_scales(order - 2)
    return tuple(s * f for f in (u, u, 1.0 - 4.0 * u, u, u) for s in inner)


def exp_trotter(
    vec: LieVector, field: SolutionField, config: TrotterConfig
) -> SolutionField:
    """Product-formula exponential: prod_{i=1..r} T_p(v / r).

    T_2 is the symmetric palindrome of half-parameter closed-form actions,
    so every constituent map is itself a symmetry; the output is an exact
    solution up to regridding error.
    """
    if vec.equation != field.equation:
        raise ArgumentError("Lie vector and field belong to different equations")
    active = vec.active()
    out = field
    if not active:
        return out.replace()
    r = config.segments
    try:
        for _ in range(r):
            for scale in _suzuki_scales(config.order):
                palindrome = active + active[::-1]
                for gen, coeff in palindrome:
                    out = apply_closed_form(
                        gen, coeff * scale / (2.0 * r), out, snap_time_shift=False
                    )
    except AugmentationTooStrongError as exc:
        raise AugmentationTooStrongError(
            f"valid region vanished inside the product formula: {exc}"
        ) from exc
    return out


def _summed_infinitesimals(vec: LieVector, x: np.ndarray, t: np.ndarray):
    xg = x[None, :]
    tg = t[:, None]
    zero = np.zeros((t.size, x.size))
    xi, tau, phi0, phi1 = zero, zero.copy(), zero.copy(), zero.copy()
    for gen, coeff in vec.active():
        inf = gen.infinitesimal
        if inf is None:
            raise ArgumentError(
                f"{gen.qualified_id} carries no infinitesimal action for the Taylor map"
            )
        xi = xi + coeff * np.broadcast_to(inf.xi(xg, tg), zero.shape)
        tau = tau + coeff * np.broadcast_to(inf.tau(xg, tg), zero.shape)
        phi0 = phi0 + coeff * np.broadcast_to(inf.phi0(xg, tg), zero.shape)
        phi1 = phi1 + coeff * np.broadcast_to(inf.phi1(xg, tg), zero.shape)
    return xi, tau, phi0, phi1


def exp_taylor(vec: LieVector, field: SolutionField, order: int) -> SolutionField:
    """Truncated Taylor series of the flow of a Lie-algebra element.

    The generator acts on the solution graph as the first-order operator
    xi d/dx + tau d/dt + (phi0 + phi1 u) d/du; its induced action on u as a
    function is Q(u) = phi0 + phi1 u - xi u_x - tau u_t, affine in u for
    every cataloged generator, so flow derivatives recurse through the
    linear part A(w) = phi1 w - xi w_x - tau w_t.  1D equations only; the 2D
    flow uses the product-formula route.
    """
    if not 1 <= order <= 3:
        raise ArgumentError(f"Taylor truncation order must be 1..3, got {order}")
    if field.y_coords is not None:
        raise ArgumentError("Taylor exponential map supports the 1D equations only")
    if vec.equation != field.equation:
        raise ArgumentError("Lie vector and field belong to different equations")
    u = field.u
    dt = field.dt
    dx = field.dx
    periodic = field.x_periodic
    xi, tau, phi0, phi1 = _summed_infinitesimals(vec, field.x_coords, field.t_coords)

    def linearized(w):
        return phi1 * w - xi * x_derivative(w, dx, 1, periodic) - tau * time_derivative(w, dt)

    result = u.copy()
    term = phi0 + linearized(u)  # first flow derivative Q(u)
    result += term
    fact = 1.0
    for m in range(2, order + 1):
        term = linearized(term)
        fact *= m
        result += term / fact
    meta = dict(field.meta)
    log = list(meta.get("applied", []))
    log.append({"id": f"{field.equation}.taylor", "order": order,
                "eps": {k: float(v) for k, v in vec.coefficients.items()}})
    meta["applied"] = log
    meta.pop("pressure", None)
    return field.replace(values=result[None], meta=meta)


def gamma_transform(
    field: SolutionField, eps: float, gamma: SolutionField
) -> SolutionField:
    """Pointwise u -> log(e^u + eps * gamma) (potential-form log shift).

    gamma must live on the same grid; when it solves the matching heat
    equation the output solves the potential equation exactly.
    """
    if gamma.values.shape != field.values.shape:
        raise ArgumentError("gamma field shape does not match the input field")
    if not (
        np.allclose(gamma.t_coords, field.t_coords)
        and np.allclose(gamma.x_coords, field.x_coords)
    ):
        raise ArgumentError("gamma field coordinates do not match the input field")
    w = np.exp(field.u) + eps * gamma.u
    if not np.all(w > 0.0):
        raise DomainError(
            f"e^u + eps*gamma reaches {w.min():.3e} <= 0; shrink |eps| or gamma"
        )
    meta = dict(field.meta)
    log = list(meta.get("applied", []))
    log.append({"id": "potential_burgers.gamma", "eps": float(eps)})
    meta["applied"] = log
    return field.replace(values=np.log(w)[None], meta=meta)
