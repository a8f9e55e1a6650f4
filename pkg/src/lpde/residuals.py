"""PDE residual evaluation for solver outputs and augmented fields.

Spatial derivatives are spectral on periodic power-of-two axes and fall back
to high-order central finite differences (wrapped when periodic, interior-only
otherwise) for cropped, padded, or periodicity-breaking fields.  Time uses
4th-order central differences on uniform grids with 2nd-order one-sided rows
at the boundaries; boundary rows are excluded from the relative norm.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .errors import ArgumentError, ShapeError
from .fields import SolutionField, uniform_spacing
from .grid import _is_power_of_two
from .spectral import irfft_core, rfft_core

_EPS = float(np.finfo(np.float64).eps)
_STENCIL_RADIUS = 4


def _fd_weights(offsets, deriv_order: int) -> np.ndarray:
    """Finite-difference weights on integer offsets (Vandermonde solve)."""
    offsets = np.asarray(offsets, dtype=np.float64)
    n = offsets.size
    a = np.vander(offsets, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[deriv_order] = factorial(deriv_order)
    return np.linalg.solve(a, rhs)


_CENTRAL_OFFSETS = np.arange(-_STENCIL_RADIUS, _STENCIL_RADIUS + 1)
_CENTRAL_WEIGHTS = {
    order: _fd_weights(_CENTRAL_OFFSETS, order) for order in (1, 2, 3, 4)
}


def _spectral_x_derivative(vals: np.ndarray, dx: float, order: int) -> np.ndarray:
    n = vals.shape[-1]
    length = n * dx
    k = 2.0 * np.pi * np.arange(n // 2 + 1) / length
    spec = rfft_core(vals) * (1j * k) ** order
    if order % 2 == 1:
        spec[..., -1] = 0.0
    return irfft_core(spec, n)


def _fd_x_derivative(vals: np.ndarray, dx: float, order: int) -> np.ndarray:
    """Central FD along the last axis with wrapped indexing; on non-periodic
    data a band of stencil-radius cells per application is contaminated and
    must be trimmed by the caller."""
    w = _CENTRAL_WEIGHTS[order]
    out = np.zeros_like(vals)
    for off, c in zip(_CENTRAL_OFFSETS, w):
        if c == 0.0:
            continue
        out += c * np.roll(vals, -off, axis=-1)
    return out / dx**order


def x_derivative(vals: np.ndarray, dx: float, order: int, periodic: bool) -> np.ndarray:
    """Spatial derivative along the last axis; spectral when possible."""
    n = vals.shape[-1]
    if periodic and _is_power_of_two(n) and n >= 2:
        return _spectral_x_derivative(vals, dx, order)
    return _fd_x_derivative(vals, dx, order)


def time_derivative(vals: np.ndarray, dt: float) -> np.ndarray:
    """d/dt along axis 0: 4th-order central interior, 2nd-order edges."""
    n_t = vals.shape[0]
    if n_t < 5:
        raise ArgumentError("time derivative needs at least 5 frames")
    out = np.empty_like(vals)
    out[0] = (-3.0 * vals[0] + 4.0 * vals[1] - vals[2]) / (2.0 * dt)
    out[1] = (vals[2] - vals[0]) / (2.0 * dt)
    out[2:-2] = (
        vals[:-4] - 8.0 * vals[1:-3] + 8.0 * vals[3:-1] - vals[4:]
    ) / (12.0 * dt)
    out[-2] = (vals[-1] - vals[-3]) / (2.0 * dt)
    out[-1] = (3.0 * vals[-1] - 4.0 * vals[-2] + vals[-3]) / (2.0 * dt)
    return out


@dataclass(frozen=True)
class ResidualReport:
    """Interior residual field, its norm relative to ||u_t||, per-term norms."""

    residual: np.ndarray
    relative_norm: float
    term_norms: dict[str, float]


def _uniform_dt(field: SolutionField) -> float:
    try:
        return field.dt
    except ShapeError as exc:
        raise ArgumentError(
            "residual evaluation requires a uniform t-grid; resample first"
        ) from exc


def _interior(arr: np.ndarray, axis: int, trim: int) -> np.ndarray:
    if trim == 0:
        return arr
    sl = [slice(None)] * arr.ndim
    sl[axis] = slice(trim, arr.shape[axis] - trim)
    return arr[tuple(sl)]


def _norm(arr: np.ndarray) -> float:
    return float(np.sqrt(np.mean(arr**2)))


def _finalize(terms: dict[str, np.ndarray], field: SolutionField, has_y: bool, depth: int = 1):
    """Trim FD-contaminated bands (2 boundary frames in t; depth * stencil
    radius per non-periodic space axis, since composed FD applications widen
    the band) and reduce to norms."""
    space_trim = depth * _STENCIL_RADIUS
    axes = [(0, 2), (1, 0 if field.x_periodic else space_trim)]
    if has_y:
        axes.append((2, 0 if field.y_periodic else space_trim))
    delta = sum(terms.values())
    cut = {"residual": delta, **terms}
    for name in cut:
        arr = cut[name]
        for axis, trim in axes:
            arr = _interior(arr, axis, trim)
        cut[name] = arr
    rel = _norm(cut["residual"]) / (_norm(cut["u_t"]) + _EPS)
    return ResidualReport(
        residual=cut.pop("residual"),
        relative_norm=rel,
        term_norms={k: _norm(v) for k, v in cut.items()},
    )


# Largest |omega_linear(k)| * dt the 4th-order time stencil is trusted with;
# faster modes are excluded from the check band (FD4 error ~ (w dt)^4 / 30).
_RESOLVABLE_PHASE = 0.5


def _linear_frequency(eq: str, k: np.ndarray, nu) -> np.ndarray:
    if eq == "kdv":
        return k**3
    if eq == "ks":
        return np.abs(k**2 - k**4)
    return (nu or 0.0) * k**2


def _band_project(arr: np.ndarray, keep: np.ndarray) -> np.ndarray:
    n = arr.shape[-1]
    return irfft_core(rfft_core(arr) * keep, n)


def residual_report(field: SolutionField) -> ResidualReport:
    """Assemble the equation residual of a 1D solution field.

    Channel 0 is interpreted through meta["equation"]; 2D flow fields
    dispatch to ns_residual_report.  On periodic power-of-two grids the
    advection product is 2/3-dealiased exactly as the solvers compute it,
    and for the dispersive/stiff equations the check is restricted to
    modes whose linear phase rotation per frame the time stencil resolves.
    """
    eq = field.equation
    if eq == "ns2d":
        return ns_residual_report(field)
    u = field.u
    dt = _uniform_dt(field)
    dx = field.dx
    n = u.shape[-1]
    periodic = field.x_periodic
    spectral = periodic and _is_power_of_two(n)

    def dnx(w, order):
        return x_derivative(w, dx, order, periodic)

    if spectral:
        from .spectral import dealias_mask

        mask = dealias_mask(n)
        spec = rfft_core(u)
        u_adv = irfft_core(spec * mask, n)
        ux = dnx(_band_project(u, mask), 1)
        advection = _band_project(u_adv * ux, mask)
    else:
        u_adv = u
        advection = u * dnx(u, 1)

    u_t = time_derivative(u, dt)
    terms = {"u_t": u_t}
    if eq == "burgers":
        # Cole-Hopf output is an exact (non-Galerkin) solution: full product.
        terms["u u_x"] = u * dnx(u, 1)
        terms["-nu u_xx"] = -field.viscosity * dnx(u, 2)
    elif eq == "kdv":
        terms["u u_x"] = advection
        terms["u_xxx"] = dnx(u, 3)
    elif eq == "ks":
        terms["u u_x"] = advection
        terms["u_xx"] = dnx(u, 2)
        terms["u_xxxx"] = dnx(u, 4)
    elif eq == "heat":
        terms["-nu u_xx"] = -field.viscosity * dnx(u, 2)
    else:
        raise ArgumentError(f"no residual form for equation {eq!r}")

    if spectral and eq in ("kdv", "ks"):
        length = n * dx
        k = 2.0 * np.pi * np.arange(n // 2 + 1) / length
        keep = _linear_frequency(eq, k, field.viscosity) * dt <= _RESOLVABLE_PHASE
        terms = {name: _band_project(arr, keep) for name, arr in terms.items()}
    return _finalize(terms, field, has_y=False)


def potential_burgers_residual(field: SolutionField, nu: float = 1.0) -> ResidualReport:
    """Residual of the potential form u_t - nu (u_xx + u_x^2) = 0.

    This is the form whose symmetry catalog contains the log-shift
    transformation; with nu = 1 it matches the derivation example.
    """
    u = field.u
    dt = _uniform_dt(field)
    dx = field.dx
    periodic = field.x_periodic
    u_x = x_derivative(u, dx, 1, periodic)
    terms = {
        "u_t": time_derivative(u, dt),
        "-nu u_xx": -nu * x_derivative(u, dx, 2, periodic),
        "-nu u_x^2": -nu * u_x**2,
    }
    return _finalize(terms, field, has_y=False)


def _ns_derivative(vals, d, order, periodic, axis):
    moved = np.moveaxis(vals, axis, -1)
    out = x_derivative(moved, d, order, periodic)
    return np.moveaxis(out, -1, axis)


def divergence(field: SolutionField) -> np.ndarray:
    """Spectral divergence u_x + v_y of a 2D flow field, per frame."""
    u, v = field.values[0], field.values[1]
    du = _ns_derivative(u, field.dx, 1, field.x_periodic, axis=1)
    dv = _ns_derivative(v, field.dy, 1, field.y_periodic, axis=2)
    return du + dv


def ns_residual_report(field: SolutionField, form: str = "auto") -> ResidualReport:
    """Residual of the 2D incompressible flow.

    form="momentum" uses the momentum equations with the analytic vortex
    pressure (only valid for untransformed analytic fields, flagged by
    meta["pressure"]); form="curl" checks the pressure-free vorticity
    equation and is used for augmented / pressure-less inputs.
    """
    if form == "auto":
        form = "momentum" if field.meta.get("pressure") == "taylor_green" else "curl"
    u, v = field.values[0], field.values[1]
    dt = _uniform_dt(field)
    dx, dy = field.dx, field.dy
    px, py = field.x_periodic, field.y_periodic
    nu = field.viscosity

    def ddx(w, order=1):
        return _ns_derivative(w, dx, order, px, axis=1)

    def ddy(w, order=1):
        return _ns_derivative(w, dy, order, py, axis=2)

    if form == "curl":
        w = ddx(v) - ddy(u)
        terms = {
            "u_t": time_derivative(w, dt),  # vorticity tendency
            "u w_x": u * ddx(w),
            "v w_y": v * ddy(w),
            "-nu lap w": -nu * (ddx(w, 2) + ddy(w, 2)),
        }
        # Vorticity is itself a derivative: composed stencils double the
        # contaminated band on non-periodic axes.
        return _finalize(terms, field, has_y=True, depth=2)
    if form != "momentum":
        raise ArgumentError(f"unknown residual form {form!r}")
    t = field.t_coords[:, None, None]
    x = field.x_coords[None, :, None]
    y = field.y_coords[None, None, :]
    decay4 = np.exp(-4.0 * nu * t)
    p_x = 0.5 * np.sin(2.0 * x) * decay4
    p_y = 0.5 * np.sin(2.0 * y) * decay4
    res_u = (
        time_derivative(u, dt) + u * ddx(u) + v * ddy(u) + p_x
        - nu * (ddx(u, 2) + ddy(u, 2))
    )
    res_v = (
        time_derivative(v, dt) + u * ddx(v) + v * ddy(v) + p_y
        - nu * (ddx(v, 2) + ddy(v, 2))
    )
    u_t = np.concatenate([time_derivative(u, dt), time_derivative(v, dt)])
    terms = {"u_t": u_t, "momentum": np.concatenate([res_u, res_v]) - u_t}
    return _finalize(terms, field, has_y=True)


def mass_drift(field: SolutionField) -> float:
    """max_t |integral u dx (t) - integral u dx (0)| / (1 + |integral at 0|)."""
    cell = field.dx if field.y_coords is None else field.dx * field.dy
    mass = np.sum(field.u.reshape(field.n_t, -1), axis=1) * cell
    return float(np.max(np.abs(mass - mass[0])) / (1.0 + abs(mass[0])))
