"""Solution generation: truncated-sine initial conditions, exact Burgers via
Cole-Hopf with spectral heat evolution, ETDRK4 pseudo-spectral KdV/KS, and
the analytic decaying vortex family for the 2D flow equations."""

from __future__ import annotations

import math

import numpy as np

from .errors import ArgumentError, BlowUpError, GenerationError, GridSizeError
from .fields import EquationSpec, InitialConditionParams, SolutionField
from .grid import Grid1D, Grid2D
from .spectral import dealias_mask, irfft_core, rfft_core

# CFL-style safety factor for the dealiased advection term.
_CFL_SAFETY = 0.4
# Quadrature points for the ETDRK4 contour integrals.
_CONTOUR_POINTS = 32
# Largest centered exponent half-range for the Cole-Hopf factor: beyond this
# the minima of exp(-Phi/(2 nu)) sink under the f64 spectral noise floor
# (eps * e^{2h} relative error) and the quotient u = -2 nu phi_x / phi turns
# into noise long before exp itself overflows.
_MAX_COLE_HOPF_EXPONENT = 12.0


def initial_condition_values(params: InitialConditionParams, x, length: float):
    """Evaluate the truncated sine series at arbitrary positions."""
    x = np.asarray(x, dtype=np.float64)
    phase = (
        2.0 * np.pi * params.frequencies[:, None] * x[None, :] / length
        + params.phases[:, None]
    )
    return np.sum(params.amplitudes[:, None] * np.sin(phase), axis=0)


def sample_initial_condition(params: InitialConditionParams, grid: Grid1D):
    """u0[m] = sum_k A_k sin(2 pi w_k x_m / L + p_k) on the grid nodes."""
    return initial_condition_values(params, grid.nodes, grid.length)


def _output_times(horizon: float, n_t: int) -> np.ndarray:
    if n_t < 2:
        raise ArgumentError(f"n_t must be >= 2, got {n_t}")
    return np.linspace(0.0, horizon, n_t)


def _base_meta(spec: EquationSpec, params=None, **extra) -> dict:
    meta = spec.to_dict()
    if params is not None:
        meta["ic"] = params.to_dict()
    meta.update(extra)
    return meta


def solve_burgers(
    u0, spec: EquationSpec, n_t: int, params: InitialConditionParams | None = None
) -> SolutionField:
    """Exact Burgers solution via Cole-Hopf and spectral heat evolution.

    The spatial mean of u0 is removed before the transform (reported in
    meta["mean_removed"]); a Galilean boost restores any mean afterwards.
    Overflow of exp(-Phi/(2 nu)), or loss of positivity of the heat factor,
    raises GenerationError suggesting a larger viscosity or smaller
    amplitudes.
    """
    if spec.equation != "burgers":
        raise ArgumentError(f"spec is for {spec.equation!r}, not burgers")
    nu = spec.viscosity
    u0 = np.asarray(u0, dtype=np.float64)
    grid = Grid1D(u0.shape[-1], spec.length)
    k = grid.wavenumbers

    mean = float(np.mean(u0))
    spec_u = rfft_core(u0 - mean)
    # Periodic antiderivative: divide by ik, DC set to 0, Nyquist dropped
    # (same sign ambiguity as odd-order derivatives).
    anti = np.zeros_like(spec_u)
    anti[1:-1] = spec_u[1:-1] / (1j * k[1:-1])
    phi0_exponent = -irfft_core(anti, grid.n_points) / (2.0 * nu)
    # exp shift-invariance: u = -2 nu phi_x / phi ignores constant factors.
    phi0_exponent -= 0.5 * (phi0_exponent.max() + phi0_exponent.min())
    if np.max(np.abs(phi0_exponent)) > _MAX_COLE_HOPF_EXPONENT:
        raise GenerationError(
            "Cole-Hopf factor exp(-Phi/(2 nu)) overflows f64; "
            "use a larger viscosity or smaller initial amplitudes"
        )
    phi_hat0 = rfft_core(np.exp(phi0_exponent))

    times = _output_times(spec.horizon, n_t)
    decay = np.exp(-nu * k[None, :] ** 2 * times[:, None])
    phi_hat = phi_hat0[None, :] * decay
    phi = irfft_core(phi_hat, grid.n_points)
    if not np.all(np.isfinite(phi)) or np.min(phi) <= 0.0:
        raise GenerationError(
            "heat factor phi lost positivity (spectral noise floor reached); "
            "use a larger viscosity or smaller initial amplitudes"
        )
    dphi = irfft_core(phi_hat * (1j * k)[None, :], grid.n_points)
    u = -2.0 * nu * dphi / phi
    return SolutionField(
        values=u[None, :, :],
        t_coords=times,
        x_coords=grid.nodes,
        meta=_base_meta(spec, params, mean_removed=mean, solver="cole_hopf_spectral"),
    )


def _etdrk4_tables(lin: np.ndarray, h: float):
    """ETDRK4 coefficients via contour-integral quadrature.

    Works for real (dissipative) and imaginary (dispersive) linear symbols;
    the mean over roots of unity is kept complex unless lin is real.
    """
    m = _CONTOUR_POINTS
    # Full unit circle: the half-circle + real-part shortcut is only valid
    # for real symbols; KdV's dispersive symbol is imaginary.
    roots = np.exp(2j * np.pi * (np.arange(m) + 0.5) / m)
    lr = h * lin[:, None] + roots[None, :]
    exp_lr = np.exp(lr)
    q = h * np.mean((np.exp(lr / 2.0) - 1.0) / lr, axis=1)
    f1 = h * np.mean((-4.0 - lr + exp_lr * (4.0 - 3.0 * lr + lr**2)) / lr**3, axis=1)
    f2 = h * np.mean((2.0 + lr + exp_lr * (lr - 2.0)) / lr**3, axis=1)
    f3 = h * np.mean((-4.0 - 3.0 * lr - lr**2 + exp_lr * (4.0 - lr)) / lr**3, axis=1)
    if np.isrealobj(lin):
        q, f1, f2, f3 = q.real, f1.real, f2.real, f3.real
    return np.exp(h * lin), np.exp(0.5 * h * lin), q, f1, f2, f3


def _linear_symbol(equation: str, k: np.ndarray) -> np.ndarray:
    if equation == "kdv":
        return 1j * k**3  # -d^3/dx^3
    if equation == "ks":
        return k**2 - k**4  # -d^2/dx^2 - d^4/dx^4
    raise ArgumentError(f"no pseudo-spectral integrator for {equation!r}")


def _etdrk4_run(u0_batch: np.ndarray, spec: EquationSpec, n_t: int):
    """Integrate a batch of samples sharing one internal step size."""
    n = u0_batch.shape[-1]
    grid = Grid1D(n, spec.length)
    k = grid.wavenumbers
    lin = _linear_symbol(spec.equation, k)
    mask = dealias_mask(n)
    ik = 1j * k.copy()
    ik[-1] = 0.0  # odd derivative: zero the Nyquist mode

    times = _output_times(spec.horizon, n_t)
    dt_frame = times[1] - times[0]
    umax = float(np.max(np.abs(u0_batch)))
    dt_cfl = min(spec.horizon / n_t, _CFL_SAFETY * grid.spacing / (1.0 + umax))
    substeps = max(1, math.ceil(dt_frame / dt_cfl))
    h = dt_frame / substeps
    e_full, e_half, q, f1, f2, f3 = _etdrk4_tables(lin, h)

    def nonlinear(v_hat):
        # 2/3 rule on both factors and the product; with a purely dispersive
        # linear part (KdV) aliased energy above the cutoff never decays.
        u = irfft_core(v_hat * mask, n)
        ux = irfft_core(v_hat * ik * mask, n)
        return -rfft_core(u * ux) * mask

    v = rfft_core(u0_batch)
    frames = np.empty(u0_batch.shape[:-1] + (n_t, n), dtype=np.float64)
    frames[..., 0, :] = u0_batch
    step_index = 0
    for i in range(1, n_t):
        for _ in range(substeps):
            nv = nonlinear(v)
            a = e_half * v + q * nv
            na = nonlinear(a)
            b = e_half * v + q * na
            nb = nonlinear(b)
            c = e_half * a + q * (2.0 * nb - nv)
            nc = nonlinear(c)
            v = e_full * v + nv * f1 + 2.0 * (na + nb) * f2 + nc * f3
            step_index += 1
            if not np.all(np.isfinite(v)):
                raise BlowUpError(
                    f"{spec.equation} state became non-finite at internal step "
                    f"{step_index} (h={h:.3e})",
                    step_index,
                )
        frames[..., i, :] = irfft_core(v, n)
    return frames, times, grid, substeps, h


def _solve_1d(u0, spec, n_t, params):
    u0 = np.asarray(u0, dtype=np.float64)
    single = u0.ndim == 1
    frames, times, grid, substeps, h = _etdrk4_run(
        u0 if not single else u0[None, :], spec, n_t
    )
    solver_meta = {"solver": "etdrk4", "internal_dt": h, "substeps_per_frame": substeps}
    if single:
        return SolutionField(
            values=frames[0][None, :, :],
            t_coords=times,
            x_coords=grid.nodes,
            meta=_base_meta(spec, params, **solver_meta),
        )
    return [
        SolutionField(
            values=frames[i][None, :, :],
            t_coords=times,
            x_coords=grid.nodes,
            meta=_base_meta(
                spec, params[i] if params is not None else None, **solver_meta
            ),
        )
        for i in range(frames.shape[0])
    ]


def solve_kdv(u0, spec: EquationSpec, n_t: int, params=None):
    """Method-of-lines KdV with spectral derivatives, 2/3-dealiased advection,
    and ETDRK4 for the dispersive linear part."""
    if spec.equation != "kdv":
        raise ArgumentError(f"spec is for {spec.equation!r}, not kdv")
    return _solve_1d(u0, spec, n_t, params)


def solve_ks(u0, spec: EquationSpec, n_t: int, params=None):
    """Same integrator as solve_kdv with the stiff -u_xx - u_xxxx linear part."""
    if spec.equation != "ks":
        raise ArgumentError(f"spec is for {spec.equation!r}, not ks")
    return _solve_1d(u0, spec, n_t, params)


def heat_field(w0, nu: float, grid: Grid1D, n_t: int, horizon: float) -> SolutionField:
    """Exact spectral heat evolution w_t = nu w_xx of an initial profile."""
    if not nu > 0.0:
        raise ArgumentError("viscosity must be positive")
    w0 = np.asarray(w0, dtype=np.float64)
    if w0.shape != (grid.n_points,):
        raise GridSizeError("initial profile does not match the grid")
    k = grid.wavenumbers
    times = _output_times(horizon, n_t)
    w_hat = rfft_core(w0)[None, :] * np.exp(-nu * k[None, :] ** 2 * times[:, None])
    return SolutionField(
        values=irfft_core(w_hat, grid.n_points)[None, :, :],
        t_coords=times,
        x_coords=grid.nodes,
        meta={
            "equation": "heat",
            "length": grid.length,
            "horizon": horizon,
            "viscosity": nu,
        },
    )


def taylor_green_field(nu: float, grid: Grid2D, n_t: int, horizon: float) -> SolutionField:
    """Analytic decaying vortex lattice on [0, 2 pi]^2.

    u = -cos x sin y e^{-2 nu t}, v = sin x cos y e^{-2 nu t}; divergence-free
    by construction, with known pressure -(cos 2x + cos 2y) e^{-4 nu t}/4.
    """
    if not nu > 0.0:
        raise ArgumentError("viscosity must be positive")
    if abs(grid.length_x - 2.0 * np.pi) > 1e-12 or abs(grid.length_y - 2.0 * np.pi) > 1e-12:
        raise ArgumentError("analytic vortex family requires the [0, 2 pi]^2 domain")
    times = _output_times(horizon, n_t)
    x = grid.x_grid.nodes
    y = grid.y_grid.nodes
    decay = np.exp(-2.0 * nu * times)[:, None, None]
    u = -np.cos(x)[None, :, None] * np.sin(y)[None, None, :] * decay
    v = np.sin(x)[None, :, None] * np.cos(y)[None, None, :] * decay
    spec = EquationSpec("ns2d", 2.0 * np.pi, horizon, nu)
    return SolutionField(
        values=np.stack([u, v]),
        t_coords=times,
        x_coords=x,
        y_coords=y,
        meta=_base_meta(spec, None, pressure="taylor_green", solver="analytic"),
    )
