"""Closed-form group actions on solution fields, cropping, and regridding.

Outputs always live on regular grids.  Shifts and boosts resample onto the
source grid (exact Fourier phase shifts on periodic axes); scalings are
absorbed into the coordinate vectors (exact, no interpolation); the
projective and rotation actions genuinely resample and mark the result
non-periodic so residual checks switch to local stencils.  Time windows
never extrapolate: rows whose preimage leaves the computed horizon are
dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import (
    ArgumentError,
    AugmentationTooStrongError,
    CropError,
)
from ..fields import SolutionField
from ..spectral import (
    _lagrange6_weights,
    periodic_resample,
    periodic_shift,
    trig_resample,
)
from .catalog import GeneratorSpec, generator

_T_TOL = 1e-9


def _log_applied(meta: dict, gen: GeneratorSpec, eps: float, eps_effective: float):
    log = list(meta.get("applied", []))
    entry = {"id": gen.qualified_id, "eps": float(eps)}
    if eps_effective != eps:
        entry["eps_effective"] = float(eps_effective)
    log.append(entry)
    meta["applied"] = log
    meta.pop("pressure", None)  # analytic pressure formulas do not transform


def _shift_values(values: np.ndarray, shift_cells: np.ndarray, axis: int, periodic: bool):
    """Shift along ``axis`` by per-slice cell counts (exact when periodic)."""
    moved = np.moveaxis(values, axis, -1)
    if periodic:
        out = periodic_shift(moved, shift_cells)
    else:
        # Non-periodic axis: local kernel limits seam contamination.
        idx = np.arange(moved.shape[-1]) - np.asarray(shift_cells)[..., None]
        out = periodic_resample(moved, idx, order=6)
    return np.moveaxis(out, -1, axis)


def _interp_rows(values: np.ndarray, t_coords: np.ndarray, query_t: np.ndarray):
    """Linear interpolation between time rows (axis 1) at query times."""
    dt = t_coords[1] - t_coords[0]
    pos = (query_t - t_coords[0]) / dt
    pos = np.clip(pos, 0.0, len(t_coords) - 1.0)
    i0 = np.minimum(np.floor(pos).astype(np.intp), len(t_coords) - 2)
    frac = pos - i0
    lo = np.take(values, i0, axis=1)
    hi = np.take(values, i0 + 1, axis=1)
    shape = [1] * values.ndim
    shape[1] = len(query_t)
    w = frac.reshape(shape)
    return (1.0 - w) * lo + w * hi


def _apply_x_like_shift(gen: GeneratorSpec, eps: float, field: SolutionField, axis: int):
    t = field.t_coords
    spacing = field.dx if axis == 2 else field.dy
    periodic = field.x_periodic if axis == 2 else field.y_periodic
    shifts = np.broadcast_to(np.asarray(gen.shift(eps, t), dtype=np.float64), t.shape)
    cells = shifts / spacing
    if field.y_coords is not None:
        # After moveaxis the leading dims are (c, t, other-space): one shift
        # per frame, broadcast over channels and the untouched space axis.
        cells_b = cells[None, :, None]
    else:
        cells_b = cells[None, :]
    values = _shift_values(field.values, cells_b, axis, periodic)
    if gen.offset_u is not None:
        values[0] += np.reshape(gen.offset_u(eps, t), (-1,) + (1,) * (values.ndim - 2))
    if gen.offset_v is not None:
        values[1] += np.reshape(gen.offset_v(eps, t), (-1,) + (1,) * (values.ndim - 2))
    meta = dict(field.meta)
    _log_applied(meta, gen, eps, eps)
    return field.replace(values=values, meta=meta)


def _apply_t_shift(gen: GeneratorSpec, eps: float, field: SolutionField, snap: bool):
    t = field.t_coords
    n_t = field.n_t
    dt = field.dt
    meta = dict(field.meta)
    if snap:
        k = int(round(eps / dt))
        eps_eff = k * dt
        if abs(k) >= n_t:
            raise AugmentationTooStrongError(
                f"time shift {eps} leaves no valid rows (|shift| >= horizon)"
            )
        if k >= 0:
            values = field.values[:, : n_t - k]
            coords = t[k:]
        else:
            values = field.values[:, -k:]
            coords = t[: n_t + k]
        _log_applied(meta, gen, eps, eps_eff)
        return field.replace(values=values.copy(), t_coords=coords.copy(), meta=meta)
    preimage = t - eps
    valid = (preimage >= t[0] - _T_TOL) & (preimage <= t[-1] + _T_TOL)
    if not np.any(valid):
        raise AugmentationTooStrongError(
            f"time shift {eps} leaves no valid rows (|shift| >= horizon)"
        )
    values = _interp_rows(field.values, t, preimage[valid])
    _log_applied(meta, gen, eps, eps)
    return field.replace(values=values, t_coords=t[valid].copy(), meta=meta)


def _apply_scaling(gen: GeneratorSpec, eps: float, field: SolutionField):
    """Absorb the scaling into coordinates and values: exact, lossless, and
    the result stays periodic on its own (rescaled) domain."""
    meta = dict(field.meta)
    if field.y_coords is None:
        mx, mt, mu = gen.scaling
        values = field.values * math.exp(mu * eps)
        x = field.x_coords * math.exp(mx * eps)
        y = None
    else:
        mx, my, mt, mu, mv = gen.scaling
        values = field.values.copy()
        values[0] *= math.exp(mu * eps)
        values[1] *= math.exp(mv * eps)
        x = field.x_coords * math.exp(mx * eps)
        y = field.y_coords * math.exp(my * eps)
    t = field.t_coords * math.exp(mt * eps)
    if "length" in meta:
        meta["length"] = meta["length"] * math.exp(mx * eps)
    if "horizon" in meta:
        meta["horizon"] = meta["horizon"] * math.exp(mt * eps)
    _log_applied(meta, gen, eps, eps)
    return field.replace(values=values, t_coords=t, x_coords=x, y_coords=y, meta=meta)


def _apply_projective(gen: GeneratorSpec, eps: float, field: SolutionField):
    t = field.t_coords
    t_scale = max(abs(t[0]), abs(t[-1]))
    if abs(eps) * t_scale >= 0.5:
        raise ArgumentError(
            f"projective strength |eps|*T = {abs(eps) * t_scale:.3f} >= 0.5; "
            "1 - eps t would approach zero"
        )
    denom = 1.0 + eps * t
    preimage_t = t / denom
    valid = (
        (denom > 0.0)
        & (preimage_t >= t[0] - _T_TOL)
        & (preimage_t <= t[-1] + _T_TOL)
    )
    if not np.any(valid):
        raise AugmentationTooStrongError("projective map leaves no valid rows")
    t_out = t[valid]
    rows = _interp_rows(field.values, t, preimage_t[valid])  # (c, nv, nx)
    dx = field.dx
    x = field.x_coords
    factor = 1.0 / (1.0 + eps * t_out)  # x preimage compression per row
    preimage_x = x[None, :] * factor[:, None]
    frac_idx = (preimage_x - x[0]) / dx
    if field.x_periodic:
        sampled = trig_resample(rows, frac_idx)
    else:
        sampled = periodic_resample(rows, frac_idx, order=6)
    tp = preimage_t[valid][None, :, None]
    u_new = sampled + eps * (preimage_x[None, :, :] - tp * sampled)
    meta = dict(field.meta)
    meta["x_periodic"] = False
    _log_applied(meta, gen, eps, eps)
    return field.replace(values=u_new, t_coords=t_out.copy(), meta=meta)


def _apply_rotation(gen: GeneratorSpec, eps: float, field: SolutionField):
    x, y = field.x_coords, field.y_coords
    nx, ny = field.n_x, field.n_y
    dx, dy = field.dx, field.dy
    c, s = math.cos(eps), math.sin(eps)
    xg = x[:, None]
    yg = y[None, :]
    preimage_x = c * xg + s * yg
    preimage_y = -s * xg + c * yg
    fx = (preimage_x - x[0]) / dx
    fy = (preimage_y - y[0]) / dy
    bx = np.floor(fx).astype(np.intp)
    by = np.floor(fy).astype(np.intp)
    wx = _lagrange6_weights(fx - bx)
    wy = _lagrange6_weights(fy - by)
    vals = field.values
    out = np.zeros_like(vals)
    for i, off_i in enumerate((-2, -1, 0, 1, 2, 3)):
        ix = (bx + off_i) % nx
        for j, off_j in enumerate((-2, -1, 0, 1, 2, 3)):
            iy = (by + off_j) % ny
            out += (wx[i] * wy[j])[None, None, :, :] * vals[:, :, ix, iy]
    u_rot = c * out[0] - s * out[1]
    v_rot = s * out[0] + c * out[1]
    meta = dict(field.meta)
    meta["x_periodic"] = False
    meta["y_periodic"] = False
    _log_applied(meta, gen, eps, eps)
    return field.replace(values=np.stack([u_rot, v_rot]), meta=meta)


def apply_closed_form(
    gen: GeneratorSpec | str,
    eps: float,
    field: SolutionField,
    snap_time_shift: bool = True,
) -> SolutionField:
    """Apply one generator's closed-form group action at strength eps.

    Pure time translations snap eps to the frame grid by default, making the
    output an exact window of the source (pass snap_time_shift=False inside
    product-formula stages, where stage parameters are fractions of a frame).
    """
    if isinstance(gen, str):
        gen = generator(field.equation, gen)
    if gen.equation != field.equation:
        raise ArgumentError(
            f"generator {gen.qualified_id} does not act on {field.equation!r} fields"
        )
    if eps == 0.0:
        meta = dict(field.meta)
        _log_applied(meta, gen, 0.0, 0.0)
        return field.replace(values=field.values.copy(), meta=meta)
    if gen.kind == "x_shift":
        return _apply_x_like_shift(gen, eps, field, axis=2)
    if gen.kind == "y_shift":
        return _apply_x_like_shift(gen, eps, field, axis=3)
    if gen.kind == "t_shift":
        return _apply_t_shift(gen, eps, field, snap_time_shift)
    if gen.kind == "scaling":
        return _apply_scaling(gen, eps, field)
    if gen.kind == "projective":
        return _apply_projective(gen, eps, field)
    if gen.kind == "rotation":
        return _apply_rotation(gen, eps, field)
    raise ArgumentError(f"unknown generator kind {gen.kind!r}")


@dataclass(frozen=True)
class CropWindow:
    """Crop extents in index units, (t, x) or (t, x, y)."""

    t_len: int
    x_len: int
    y_len: int | None = None

    @classmethod
    def of(cls, window) -> "CropWindow":
        if isinstance(window, CropWindow):
            return window
        return cls(*window)

    @property
    def dims(self):
        return (self.t_len, self.x_len) + (
            (self.y_len,) if self.y_len is not None else ()
        )


def crop(field: SolutionField, window, origin) -> SolutionField:
    """Slice a window out of a field: t never wraps, periodic axes do."""
    win = CropWindow.of(window)
    dims = win.dims
    if (win.y_len is None) != (field.y_coords is None):
        raise CropError("crop window dimensionality does not match the field")
    origin = tuple(int(o) for o in origin)
    if len(origin) != len(dims):
        raise CropError("origin and window dimensionality differ")
    shape = (field.n_t, field.n_x) + ((field.n_y,) if field.y_coords is not None else ())
    for w, n in zip(dims, shape):
        if w < 1 or w > n:
            raise CropError(f"crop window {dims} exceeds field shape {shape}")

    it = origin[0]
    if it < 0 or it + win.t_len > field.n_t:
        raise CropError(
            f"temporal origin {it} with window {win.t_len} outside [0, {field.n_t}]"
        )

    def space_idx(o, length, n, periodic, name):
        if periodic:
            return (o + np.arange(length)) % n
        if o < 0 or o + length > n:
            raise CropError(f"{name} origin {o} with window {length} outside field")
        return o + np.arange(length)

    ix = space_idx(origin[1], win.x_len, field.n_x, field.x_periodic, "x")
    x_coords = field.x_coords[ix[0]] + np.arange(win.x_len) * field.dx
    values = field.values[:, it : it + win.t_len][:, :, ix]
    y_coords = None
    if win.y_len is not None:
        iy = space_idx(origin[2], win.y_len, field.n_y, field.y_periodic, "y")
        values = values[:, :, :, iy]
        y_coords = field.y_coords[iy[0]] + np.arange(win.y_len) * field.dy
    meta = dict(field.meta)
    meta["crop_origin"] = list(origin)
    # A strict sub-window of a periodic axis is no longer periodic.
    if win.x_len < field.n_x:
        meta["x_periodic"] = False
    if win.y_len is not None and win.y_len < field.n_y:
        meta["y_periodic"] = False
    return field.replace(
        values=values.copy(),
        t_coords=field.t_coords[it : it + win.t_len].copy(),
        x_coords=x_coords,
        y_coords=y_coords,
        meta=meta,
    )


def _circular_overlap(o1: int, o2: int, length: int, n: int, periodic: bool) -> int:
    """Cells shared by two length-``length`` windows on an axis of size n."""
    if not periodic:
        lo = max(o1, o2)
        hi = min(o1 + length, o2 + length)
        return max(0, hi - lo)
    d = (o1 - o2) % n
    d = min(d, n - d)
    if length >= n:
        return n
    return max(0, length - d) + max(0, length - (n - d))


def crop_overlap_fraction(field: SolutionField, window, origin_a, origin_b) -> float:
    """Fraction of window A's cells shared with window B."""
    win = CropWindow.of(window)
    dims = win.dims
    shape = (field.n_t, field.n_x) + ((field.n_y,) if field.y_coords is not None else ())
    periodic = (False, field.x_periodic) + (
        (field.y_periodic,) if field.y_coords is not None else ()
    )
    cells = 1
    total = 1
    for w, n, per, oa, ob in zip(dims, shape, periodic, origin_a, origin_b):
        cells *= _circular_overlap(int(oa), int(ob), w, n, per)
        total *= w
    return cells / total
