"""Fourier-spectral primitives on power-of-two periodic grids.

Forward/inverse transforms use an iterative radix-2 decimation-in-time FFT
with precomputed twiddle and bit-reversal tables, vectorized over leading
axes.  Real input is carried as a halfspectrum (modes 0..n/2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, GridSizeError
from .grid import Grid1D, _is_power_of_two

_TABLE_CACHE: dict[int, tuple[np.ndarray, list[np.ndarray]]] = {}


def _tables(n: int):
    """Bit-reversal permutation and per-stage twiddle factors for length n."""
    cached = _TABLE_CACHE.get(n)
    if cached is not None:
        return cached
    stages = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(stages):
        rev |= ((idx >> b) & 1) << (stages - 1 - b)
    twiddles = []
    m = 2
    while m <= n:
        twiddles.append(np.exp(-2j * np.pi * np.arange(m // 2) / m))
        m *= 2
    _TABLE_CACHE[n] = (rev, twiddles)
    return rev, twiddles


def _check_length(n: int):
    if n < 2 or not _is_power_of_two(n):
        raise GridSizeError(f"transform length must be a power of two >= 2, got {n}")


def _fft_complex(a: np.ndarray) -> np.ndarray:
    """Radix-2 DIT FFT along the last axis; a must be complex, length 2^k."""
    n = a.shape[-1]
    rev, twiddles = _tables(n)
    a = a[..., rev]
    batch = a.shape[:-1]
    m = 2
    for tw in twiddles:
        half = m // 2
        b = a.reshape(batch + (n // m, m))
        even = b[..., :half]
        odd = b[..., half:] * tw
        a = np.concatenate([even + odd, even - odd], axis=-1).reshape(batch + (n,))
        m *= 2
    return a


def rfft_core(values: np.ndarray) -> np.ndarray:
    """Real (..., n) -> halfspectrum (..., n/2+1), numpy-free of np.fft."""
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[-1]
    _check_length(n)
    spec = _fft_complex(values.astype(np.complex128))[..., : n // 2 + 1]
    # DC and Nyquist bins of a real signal are real; drop roundoff junk.
    spec[..., 0] = spec[..., 0].real
    spec[..., -1] = spec[..., -1].real
    return spec


def irfft_core(spec: np.ndarray, n: int) -> np.ndarray:
    """Halfspectrum (..., n/2+1) -> real (..., n)."""
    _check_length(n)
    spec = np.asarray(spec, dtype=np.complex128)
    if spec.shape[-1] != n // 2 + 1:
        raise GridSizeError(
            f"halfspectrum length {spec.shape[-1]} does not match n={n}"
        )
    full = np.empty(spec.shape[:-1] + (n,), dtype=np.complex128)
    full[..., : n // 2 + 1] = spec
    full[..., n // 2 + 1 :] = np.conj(spec[..., n // 2 - 1 : 0 : -1])
    return np.conj(_fft_complex(np.conj(full))).real / n


@dataclass(frozen=True)
class Spectrum:
    """Halfspectrum of a real signal: coefficients for modes 0..n/2."""

    coeffs: np.ndarray
    n: int

    def __post_init__(self):
        _check_length(self.n)
        if self.coeffs.shape != (self.n // 2 + 1,):
            raise GridSizeError(
                f"expected {self.n // 2 + 1} coefficients for n={self.n}, "
                f"got shape {self.coeffs.shape}"
            )


def forward_fft(values) -> Spectrum:
    """DFT of a real sequence; coefficient j = sum_m values[m] e^{-2 pi i jm/n}."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1:
        raise GridSizeError("forward_fft expects a 1D real sequence")
    return Spectrum(rfft_core(values), values.shape[0])


def inverse_fft(spectrum: Spectrum) -> np.ndarray:
    """Inverse of forward_fft; forward-then-inverse is the identity."""
    return irfft_core(spectrum.coeffs, spectrum.n)


def spectral_derivative(field, grid: Grid1D, order: int) -> np.ndarray:
    """d^order/dx^order along the last axis; mode j scaled by (i k_j)^order.

    The Nyquist mode is zeroed for odd orders (its sign is ambiguous).
    """
    if not 1 <= order <= 4:
        raise ArgumentError(f"derivative order must be in 1..4, got {order}")
    field = np.asarray(field, dtype=np.float64)
    if field.shape[-1] != grid.n_points:
        raise GridSizeError(
            f"field length {field.shape[-1]} != grid n_points {grid.n_points}"
        )
    spec = rfft_core(field)
    spec *= (1j * grid.wavenumbers) ** order
    if order % 2 == 1:
        spec[..., -1] = 0.0
    return irfft_core(spec, grid.n_points)


def dealias_mask(n: int) -> np.ndarray:
    """Boolean keep-mask for the 2/3 rule on halfspectrum modes 0..n/2."""
    j = np.arange(n // 2 + 1)
    return j <= n / 3.0


def dealias_two_thirds(spectrum: Spectrum) -> Spectrum:
    """Zero all modes with |j| > n/3; idempotent."""
    coeffs = np.where(dealias_mask(spectrum.n), spectrum.coeffs, 0.0 + 0.0j)
    return Spectrum(coeffs, spectrum.n)


def periodic_interpolate(field, grid: Grid1D, query_points) -> np.ndarray:
    """Catmull-Rom cubic interpolation with periodic wrapping.

    Exact at grid nodes; query points are wrapped modulo the domain length.
    """
    field = np.asarray(field, dtype=np.float64)
    if field.shape[-1] != grid.n_points:
        raise GridSizeError(
            f"field length {field.shape[-1]} != grid n_points {grid.n_points}"
        )
    frac_idx = np.asarray(query_points, dtype=np.float64) / grid.spacing
    return periodic_resample(field, frac_idx, order=4)


# Lagrange stencil node offsets for the order-6 kernel.
_LAG6_OFFSETS = np.array([-2.0, -1.0, 0.0, 1.0, 2.0, 3.0])


def _catmull_rom_weights(f: np.ndarray) -> list[np.ndarray]:
    f2 = f * f
    f3 = f2 * f
    return [
        0.5 * (-f3 + 2.0 * f2 - f),
        0.5 * (3.0 * f3 - 5.0 * f2 + 2.0),
        0.5 * (-3.0 * f3 + 4.0 * f2 + f),
        0.5 * (f3 - f2),
    ]


def _lagrange6_weights(f: np.ndarray) -> list[np.ndarray]:
    weights = []
    for j, oj in enumerate(_LAG6_OFFSETS):
        w = np.ones_like(f)
        for m, om in enumerate(_LAG6_OFFSETS):
            if m != j:
                w = w * (f - om) / (oj - om)
        weights.append(w)
    return weights


def periodic_shift(values, shift_cells, order="spectral") -> np.ndarray:
    """Shift a periodic signal along the last axis by a fractional cell count.

    ``shift_cells`` broadcasts against the leading axes (one shift per row is
    the common case).  The spectral path applies the exact Fourier phase ramp
    and reproduces the sampled signal to machine precision; integer shifts in
    any mode reduce to an exact roll.
    """
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[-1]
    shift = np.asarray(shift_cells, dtype=np.float64)
    if order != "spectral":
        idx = np.arange(n) - shift[..., None]
        return periodic_resample(values, idx, order=order)
    spec = rfft_core(values)
    j = np.arange(n // 2 + 1)
    spec = spec * np.exp(-2j * np.pi * j * (shift[..., None] % n) / n)
    # A shifted real signal is real; Nyquist keeps only its real part.
    spec[..., -1] = spec[..., -1].real
    return irfft_core(spec, n)


def trig_resample(values, frac_index) -> np.ndarray:
    """Evaluate the trigonometric interpolant at fractional indices.

    Exact for the sampled signal (it IS the band-limited reconstruction);
    O(n*m) per row, so reserved for non-shift warps like dilations.
    """
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[-1]
    spec = rfft_core(values)
    s = np.asarray(frac_index, dtype=np.float64) % n
    j = np.arange(n // 2 + 1)
    phases = np.exp(2j * np.pi * s[..., None] * j / n)
    # The Nyquist mode of a real signal contributes cos only.
    phases[..., -1] = np.cos(np.pi * s)
    weight = np.full(n // 2 + 1, 2.0)
    weight[0] = 1.0
    weight[-1] = 1.0
    return np.einsum("...mj,...j->...m", phases, weight * spec).real / n


def periodic_resample(values, frac_index, order: int = 6) -> np.ndarray:
    """Resample a periodic signal along the last axis at fractional indices.

    ``frac_index`` gives positions in index units (period = n) and broadcasts
    against the leading axes of ``values``, so per-row query sets are allowed.
    order=4 is Catmull-Rom, order=6 a centered 6-point Lagrange kernel.
    """
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[-1]
    s = np.asarray(frac_index, dtype=np.float64)
    scalar_query = s.ndim == 0
    if scalar_query:
        s = s.reshape(1)
    s = s % n
    out_shape = np.broadcast_shapes(s.shape, values.shape[:-1] + (s.shape[-1],))
    s = np.broadcast_to(s, out_shape)
    vals = np.broadcast_to(values, out_shape[:-1] + (n,))
    base = np.floor(s).astype(np.intp)
    f = s - base
    if order == 4:
        offsets = (-1, 0, 1, 2)
        weights = _catmull_rom_weights(f)
    elif order == 6:
        offsets = (-2, -1, 0, 1, 2, 3)
        weights = _lagrange6_weights(f)
    else:
        raise ArgumentError(f"unsupported resampling order {order}")
    result = np.zeros(out_shape, dtype=np.float64)
    for off, w in zip(offsets, weights):
        result += w * np.take_along_axis(vals, (base + off) % n, axis=-1)
    return result[..., 0] if scalar_query else result
