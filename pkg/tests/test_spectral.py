"""Spectral primitives: transforms, derivatives, dealiasing, interpolation."""

import numpy as np
import pytest

from lpde.errors import ArgumentError, GridSizeError
from lpde.grid import Grid1D
from lpde.spectral import (
    Spectrum,
    dealias_two_thirds,
    forward_fft,
    inverse_fft,
    periodic_interpolate,
    periodic_shift,
    rfft_core,
    spectral_derivative,
    trig_resample,
)


def naive_dft(x):
    """O(n^2) reference transform."""
    n = len(x)
    j = np.arange(n)
    return np.array(
        [np.sum(x * np.exp(-2j * np.pi * k * j / n)) for k in range(n // 2 + 1)]
    )


class TestForwardFFT:
    def test_constant_vector_is_dc_only(self):
        spec = forward_fft(np.full(32, 2.5))
        assert abs(spec.coeffs[0] - 32 * 2.5) < 1e-12
        assert np.max(np.abs(spec.coeffs[1:])) < 1e-12

    def test_single_sine_mode(self):
        n = 64
        spec = forward_fft(np.sin(2 * np.pi * np.arange(n) / n))
        expected = np.zeros(n // 2 + 1, dtype=complex)
        expected[1] = -0.5j * n
        assert np.max(np.abs(spec.coeffs - expected)) < 1e-10

    def test_matches_naive_dft(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(64)
        ref = naive_dft(x)
        got = forward_fft(x).coeffs
        assert np.max(np.abs(got - ref)) / np.max(np.abs(ref)) < 1e-12

    def test_dc_bin_real(self):
        rng = np.random.default_rng(1)
        spec = forward_fft(rng.standard_normal(128))
        assert spec.coeffs[0].imag == 0.0

    def test_non_power_of_two_rejected(self):
        with pytest.raises(GridSizeError):
            forward_fft(np.zeros(48))
        with pytest.raises(GridSizeError):
            forward_fft(np.zeros(1))


class TestInverseFFT:
    @pytest.mark.parametrize("n", [32, 64, 128, 256, 512, 1024])
    def test_roundtrip(self, n):
        rng = np.random.default_rng(n)
        for _ in range(100 // 6 + 1):
            x = rng.standard_normal(n)
            back = inverse_fft(forward_fft(x))
            assert np.max(np.abs(back - x)) <= 1e-12 * np.max(np.abs(x))

    def test_zero_spectrum(self):
        spec = Spectrum(np.zeros(17, dtype=complex), 32)
        assert np.all(inverse_fft(spec) == 0.0)

    def test_single_bin_inverse(self):
        n = 64
        coeffs = np.zeros(n // 2 + 1, dtype=complex)
        coeffs[1] = -0.5j * n
        back = inverse_fft(Spectrum(coeffs, n))
        assert np.max(np.abs(back - np.sin(2 * np.pi * np.arange(n) / n))) < 1e-12

    def test_layout_mismatch(self):
        with pytest.raises(GridSizeError):
            Spectrum(np.zeros(10, dtype=complex), 32)

    def test_parseval(self):
        rng = np.random.default_rng(7)
        for n in (32, 128, 512):
            x = rng.standard_normal(n)
            spec = forward_fft(x).coeffs
            weight = np.full(n // 2 + 1, 2.0)
            weight[0] = 1.0
            weight[-1] = 1.0
            lhs = np.sum(x**2)
            rhs = np.sum(weight * np.abs(spec) ** 2) / n
            assert abs(lhs - rhs) <= 1e-10 * lhs


class TestSpectralDerivative:
    def test_first_derivative_of_sine(self):
        g = Grid1D(128, 4.0)
        k = 2 * np.pi / g.length
        d = spectral_derivative(np.sin(k * g.nodes), g, 1)
        assert np.max(np.abs(d - k * np.cos(k * g.nodes))) <= 1e-10

    @pytest.mark.parametrize("order", [1, 2, 3, 4])
    def test_derivative_of_constant_is_zero(self, order):
        g = Grid1D(64, 1.0)
        d = spectral_derivative(np.full(64, 3.3), g, order)
        assert np.max(np.abs(d)) < 1e-10

    def test_fourth_derivative(self):
        g = Grid1D(128, 5.0)
        k = 2 * np.pi / g.length
        f = np.sin(k * g.nodes)
        d = spectral_derivative(f, g, 4)
        assert np.max(np.abs(d - k**4 * f)) <= 1e-8 * k**4

    def test_linearity(self):
        g = Grid1D(128, 2.0)
        rng = np.random.default_rng(3)
        a, b = rng.standard_normal(128), rng.standard_normal(128)
        lhs = spectral_derivative(a + b, g, 2)
        rhs = spectral_derivative(a, g, 2) + spectral_derivative(b, g, 2)
        assert np.max(np.abs(lhs - rhs)) <= 1e-9 * max(1.0, np.max(np.abs(lhs)))

    @pytest.mark.parametrize("order", [0, 5])
    def test_order_bounds(self, order):
        g = Grid1D(64, 1.0)
        with pytest.raises(ArgumentError):
            spectral_derivative(np.zeros(64), g, order)


class TestDealias:
    def test_mode_below_cutoff_unchanged(self):
        coeffs = np.zeros(65, dtype=complex)
        coeffs[1] = 1.0 + 2.0j
        out = dealias_two_thirds(Spectrum(coeffs, 128))
        assert np.array_equal(out.coeffs, coeffs)

    def test_mode_above_cutoff_zeroed(self):
        coeffs = np.zeros(65, dtype=complex)
        coeffs[60] = 1.0
        out = dealias_two_thirds(Spectrum(coeffs, 128))
        assert np.all(out.coeffs == 0.0)
        # cutoff for n=128 sits at j=42
        coeffs = np.zeros(65, dtype=complex)
        coeffs[42] = 1.0
        assert dealias_two_thirds(Spectrum(coeffs, 128)).coeffs[42] == 1.0

    def test_idempotent(self):
        rng = np.random.default_rng(5)
        coeffs = rng.standard_normal(65) + 1j * rng.standard_normal(65)
        once = dealias_two_thirds(Spectrum(coeffs, 128))
        twice = dealias_two_thirds(once)
        assert np.array_equal(once.coeffs, twice.coeffs)


class TestInterpolation:
    def test_exact_at_nodes(self):
        g = Grid1D(64, 3.0)
        rng = np.random.default_rng(11)
        f = rng.standard_normal(64)
        got = periodic_interpolate(f, g, g.nodes)
        assert np.array_equal(got, f)

    def test_constant_everywhere(self):
        g = Grid1D(32, 1.0)
        q = np.random.default_rng(0).uniform(-5, 5, 50)
        got = periodic_interpolate(np.full(32, 4.2), g, q)
        assert np.max(np.abs(got - 4.2)) < 1e-13

    def test_sine_accuracy(self):
        g = Grid1D(128, 2 * np.pi)
        q = np.random.default_rng(1).uniform(0, g.length, 1000)
        got = periodic_interpolate(np.sin(g.nodes), g, q)
        assert np.max(np.abs(got - np.sin(q))) <= 1e-5

    def test_bandlimited_reconstruction(self):
        # Modes up to n/4 reproduced to <= 1e-5 by the exact trigonometric
        # resampler the regridder uses for non-shift warps.
        n = 128
        g = Grid1D(n, 2 * np.pi)
        rng = np.random.default_rng(2)
        amps = rng.standard_normal(4)
        phases = rng.uniform(0, 2 * np.pi, 4)
        modes = (1, 7, 19, 32)

        def signal(x):
            return sum(a * np.cos(j * x + p) for a, j, p in zip(amps, modes, phases))

        f = signal(g.nodes)
        q = rng.uniform(0, n, 400)
        got = trig_resample(f, q)
        exact = signal(q * g.spacing)
        assert np.max(np.abs(got - exact)) <= 1e-5 * max(1.0, np.max(np.abs(f)))

    def test_spectral_shift_matches_roll(self):
        rng = np.random.default_rng(4)
        f = rng.standard_normal(64)
        assert np.max(np.abs(periodic_shift(f, 5.0) - np.roll(f, 5))) < 1e-12
