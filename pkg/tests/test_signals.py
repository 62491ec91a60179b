# test_signals.py

import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import unittest
import numpy as np

from config import RangeError
from signals import (Component, Signal, analytic_part, circular_shift, fourier_components, grid_frequencies,
                     is_on_grid, is_power_of_two, snap_to_grid, synth_fourier_series, synth_mixture,
                     synth_sinusoid)

FS = 2048.0
N = 2 ** 12


class TestSignals(unittest.TestCase):
    """Unit tests for signals module."""

    def test_is_power_of_two(self):
        """Only positive powers of two are accepted as lengths."""
        self.assertTrue(is_power_of_two(1))
        self.assertTrue(is_power_of_two(4096))
        self.assertFalse(is_power_of_two(0))
        self.assertFalse(is_power_of_two(1000))
        self.assertFalse(is_power_of_two(-8))

    def test_signal_validation(self):
        """Signals reject bad lengths, rates and non-finite samples."""
        with self.assertRaises(RangeError):
            Signal(np.zeros(1000), FS)
        for short in (1, 2):
            with self.assertRaises(RangeError):
                Signal(np.zeros(short), FS)
            with self.assertRaises(RangeError):
                grid_frequencies(short, FS)
        self.assertEqual(len(grid_frequencies(4, FS)), 4)
        with self.assertRaises(RangeError):
            Signal(np.zeros(N), 0.0)
        samples = np.zeros(N)
        samples[3] = np.nan
        with self.assertRaises(RangeError):
            Signal(samples, FS)

    def test_synth_sinusoid_samples(self):
        """Samples follow a*cos(2 pi f k / fs + phase)."""
        c = Component(0.5, 100.0, 0.25)
        x = synth_sinusoid(c, N, FS)
        k = np.arange(N)
        np.testing.assert_allclose(x.samples, 0.5 * np.cos(2 * np.pi * 100.0 * k / FS + 0.25), atol=1e-12)
        self.assertFalse(x.is_complex)

    def test_synth_sinusoid_rejects_nyquist(self):
        """Frequencies at or above Nyquist and negative amplitudes are rejected."""
        with self.assertRaises(RangeError):
            synth_sinusoid(Component(1.0, FS / 2), N, FS)
        with self.assertRaises(RangeError):
            synth_sinusoid(Component(-1.0, 10.0), N, FS)
        with self.assertRaises(RangeError):
            synth_sinusoid(Component(1.0, 10.0), 1000, FS)

    def test_zero_frequency_is_constant(self):
        """f = 0 gives a * cos(phase) everywhere."""
        x = synth_sinusoid(Component(2.0, 0.0, 0.0), N, FS)
        np.testing.assert_allclose(x.samples, 2.0)

    def test_empty_mixture_is_silence(self):
        """An empty component list gives zeros."""
        x = synth_mixture([], N, FS)
        self.assertEqual(len(x), N)
        self.assertEqual(x.energy(), 0.0)

    def test_mixture_is_pointwise_sum(self):
        """The mixture equals the sum of its sinusoids."""
        c1, c2 = Component(1.0, 64.0), Component(0.3, 80.0, 1.0)
        x = synth_mixture([c1, c2], N, FS)
        expected = synth_sinusoid(c1, N, FS).samples + synth_sinusoid(c2, N, FS).samples
        np.testing.assert_allclose(x.samples, expected)

    def test_fourier_series(self):
        """Harmonics n*f1 with unit amplitude; N out of range is rejected."""
        components = fourier_components(3, 8.0)
        self.assertEqual([c.frequency for c in components], [8.0, 16.0, 24.0])
        x = synth_fourier_series(3, 8.0, N, FS)
        self.assertAlmostEqual(x.samples[0], 3.0)
        with self.assertRaises(RangeError):
            synth_fourier_series(0, 8.0, N, FS)
        with self.assertRaises(RangeError):
            synth_fourier_series(128, 8.0, N, FS)

    def test_analytic_part(self):
        """Real part reproduces the input and negative frequencies vanish."""
        x = synth_mixture([Component(1.0, 64.0), Component(0.5, 200.0, 0.7)], N, FS)
        z = analytic_part(x)
        self.assertTrue(z.is_complex)
        np.testing.assert_allclose(z.samples.real, x.samples, atol=1e-10)
        spectrum = np.fft.fft(z.samples)
        negative = grid_frequencies(N, FS) < 0
        self.assertLess(np.max(np.abs(spectrum[negative])), 1e-8)

    def test_analytic_part_of_sinusoid(self):
        """A grid-aligned cosine becomes a complex exponential of the same amplitude."""
        x = synth_sinusoid(Component(0.8, 128.0, 0.3), N, FS)
        z = analytic_part(x)
        np.testing.assert_allclose(np.abs(z.samples), 0.8, atol=1e-10)

    def test_analytic_part_is_idempotent(self):
        """One-siding the real part of an analytic signal gives it back."""
        x = synth_mixture([Component(1.0, 64.0), Component(0.5, 200.0, 0.7)], N, FS)
        z = analytic_part(x)
        again = analytic_part(Signal(z.samples.real, FS))
        np.testing.assert_allclose(again.samples, z.samples, atol=1e-10)

    def test_analytic_part_energy(self):
        """||z||^2 = 2 ||x||^2 - DC energy - Nyquist energy."""
        k = np.arange(N)
        samples = 0.7 + synth_sinusoid(Component(1.2, 300.0, 0.4), N, FS).samples + 0.3 * (-1.0) ** k
        x = Signal(samples, FS)
        spectrum = np.fft.fft(samples)
        dc = abs(spectrum[0]) ** 2 / N
        nyquist = abs(spectrum[N // 2]) ** 2 / N
        self.assertAlmostEqual(dc, 0.49 * N, places=6)
        self.assertAlmostEqual(nyquist, 0.09 * N, places=6)
        expected = 2 * x.energy() - dc - nyquist
        self.assertAlmostEqual(analytic_part(x).energy() / expected, 1.0, places=10)

    def test_analytic_part_of_constant(self):
        """A constant is pure DC and passes unchanged."""
        x = Signal(np.full(N, 1.5), FS)
        z = analytic_part(x)
        np.testing.assert_allclose(z.samples.real, 1.5, atol=1e-12)
        np.testing.assert_allclose(z.samples.imag, 0.0, atol=1e-12)

    def test_analytic_part_rejects_complex(self):
        """Complex input is not a valid argument."""
        z = analytic_part(synth_sinusoid(Component(1.0, 64.0), N, FS))
        with self.assertRaises(RangeError):
            analytic_part(z)

    def test_snap_to_grid(self):
        """Frequencies snap to multiples of fs/length."""
        step = FS / N
        self.assertEqual(step, 0.5)
        self.assertEqual(snap_to_grid(100.2, N, FS), 100.0)
        self.assertEqual(snap_to_grid(100.3, N, FS), 100.5)
        self.assertTrue(is_on_grid(100.5, N, FS))
        self.assertFalse(is_on_grid(100.2, N, FS))

    def test_grid_frequencies(self):
        """FFT grid in numpy order with the expected step."""
        grid = grid_frequencies(N, FS)
        self.assertEqual(len(grid), N)
        self.assertEqual(grid[0], 0.0)
        self.assertEqual(grid[1], FS / N)
        self.assertEqual(grid[N // 2], -FS / 2)

    def test_circular_shift(self):
        """Shifting wraps samples around the periodic grid."""
        x = Signal(np.arange(N, dtype=float), FS)
        shifted = circular_shift(x, 3)
        self.assertEqual(shifted.samples[3], 0.0)
        self.assertEqual(shifted.samples[0], float(N - 3))
        self.assertAlmostEqual(shifted.energy(), x.energy())

    def test_scaled(self):
        """Scaling multiplies energy by alpha squared."""
        x = synth_sinusoid(Component(1.0, 64.0), N, FS)
        self.assertAlmostEqual(x.scaled(3.0).energy(), 9.0 * x.energy())


if __name__ == "__main__":
    unittest.main()
