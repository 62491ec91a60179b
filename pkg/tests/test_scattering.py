# test_scattering.py

import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import unittest
from unittest import mock

import numpy as np

from config import ConfigurationError, ResourceError
from filterbank import WaveletProfile, build_filterbank, littlewood_paley
from scattering import (ScatteringConfig, ScatteringLayer, layer_energy, pool, scalogram, scatter_layer,
                        scattering_energies, scattering_forward)
from signals import (Component, Signal, analytic_part, circular_shift, grid_frequencies, synth_mixture,
                     synth_sinusoid)

FS = 2048.0
N = 2 ** 13
GRID = grid_frequencies(N, FS)


def gammatone_config(**overrides) -> ScatteringConfig:
    params = dict(profile=WaveletProfile.gammatone(), Q=4, J=5, f_max=256.0, T=0.5, max_workers=1)
    params.update(overrides)
    return ScatteringConfig(**params)


class TestScalogram(unittest.TestCase):
    """Unit tests for the first layer."""

    @classmethod
    def setUpClass(cls):
        cls.fb = build_filterbank(WaveletProfile.gammatone(), 4, 5, 256.0, 0.5, GRID)

    def test_centered_tone_is_constant(self):
        """A tone on a filter center gives a^2/4 in power mode."""
        x = synth_sinusoid(Component(0.6, 256.0, 0.4), N, FS)
        layer = scalogram(x, self.fb, 'power', max_workers=1)
        np.testing.assert_allclose(layer.entries[(256.0,)], 0.09, rtol=1e-10)

    def test_zero_input(self):
        """Silence scatters to silence."""
        layer = scalogram(Signal(np.zeros(N), FS), self.fb)
        for series in layer.entries.values():
            self.assertTrue(np.all(series == 0))

    def test_homogeneity(self):
        """U1(alpha x) is alpha^2 U1(x) in power mode and alpha U1(x) in modulus mode."""
        x = synth_mixture([Component(1.0, 256.0), Component(0.5, 224.0, 1.0)], N, FS)
        for nonlinearity, exponent in (('power', 2), ('modulus', 1)):
            base = scalogram(x, self.fb, nonlinearity, max_workers=1)
            scaled = scalogram(x.scaled(3.0), self.fb, nonlinearity, max_workers=1)
            peak = max(float(np.max(series)) for series in base.entries.values())
            for path, series in base.entries.items():
                np.testing.assert_allclose(scaled.entries[path], 3.0 ** exponent * series,
                                           rtol=1e-9, atol=1e-12 * peak)

    def test_circular_shift_equivariance(self):
        """Shifting the input by s samples shifts every U1 by s samples."""
        x = synth_mixture([Component(1.0, 200.0), Component(0.7, 150.0, 0.3)], N, FS)
        base = scalogram(x, self.fb, max_workers=1)
        shifted = scalogram(circular_shift(x, 37), self.fb, max_workers=1)
        for path, series in base.entries.items():
            np.testing.assert_allclose(shifted.entries[path], np.roll(series, 37), atol=1e-10)

    def test_plancherel_bound(self):
        """Depth-1 energy is bounded by the Littlewood-Paley maximum."""
        x = synth_mixture([Component(1.0, 200.0), Component(0.7, 150.0, 0.3)], N, FS)
        layer = scalogram(x, self.fb, 'power', max_workers=1)
        total = sum(float(np.sum(u)) for u in layer.entries.values())
        _, high = littlewood_paley(self.fb)
        self.assertLessEqual(total, high * analytic_part(x).energy())

    def test_grid_mismatch(self):
        """Signal and bank must share a grid."""
        x = synth_sinusoid(Component(1.0, 64.0), 2 ** 12, FS)
        with self.assertRaises(ConfigurationError):
            scalogram(x, self.fb)


class TestCascade(unittest.TestCase):
    """Unit tests for deeper layers, pooling and energies."""

    @classmethod
    def setUpClass(cls):
        cls.fb = build_filterbank(WaveletProfile.gammatone(), 4, 5, 256.0, 0.5, GRID)

    def test_constant_parent_has_silent_children(self):
        """Zero-mean wavelets remove constants."""
        layer = ScatteringLayer(1, 'power', {(256.0,): np.full(N, 2.0)})
        child = scatter_layer(layer, self.fb, 'power', max_workers=1)
        self.assertEqual(len(child.entries), len(self.fb) - 1)
        for path, series in child.entries.items():
            self.assertEqual(path[0], 256.0)
            self.assertLess(np.max(series), 1e-20)

    def test_single_tone_second_order_vanishes(self):
        """A lone tone leaves nothing for depth 2."""
        x = synth_sinusoid(Component(1.0, 181.0), N, FS)
        layers = scattering_forward(x, gammatone_config())
        self.assertGreater(len(layers[1].entries), 0)
        for series in layers[1].entries.values():
            self.assertLess(np.max(series), 1e-20)

    def test_two_tone_peak_at_frequency_difference(self):
        """Depth-2 energy under lambda1 = f1 peaks at lambda2 = |f2 - f1|."""
        x = synth_mixture([Component(1.0, 256.0), Component(1.0, 224.0)], N, FS)
        layers = scattering_forward(x, gammatone_config())
        means = {path: float(np.mean(u)) for path, u in layers[1].entries.items() if path[0] == 256.0}
        ranked = sorted(means, key=means.get, reverse=True)
        self.assertEqual(ranked[0], (256.0, 32.0))
        self.assertGreater(means[ranked[0]], means[ranked[1]])

    def test_layers_are_valid(self):
        """Paths decrease strictly and every value is nonnegative."""
        x = synth_mixture([Component(1.0, 200.0), Component(0.5, 180.0)], N, FS)
        layers = scattering_forward(x, gammatone_config(J=3, max_depth=3, nonlinearity='modulus'))
        self.assertEqual([layer.depth for layer in layers], [1, 2, 3])
        for layer in layers:
            layer.validate()
            self.assertEqual(set(layer.pooled), set(layer.entries))

    def test_forward_validates_every_layer(self):
        """Each layer is checked for decreasing paths and nonnegative values."""
        x = synth_mixture([Component(1.0, 200.0), Component(0.5, 180.0)], N, FS)
        with mock.patch.object(ScatteringLayer, 'validate', autospec=True) as validate:
            layers = scattering_forward(x, gammatone_config(J=3, max_depth=3))
        self.assertEqual(validate.call_count, 3)
        for call, layer in zip(validate.call_args_list, layers):
            self.assertIs(call.args[0], layer)

    def test_depth_one_is_pooled_scalogram(self):
        """M=1 is scalogram followed by pooling."""
        x = synth_mixture([Component(1.0, 200.0), Component(0.5, 180.0)], N, FS)
        layers = scattering_forward(x, gammatone_config(max_depth=1))
        self.assertEqual(len(layers), 1)
        expected = pool(scalogram(x, self.fb, 'power', max_workers=1), self.fb.lowpass_hat)
        for path, series in expected.pooled.items():
            np.testing.assert_array_equal(layers[0].pooled[path], series)

    def test_second_layer_respects_modulation_floor(self):
        """No depth-2 filter sits below Q/T."""
        x = synth_mixture([Component(1.0, 200.0), Component(0.5, 180.0)], N, FS)
        layers = scattering_forward(x, gammatone_config(T=0.25))
        self.assertTrue(all(path[1] >= 16.0 for path in layers[1].entries))

    def test_lambda1_restriction(self):
        """Only the branch nearest lambda1 is expanded at depth 2."""
        x = synth_mixture([Component(1.0, 256.0), Component(1.0, 224.0)], N, FS)
        layers = scattering_forward(x, gammatone_config(lambda1=250.0))
        self.assertEqual(len(layers[0].entries), len(self.fb))
        self.assertTrue(all(path[0] == 256.0 for path in layers[1].entries))

    def test_pool_constant_and_fast_oscillation(self):
        """Constants pass unchanged; oscillations well above 1/T average out."""
        t = np.arange(N) / FS
        layer = ScatteringLayer(1, 'power', {(256.0,): np.full(N, 1.5),
                                             (128.0,): 2.0 + np.cos(2 * np.pi * 50.0 * t)})
        pool(layer, self.fb.lowpass_hat)
        np.testing.assert_allclose(layer.pooled[(256.0,)], 1.5, rtol=1e-12)
        np.testing.assert_allclose(layer.pooled[(128.0,)], 2.0, atol=1e-10)

    def test_delay_invariance(self):
        """A delay of T/100 barely moves the pooled coefficients."""
        x = synth_mixture([Component(1.0, 256.0), Component(0.8, 224.0, 0.5)], N, FS)
        cfg = gammatone_config(lambda1=256.0)
        base = scattering_forward(x, cfg)
        delayed = scattering_forward(circular_shift(x, int(round(0.005 * FS))), cfg)
        for a, b in zip(base, delayed):
            ref = np.concatenate([a.pooled[p] for p in a.pooled])
            moved = np.concatenate([b.pooled[p] for p in a.pooled])
            self.assertLess(np.linalg.norm(moved - ref) / np.linalg.norm(ref), 0.01)

    def test_power_homogeneity_across_depths(self):
        """In power mode U_m scales by alpha^(2^m)."""
        x = synth_mixture([Component(1.0, 256.0), Component(1.0, 224.0)], N, FS)
        cfg = gammatone_config(lambda1=256.0)
        base = scattering_forward(x, cfg)
        scaled = scattering_forward(x.scaled(2.0), cfg)
        u2 = base[1].entries[(256.0, 32.0)]
        np.testing.assert_allclose(scaled[1].entries[(256.0, 32.0)], 16.0 * u2, rtol=1e-8)
        np.testing.assert_allclose(scaled[0].entries[(256.0,)], 4.0 * base[0].entries[(256.0,)], rtol=1e-10)

    def test_thread_count_does_not_change_output(self):
        """Results are identical with one or four workers."""
        x = synth_mixture([Component(1.0, 200.0), Component(0.5, 180.0)], N, FS)
        single = scattering_forward(x, gammatone_config(max_workers=1))
        pooled = scattering_forward(x, gammatone_config(max_workers=4))
        for a, b in zip(single, pooled):
            self.assertEqual(a.paths(), b.paths())
            for path in a.paths():
                np.testing.assert_array_equal(a.pooled[path], b.pooled[path])

    def test_path_cap(self):
        """Exceeding the path cap names the offending depth."""
        x = synth_sinusoid(Component(1.0, 200.0), N, FS)
        with self.assertRaises(ResourceError) as ctx:
            scattering_forward(x, gammatone_config(max_paths=25))
        self.assertIn("Depth 2", str(ctx.exception))

    def test_layer_energy(self):
        """Zero layers carry no energy; power mode sums mean U."""
        self.assertEqual(layer_energy(ScatteringLayer(1, 'power', {(1.0,): np.zeros(8)})), 0.0)
        self.assertEqual(layer_energy(ScatteringLayer(1, 'power', {(1.0,): np.full(8, 2.0)})), 2.0)
        self.assertEqual(layer_energy(ScatteringLayer(1, 'modulus', {(1.0,): np.full(8, 2.0)})), 4.0)

    def test_single_tone_energy_stays_at_depth_one(self):
        """Shannon bank, single tone: depth-2 energy below 1e-6 of depth 1."""
        x = synth_sinusoid(Component(1.0, 48.0), 2 ** 12, FS)
        cfg = ScatteringConfig(WaveletProfile.shannon(), 1, 7, 512.0, 0.5, max_depth=2, max_workers=1)
        energies = scattering_energies(scattering_forward(x, cfg))
        self.assertGreater(energies[0], 0)
        self.assertLess(energies[1], 1e-6 * energies[0])

    def test_config_validation(self):
        """Depth, nonlinearity and epsilon are checked on construction."""
        with self.assertRaises(ConfigurationError):
            gammatone_config(max_depth=0)
        with self.assertRaises(ConfigurationError):
            gammatone_config(nonlinearity='cube')
        with self.assertRaises(ConfigurationError):
            gammatone_config(epsilon_relative=0.0)


if __name__ == "__main__":
    unittest.main()
