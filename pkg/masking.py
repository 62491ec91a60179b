"""
Masking quantities for two-component signals: the closed-form heterodyne
scalogram, second-order coefficients renormalized by first-order ones, and the
masking coefficient kappa summed over scattering paths.
"""

# masking.py

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

import config
from config import ConfigurationError, RangeError
from filterbank import FilterBank, grid_index
from scattering import ScatteringConfig, ScatteringLayer, apply_nonlinearity, scattering_forward
from signals import Component, Signal, is_on_grid, synth_mixture, validate_length, validate_sample_rate

SELECTIONS = ('f1', 'all')

PathPair = Tuple[float, float]


@dataclass(frozen=True)
class TwoToneSpec:
    """x(t) = a1 cos(2 pi f1 t + phi1) + a2 cos(2 pi f2 t + phi2)"""
    c1: Component
    c2: Component
    sample_rate: float = config.SAMPLE_RATE
    length: int = config.SIGNAL_LENGTH

    def __post_init__(self):
        validate_length(self.length)
        validate_sample_rate(self.sample_rate)
        self.c1.validate(self.sample_rate)
        self.c2.validate(self.sample_rate)
        if self.c1.frequency == 0:
            raise RangeError("f1 must be nonzero")

    @property
    def delta_f(self) -> float:
        return abs(self.c2.frequency - self.c1.frequency)

    def synth(self) -> Signal:
        return synth_mixture([self.c1, self.c2], self.length, self.sample_rate)

    def swapped(self) -> 'TwoToneSpec':
        return replace(self, c1=self.c2, c2=self.c1)

    def describe(self) -> dict:
        return {
            'a1': self.c1.amplitude, 'f1': self.c1.frequency, 'phi1': self.c1.phase,
            'a2': self.c2.amplitude, 'f2': self.c2.frequency, 'phi2': self.c2.phase,
            'sample_rate': self.sample_rate, 'length': self.length,
        }


def central_half(length: int) -> slice:
    """Time indices kept for kappa averages"""
    return slice(length // 4, 3 * length // 4)


def heterodyne_oracle(spec: TwoToneSpec, fb: FilterBank, lam1: float,
                      nonlinearity: str = 'power') -> np.ndarray:
    """
    Closed form of |(x1 + x2) * psi_lam1|^p on the sample grid:
    |1/2 hat(f1) a1 e^{i(2 pi f1 t + phi1)} + 1/2 hat(f2) a2 e^{i(2 pi f2 t + phi2)}|^p
    """
    for c in (spec.c1, spec.c2):
        if not is_on_grid(c.frequency, spec.length, spec.sample_rate):
            raise RangeError(f"{c.frequency} Hz is not on the FFT grid")
    if fb.length != spec.length or not np.isclose(fb.sample_rate, spec.sample_rate):
        raise ConfigurationError("Filterbank grid does not match the two-tone grid")

    hat = fb.hat_of(lam1)
    t = np.arange(spec.length) / spec.sample_rate
    z = np.zeros(spec.length, dtype=complex)
    for c in (spec.c1, spec.c2):
        response = hat[grid_index(fb.grid, c.frequency)]
        z = z + 0.5 * response * c.amplitude * np.exp(1j * (2 * np.pi * c.frequency * t + c.phase))
    return apply_nonlinearity(z, nonlinearity)


def resolve_epsilon(s1: ScatteringLayer, epsilon_relative: float = config.EPSILON_RELATIVE) -> float:
    """epsilon_relative times the peak S1 over all bands"""
    peak = max((float(np.max(s)) for s in s1.pooled.values()), default=0.0)
    return epsilon_relative * peak if peak > 0 else epsilon_relative


def normalize_s2(s2: ScatteringLayer, s1: ScatteringLayer,
                 epsilon: Optional[float] = None) -> Dict[PathPair, np.ndarray]:
    """S~2(t, l1, l2) = S2(t, l1, l2) / (S1(t, l1) + epsilon)"""
    if s2.depth != 2 or s1.depth != 1:
        raise ConfigurationError(f"Expected depths (2, 1), got ({s2.depth}, {s1.depth})")
    if epsilon is None:
        epsilon = resolve_epsilon(s1)

    normalized = {}
    for (lam1, lam2), series in s2.pooled.items():
        normalized[(lam1, lam2)] = series / (s1.pooled[(lam1,)] + epsilon)
    return normalized


def nearest_first_order(keys: List[PathPair], frequency: float) -> float:
    lambda1s = sorted({lam1 for lam1, _ in keys}, reverse=True)
    if not lambda1s:
        raise ConfigurationError("No second-order coefficients to select from")
    return min(lambda1s, key=lambda lam: abs(np.log2(lam / frequency)))


def masking_coefficient(s2n: Dict[PathPair, np.ndarray],
                        f1: Optional[float] = None) -> Tuple[np.ndarray, float]:
    """
    kappa(t) = sum of S~2 over the selected paths: every path when f1 is None,
    otherwise the paths whose lambda1 is nearest to f1. Also returns the time
    average over the central half.
    """
    keys = list(s2n.keys())
    if f1 is not None and keys:
        lam1 = nearest_first_order(keys, f1)
        keys = [key for key in keys if key[0] == lam1]
    if not keys:
        raise ConfigurationError("Masking coefficient needs at least one selected path")

    kappa = np.zeros_like(s2n[keys[0]])
    for key in keys:
        kappa = kappa + s2n[key]
    kappa_mean = float(np.mean(kappa[central_half(len(kappa))]))
    return kappa, kappa_mean


@dataclass
class MaskingReport:
    s2_normalized: Dict[PathPair, np.ndarray]
    kappa: np.ndarray
    kappa_mean: float
    config: dict = field(default_factory=dict)

    def rows(self) -> List[dict]:
        """One row per (lambda1, lambda2) with the central-half mean of S~2"""
        middle = central_half(len(self.kappa))
        return [{'lambda1': lam1, 'lambda2': lam2, 's2n_mean': float(np.mean(series[middle]))}
                for (lam1, lam2), series in self.s2_normalized.items()]

    def dominant_lambda2(self, lam1: Optional[float] = None) -> Optional[float]:
        """lambda2 carrying the largest mean S~2 (restricted to lam1 when given)"""
        rows = [row for row in self.rows() if lam1 is None or row['lambda1'] == lam1]
        if not rows:
            return None
        best = max(rows, key=lambda row: row['s2n_mean'])
        return best['lambda2'] if best['s2n_mean'] > 0 else None


def analyze_masking(spec: TwoToneSpec, cfg: ScatteringConfig, selection: str = 'f1',
                    fb: Optional[FilterBank] = None) -> MaskingReport:
    """Scatter the two-tone signal to depth 2 and compute S~2 and kappa"""
    if selection not in SELECTIONS:
        raise ConfigurationError(f"Unknown selection '{selection}', expected one of {SELECTIONS}")

    f1 = spec.c1.frequency
    run_cfg = replace(cfg, max_depth=2, lambda1=f1 if selection == 'f1' else None)
    layers = scattering_forward(spec.synth(), run_cfg, fb)
    epsilon = resolve_epsilon(layers[0], cfg.epsilon_relative)
    s2n = normalize_s2(layers[1], layers[0], epsilon)
    kappa, kappa_mean = masking_coefficient(s2n, f1 if selection == 'f1' else None)
    logging.debug(f"kappa_mean={kappa_mean:.6g} for f1={f1} Hz, f2={spec.c2.frequency} Hz")

    report_config = {
        'signal': spec.describe(),
        'scattering': run_cfg.describe(),
        'selection': selection,
        'epsilon': epsilon,
    }
    return MaskingReport(s2n, kappa, kappa_mean, report_config)
