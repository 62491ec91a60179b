"""
Fixed experiment configurations: the masking heatmap over (amplitude ratio,
frequency gap), the energy-decay curves of N-term Fourier series, the
invariance suite for kappa, and the gammatone asymmetry check.
"""

# experiments.py

import logging
import math
from dataclasses import dataclass, field, replace
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

import config
from config import ConfigurationError, RangeError
from filterbank import WaveletProfile, build_filterbank
from masking import TwoToneSpec, analyze_masking
from scattering import ScatteringConfig, map_ordered, scattering_energies, scattering_forward
from signals import Component, grid_frequencies, is_on_grid, snap_to_grid, synth_fourier_series

# Thresholds for the invariance families
PHASE_TOLERANCE = 0.01
TRANSPOSITION_TOLERANCE = 0.05
INTENSITY_TOLERANCE = 0.01
EXPONENT_TOLERANCE = 1e-6
ABSOLUTE_FLOOR = 1e-6


def default_amp_ratios(cells: int = config.HEATMAP_CELLS) -> np.ndarray:
    return np.geomspace(1e-4, 1.0, cells)


def default_freq_gaps(cells: int = config.HEATMAP_CELLS) -> np.ndarray:
    return 2.0 ** np.linspace(-10, -0.25, cells)


def relative_deviation(value: float, reference: float) -> float:
    """|value - reference| / |reference|, compared absolutely when both are ~0"""
    if abs(reference) < ABSOLUTE_FLOOR and abs(value) < ABSOLUTE_FLOOR:
        return abs(value - reference)
    if reference == 0:
        return math.inf
    return abs(value - reference) / abs(reference)


@dataclass
class HeatmapGrid:
    amp_ratios: np.ndarray
    freq_gaps: np.ndarray
    values: np.ndarray             # kappa_mean, shape (len(amp_ratios), len(freq_gaps))
    dominant_lambda2: np.ndarray   # Hz, NaN when no second-order energy
    snapped_f2: np.ndarray         # per gap
    degenerate: np.ndarray         # per gap, snapped f2 == f1
    config: dict = field(default_factory=dict)

    def rows(self) -> List[dict]:
        rows = []
        for i, ratio in enumerate(self.amp_ratios):
            for j, gap in enumerate(self.freq_gaps):
                rows.append({
                    'amp_ratio': float(ratio),
                    'freq_gap': float(gap),
                    'kappa': float(self.values[i, j]),
                    'dominant_lambda2': float(self.dominant_lambda2[i, j]),
                    'snapped_f2': float(self.snapped_f2[j]),
                })
        return rows


@dataclass
class DecayCurves:
    component_counts: List[int]
    depths: List[int]
    energy: np.ndarray          # captured per depth, relative to the input power
    residual: np.ndarray        # energy not yet captured after each depth
    layer_energies: np.ndarray  # raw layer_energy values, depths 1..M+1
    config: dict = field(default_factory=dict)

    def rows(self) -> List[dict]:
        return [{'N': int(N), 'depth': int(depth),
                 'captured': float(self.energy[i, m]), 'residual': float(self.residual[i, m])}
                for i, N in enumerate(self.component_counts)
                for m, depth in enumerate(self.depths)]


@dataclass
class InvarianceReport:
    deviations: Dict[str, float]
    passed: Dict[str, bool]
    power_exponent: Optional[float] = None
    config: dict = field(default_factory=dict)


@dataclass
class AsymmetryReport:
    gaps: List[float]
    kappa_below: List[float]
    kappa_above: List[float]
    config: dict = field(default_factory=dict)

    @property
    def index(self) -> List[float]:
        """|kappa_below - kappa_above| / (kappa_below + kappa_above) per gap"""
        return [abs(b - a) / (b + a) if b + a > 0 else 0.0
                for b, a in zip(self.kappa_below, self.kappa_above)]


def run_heatmap(amp_ratios: Optional[Sequence[float]] = None, freq_gaps: Optional[Sequence[float]] = None,
                f1: float = config.HEATMAP_F1, T: float = config.POOLING_T, Q: int = config.HEATMAP_Q,
                J: int = config.HEATMAP_OCTAVES, order: int = config.GAMMATONE_ORDER,
                nonlinearity: str = 'modulus', sample_rate: float = config.SAMPLE_RATE,
                length: int = config.SIGNAL_LENGTH, max_workers: int = config.MAX_WORKERS) -> HeatmapGrid:
    """kappa around f1 for a two-tone signal with f2 = f1 (1 - gap) below f1"""
    amp_ratios = np.asarray(default_amp_ratios() if amp_ratios is None else amp_ratios, dtype=float)
    freq_gaps = np.asarray(default_freq_gaps() if freq_gaps is None else freq_gaps, dtype=float)
    if not is_on_grid(f1, length, sample_rate):
        raise RangeError(f"f1={f1} Hz is not on the FFT grid ({sample_rate / length} Hz step)")
    if np.any(amp_ratios < 0) or np.any(freq_gaps <= 0) or np.any(freq_gaps >= 1):
        raise ConfigurationError("Amplitude ratios must be >= 0 and gaps inside (0, 1)")

    profile = WaveletProfile.gammatone(order)
    fb = build_filterbank(profile, Q, J, f1, T, grid_frequencies(length, sample_rate))
    cfg = ScatteringConfig(profile, Q, J, f1, T, 2, nonlinearity, lambda1=f1, max_workers=1)

    snapped_f2 = np.array([snap_to_grid(f1 * (1 - gap), length, sample_rate) for gap in freq_gaps])
    degenerate = snapped_f2 == f1
    for gap, f2 in zip(freq_gaps, snapped_f2):
        if f2 == f1:
            logging.warning(f"Gap {gap:.4g} snaps f2 onto f1; cell falls back to the single-tone kappa")
        elif abs(f2 - f1 * (1 - gap)) > 0:
            logging.debug(f"Gap {gap:.4g}: f2 snapped to {f2} Hz")

    def run_cell(cell: Tuple[int, int]) -> Tuple[float, float]:
        i, j = cell
        a2 = 0.0 if degenerate[j] else float(amp_ratios[i])
        spec = TwoToneSpec(Component(1.0, f1), Component(a2, float(snapped_f2[j])), sample_rate, length)
        report = analyze_masking(spec, cfg, 'f1', fb)
        dominant = report.dominant_lambda2()
        return report.kappa_mean, (math.nan if dominant is None else dominant)

    cells = list(product(range(len(amp_ratios)), range(len(freq_gaps))))
    logging.info(f"Running heatmap: {len(cells)} cells, {len(fb)} filters, {max_workers} workers")
    results = map_ordered(run_cell, cells, max_workers)

    values = np.zeros((len(amp_ratios), len(freq_gaps)))
    dominant_lambda2 = np.zeros_like(values)
    for (i, j), (kappa_mean, dominant) in zip(cells, results):
        values[i, j] = kappa_mean
        dominant_lambda2[i, j] = dominant

    grid_config = {
        'experiment': 'heatmap',
        'f1': f1, 'T': T, 'Q': Q, 'J': J,
        'profile': profile.describe(),
        'nonlinearity': nonlinearity,
        'sample_rate': sample_rate, 'length': length,
        'epsilon_relative': cfg.epsilon_relative,
        'selection': 'f1',
        'phases': 0.0,
        'degenerate_gaps': [float(g) for g, d in zip(freq_gaps, degenerate) if d],
    }
    return HeatmapGrid(amp_ratios, freq_gaps, values, dominant_lambda2, snapped_f2, degenerate, grid_config)


def run_decay(Ns: Sequence[int], M: int, f1: float = config.DECAY_F1, T: float = config.DECAY_T,
              Q: int = config.DECAY_Q, J: int = config.DECAY_OCTAVES, a1: float = 1.0,
              sample_rate: float = config.SAMPLE_RATE, length: int = config.SIGNAL_LENGTH,
              max_workers: int = config.MAX_WORKERS) -> DecayCurves:
    """
    Per-depth energy of N-term Fourier series a1 * sum cos(2 pi n f1 t) through
    a Shannon bank whose lowest band starts at f1, in modulus mode.

    Each analytic filter keeps only the positive half of a real spectrum, so
    depth m carries 2^m * layer_energy(U_m). Dividing by the input mean power
    gives an amplitude-free fraction; residual after depth m is that fraction
    at depth m + 1.
    """
    if M < 1:
        raise ConfigurationError(f"Depth must be >= 1, got {M}")
    if not a1 > 0:
        raise RangeError(f"Harmonic amplitude must be positive, got a1={a1}")
    f_max = f1 * 2.0 ** (J - 1)
    for N in Ns:
        if N < 1:
            raise ConfigurationError(f"Component count must be >= 1, got N={N}")
        if N * f1 >= 2 * f_max:
            raise ConfigurationError(
                f"N={N}: harmonic {N * f1} Hz escapes the {J}-octave band [{f1}, {2 * f_max}) Hz")

    profile = WaveletProfile.shannon()
    fb = build_filterbank(profile, Q, J, f_max, T, grid_frequencies(length, sample_rate))
    # one extra depth measures what is left after depth M
    cfg = ScatteringConfig(profile, Q, J, f_max, T, M + 1, 'modulus', max_workers=1)

    def run_count(N: int) -> Tuple[List[float], float]:
        x = synth_fourier_series(N, f1, length, sample_rate, a1)
        return scattering_energies(scattering_forward(x, cfg, fb)), float(np.mean(x.samples ** 2))

    logging.info(f"Running decay: N={list(Ns)}, depth {M}, f1={f1} Hz, a1={a1}")
    results = map_ordered(run_count, list(Ns), max_workers)
    energies = np.array([row for row, _ in results])
    input_power = np.array([power for _, power in results])

    # propagated[i, m] is the fraction of input power entering depth m + 1
    propagated = energies * 2.0 ** np.arange(1, M + 2) / input_power[:, None]
    captured = np.zeros((len(Ns), M))
    residual = np.zeros((len(Ns), M))
    for i in range(len(Ns)):
        previous = 1.0
        for m in range(M):
            residual[i, m] = propagated[i, m + 1]
            captured[i, m] = previous - residual[i, m]
            previous = residual[i, m]

    decay_config = {
        'experiment': 'decay',
        'f1': f1, 'a1': a1, 'f_max': f_max, 'T': T, 'Q': Q, 'J': J,
        'profile': profile.describe(),
        'nonlinearity': 'modulus',
        'sample_rate': sample_rate, 'length': length,
        'reference': 'input mean power',
    }
    return DecayCurves([int(N) for N in Ns], list(range(1, M + 1)), captured, residual, energies, decay_config)


def run_invariance_suite(spec: TwoToneSpec, Ts: Sequence[float], gammas: Sequence[float],
                         thetas: Sequence[float], k_values: Optional[Sequence[int]] = None,
                         Q: int = config.HEATMAP_Q, J_below: int = 5, order: int = config.GAMMATONE_ORDER,
                         nonlinearity: str = 'modulus', max_workers: int = config.MAX_WORKERS) -> InvarianceReport:
    """
    Max relative deviation of kappa_mean (lambda1 nearest f1) under phase
    shifts, transposition by 2^(k/Q) and common amplitude scaling.
    """
    k_values = [1, Q, 2 * Q] if k_values is None else list(k_values)
    octaves_above = max(0, math.ceil(max(k_values, default=0) / Q))
    f1 = spec.c1.frequency
    f_max = f1 * 2.0 ** octaves_above
    grid = grid_frequencies(spec.length, spec.sample_rate)
    profile = WaveletProfile.gammatone(order)

    def kappa_for(run_spec: TwoToneSpec, T: float, mode: str = nonlinearity) -> float:
        fb = banks[T]
        cfg = ScatteringConfig(profile, Q, octaves_above + J_below, f_max, T, 2, mode, max_workers=1)
        return analyze_masking(run_spec, cfg, 'f1', fb).kappa_mean

    banks = {T: build_filterbank(profile, Q, octaves_above + J_below, f_max, T, grid) for T in Ts}
    T_ref = max(Ts)
    base = kappa_for(spec, T_ref)

    # phase family, for every T; kappa stops following the beat phase once T >= 10 / delta_f
    phase_min_T = 10.0 / spec.delta_f if spec.delta_f > 0 else None
    short = [T for T in Ts if phase_min_T is not None and T < phase_min_T]
    if short:
        logging.warning(f"Phase family: T={short} below 10/delta_f = {phase_min_T:.4g} s")
    phase_jobs = [(T, th1, th2) for T in Ts for th1 in thetas for th2 in thetas]
    references = {T: (base if T == T_ref else kappa_for(spec, T)) for T in Ts}

    def phase_deviation(job: Tuple[float, float, float]) -> float:
        T, th1, th2 = job
        shifted = replace(spec, c1=replace(spec.c1, phase=spec.c1.phase + th1),
                          c2=replace(spec.c2, phase=spec.c2.phase + th2))
        return relative_deviation(kappa_for(shifted, T), references[T])

    # transposition family, frequencies snapped to the grid
    transposed = []
    for k in k_values:
        factor = 2.0 ** (k / Q)
        f1_k = snap_to_grid(f1 * factor, spec.length, spec.sample_rate)
        f2_k = snap_to_grid(spec.c2.frequency * factor, spec.length, spec.sample_rate)
        snapped = f1_k != f1 * factor or f2_k != spec.c2.frequency * factor
        if snapped:
            logging.info(f"Transposition k={k}: snapped to f1={f1_k} Hz, f2={f2_k} Hz")
        transposed.append({'k': k, 'f1': f1_k, 'f2': f2_k, 'snapped': snapped})
    targets = {entry['k']: (entry['f1'], entry['f2']) for entry in transposed}

    def transposition_deviation(k: int) -> float:
        f1_k, f2_k = targets[k]
        moved = replace(spec, c1=replace(spec.c1, frequency=f1_k), c2=replace(spec.c2, frequency=f2_k))
        return relative_deviation(kappa_for(moved, T_ref), base)

    # intensity family
    def intensity_kappas(gamma: float) -> Tuple[float, float]:
        alpha = 2.0 ** gamma
        scaled = replace(spec, c1=replace(spec.c1, amplitude=spec.c1.amplitude * alpha),
                         c2=replace(spec.c2, amplitude=spec.c2.amplitude * alpha))
        return kappa_for(scaled, T_ref, 'modulus'), kappa_for(scaled, T_ref, 'power')

    logging.info(f"Running invariance suite: {len(phase_jobs)} phase, {len(k_values)} transposition, "
                 f"{len(gammas)} intensity runs")
    phase = map_ordered(phase_deviation, phase_jobs, max_workers)
    transposition = map_ordered(transposition_deviation, k_values, max_workers)
    intensity = map_ordered(intensity_kappas, list(gammas), max_workers)

    deviations = {
        'phase': max(phase, default=0.0),
        'transposition': max(transposition, default=0.0),
    }
    passed = {
        'phase': deviations['phase'] < PHASE_TOLERANCE,
        'transposition': deviations['transposition'] < TRANSPOSITION_TOLERANCE,
    }

    exponent = None
    if intensity:
        base_modulus = kappa_for(spec, T_ref, 'modulus')
        deviations['intensity_modulus'] = max(relative_deviation(m, base_modulus) for m, _ in intensity)
        passed['intensity_modulus'] = deviations['intensity_modulus'] < INTENSITY_TOLERANCE
        power_values = np.array([p for _, p in intensity])
        log_alpha = np.log(2.0) * np.asarray(gammas, dtype=float)
        if len(gammas) >= 2 and np.all(power_values > 0):
            exponent = float(np.polyfit(log_alpha, np.log(power_values), 1)[0])
            deviations['intensity_power_exponent'] = abs(exponent - 2.0)
            passed['intensity_power_exponent'] = deviations['intensity_power_exponent'] < EXPONENT_TOLERANCE

    suite_config = {
        'signal': spec.describe(), 'Ts': list(Ts), 'gammas': list(gammas), 'thetas': list(thetas),
        'k_values': k_values, 'Q': Q, 'f_max': f_max, 'nonlinearity': nonlinearity,
        'transposed': transposed, 'phase_min_T': phase_min_T,
    }
    return InvarianceReport(deviations, passed, exponent, suite_config)


def run_asymmetry(f1: float, gaps: Sequence[float], T: float = config.POOLING_T, Q: int = config.HEATMAP_Q,
                  J: int = config.HEATMAP_OCTAVES, order: int = config.GAMMATONE_ORDER,
                  nonlinearity: str = 'power', sample_rate: float = config.SAMPLE_RATE,
                  length: int = config.SIGNAL_LENGTH, max_workers: int = config.MAX_WORKERS) -> AsymmetryReport:
    """
    Equal-amplitude tones with f2 mirrored below and above f1, in a gammatone
    bank spanning J octaves below f1; kappa summed over all paths.
    """
    profile = WaveletProfile.gammatone(order)
    fb = build_filterbank(profile, Q, J, f1, T, grid_frequencies(length, sample_rate))
    cfg = ScatteringConfig(profile, Q, J, f1, T, 2, nonlinearity, max_workers=1)

    jobs = [(gap, side) for gap in gaps for side in (-1, 1)]

    def run_side(job: Tuple[float, int]) -> float:
        gap, side = job
        f2 = snap_to_grid(f1 * (1 + side * gap), length, sample_rate)
        spec = TwoToneSpec(Component(1.0, f1), Component(1.0, f2), sample_rate, length)
        return analyze_masking(spec, cfg, 'all', fb).kappa_mean

    kappas = map_ordered(run_side, jobs, max_workers)
    below = kappas[0::2]
    above = kappas[1::2]
    asymmetry_config = {'f1': f1, 'T': T, 'Q': Q, 'J': J, 'profile': profile.describe(),
                        'nonlinearity': nonlinearity, 'selection': 'all'}
    return AsymmetryReport(list(gaps), below, above, asymmetry_config)
