"""
Deterministic synthesis of test signals: sinusoids, mixtures, Fourier series,
plus the analytic-part transform.
"""

# signals.py

from dataclasses import dataclass
from typing import List, Sequence

import numpy as np
from scipy.signal import hilbert

from config import RangeError

# shortest grid with a DC bin, positive bins and a Nyquist bin
MIN_LENGTH = 4


def is_power_of_two(n: int) -> bool:
    """True for 1, 2, 4, 8, ..."""
    return isinstance(n, (int, np.integer)) and n > 0 and (n & (n - 1)) == 0


def validate_length(length: int):
    """Helper function to validate a sample count"""
    if not is_power_of_two(length):
        raise RangeError(f"Signal length must be a power of two, got {length}")
    if length < MIN_LENGTH:
        raise RangeError(f"Signal length must be at least {MIN_LENGTH} samples, got {length}")


def validate_sample_rate(sample_rate: float):
    """Helper function to validate a sample rate"""
    if not np.isfinite(sample_rate) or sample_rate <= 0:
        raise RangeError(f"Sample rate must be positive, got {sample_rate}")


@dataclass(frozen=True)
class Signal:
    """Uniformly sampled time series, real or complex (analytic)."""
    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        validate_sample_rate(self.sample_rate)
        validate_length(len(self.samples))
        if not np.all(np.isfinite(self.samples)):
            raise RangeError("Signal samples must all be finite")

    def __len__(self):
        return len(self.samples)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.samples)

    def energy(self) -> float:
        """Sum of squared magnitudes"""
        return float(np.sum(np.abs(self.samples) ** 2))

    def scaled(self, alpha: float) -> 'Signal':
        return Signal(self.samples * alpha, self.sample_rate)


@dataclass(frozen=True)
class Component:
    """One cosine term a*cos(2*pi*f*t + phase)."""
    amplitude: float
    frequency: float
    phase: float = 0.0

    def validate(self, sample_rate: float):
        if self.amplitude < 0:
            raise RangeError(f"Amplitude must be nonnegative, got {self.amplitude}")
        nyquist = sample_rate / 2
        if self.frequency < 0 or self.frequency >= nyquist:
            raise RangeError(
                f"Frequency {self.frequency} Hz outside [0, {nyquist}) (Nyquist at {sample_rate} Hz)")


def grid_frequencies(length: int, sample_rate: float) -> np.ndarray:
    """FFT bin frequencies in Hz, in numpy's fftfreq order."""
    validate_length(length)
    validate_sample_rate(sample_rate)
    return np.fft.fftfreq(length, d=1.0 / sample_rate)


def grid_step(length: int, sample_rate: float) -> float:
    return sample_rate / length


def snap_to_grid(frequency: float, length: int, sample_rate: float) -> float:
    """Nearest FFT-grid frequency k*sample_rate/length"""
    step = grid_step(length, sample_rate)
    return round(frequency / step) * step


def is_on_grid(frequency: float, length: int, sample_rate: float) -> bool:
    return snap_to_grid(frequency, length, sample_rate) == frequency


def synth_sinusoid(c: Component, length: int, sample_rate: float) -> Signal:
    """Sample a*cos(2*pi*f*k/sample_rate + phase) for k = 0..length-1"""
    validate_length(length)
    validate_sample_rate(sample_rate)
    c.validate(sample_rate)

    k = np.arange(length, dtype=float)
    samples = c.amplitude * np.cos(2 * np.pi * c.frequency * k / sample_rate + c.phase)
    return Signal(samples, float(sample_rate))


def synth_mixture(cs: Sequence[Component], length: int, sample_rate: float) -> Signal:
    """Pointwise sum of sinusoids; an empty list gives silence"""
    validate_length(length)
    validate_sample_rate(sample_rate)
    for c in cs:
        c.validate(sample_rate)

    samples = np.zeros(length)
    for c in cs:
        samples = samples + synth_sinusoid(c, length, sample_rate).samples
    return Signal(samples, float(sample_rate))


def fourier_components(N: int, f1: float, amplitude: float = 1.0) -> List[Component]:
    """Equal-amplitude, zero-phase harmonics n*f1 for n = 1..N"""
    return [Component(amplitude, n * f1, 0.0) for n in range(1, N + 1)]


def synth_fourier_series(N: int, f1: float, length: int, sample_rate: float, amplitude: float = 1.0) -> Signal:
    """amplitude * sum_{n=1..N} cos(2*pi*n*f1*t)"""
    if N < 1:
        raise RangeError(f"Fourier series needs at least one term, got N={N}")
    if N * f1 >= sample_rate / 2:
        raise RangeError(f"Harmonic {N}*{f1} Hz is at or above Nyquist ({sample_rate / 2} Hz)")
    return synth_mixture(fourier_components(N, f1, amplitude), length, sample_rate)


def analytic_part(x: Signal) -> Signal:
    """
    Spectral one-siding: negative bins zeroed, strictly positive bins doubled,
    DC and Nyquist kept. The real part reproduces the input.
    """
    if x.is_complex:
        raise RangeError("analytic_part expects a real signal")
    return Signal(hilbert(x.samples), x.sample_rate)


def circular_shift(x: Signal, shift: int) -> Signal:
    """Delay by `shift` samples on the periodic grid"""
    return Signal(np.roll(x.samples, shift), x.sample_rate)
