"""
Constant-Q analytic wavelet filterbanks (gammatone and Shannon profiles) and
the Gaussian lowpass used for pooling. Every response is sampled on the FFT grid
of the signals it will be applied to.
"""

# filterbank.py

import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

import config
from config import ConfigurationError, RangeError

PROFILE_KINDS = ('gammatone', 'shannon')


@dataclass(frozen=True)
class WaveletProfile:
    kind: str
    order: int = config.GAMMATONE_ORDER

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ConfigurationError(f"Unknown wavelet profile '{self.kind}', expected one of {PROFILE_KINDS}")
        if self.kind == 'gammatone' and (int(self.order) != self.order or self.order < 1):
            raise ConfigurationError(f"Gammatone order must be a positive integer, got {self.order}")

    @classmethod
    def gammatone(cls, order: int = config.GAMMATONE_ORDER) -> 'WaveletProfile':
        return cls('gammatone', order)

    @classmethod
    def shannon(cls) -> 'WaveletProfile':
        return cls('shannon', 1)

    def describe(self) -> dict:
        if self.kind == 'gammatone':
            return {'kind': self.kind, 'order': self.order}
        return {'kind': self.kind}


@dataclass(frozen=True)
class FilterBank:
    """Immutable bank of analytic band-pass responses plus one lowpass."""
    profile: WaveletProfile
    Q: int
    J: int
    f_max: float
    T: float
    lambdas: np.ndarray
    hats: np.ndarray
    lowpass_hat: np.ndarray
    grid: np.ndarray = field(repr=False)

    def __post_init__(self):
        for array in (self.lambdas, self.hats, self.lowpass_hat, self.grid):
            array.flags.writeable = False

    def __len__(self):
        return len(self.lambdas)

    @property
    def length(self) -> int:
        return len(self.grid)

    @property
    def sample_rate(self) -> float:
        return float(self.grid[1] * len(self.grid))

    def index_of(self, lam: float) -> int:
        """Position of the filter whose center frequency is exactly `lam`"""
        matches = np.flatnonzero(self.lambdas == lam)
        if len(matches) == 0:
            raise ConfigurationError(f"No filter centered at {lam} Hz in this bank")
        return int(matches[0])

    def hat_of(self, lam: float) -> np.ndarray:
        return self.hats[self.index_of(lam)]

    def metadata(self) -> dict:
        return {
            'profile': self.profile.describe(),
            'Q': self.Q,
            'J': self.J,
            'f_max': self.f_max,
            'T': self.T,
            'sample_rate': self.sample_rate,
            'length': self.length,
            'lambdas': [float(lam) for lam in self.lambdas],
        }


def nyquist_of(grid: np.ndarray) -> float:
    return float(np.max(np.abs(grid)))


def grid_index(grid: np.ndarray, frequency: float) -> int:
    """Bin holding `frequency` (negative frequencies wrap as in fftfreq order)"""
    step = grid[1]
    return int(round(frequency / step)) % len(grid)


def gammatone_quality(Q: float, order: int) -> float:
    """Effective Q putting the half-power points at lambda*(1 +- 1/(2Q))"""
    return 2 * Q * np.sqrt(2 ** (1.0 / order) - 1)


def gammatone_response(freqs: np.ndarray, lam: float, Q: float, order: int) -> np.ndarray:
    """
    Closed-form one-pole-to-the-n response [1 + i*Q_eff*(f/lam - 1)]^(-n),
    zero at non-positive frequencies. Peak magnitude 1 at f = lam.
    """
    freqs = np.asarray(freqs, dtype=float)
    q_eff = gammatone_quality(Q, order)
    response = np.zeros(freqs.shape, dtype=complex)
    positive = freqs > 0
    response[positive] = (1 + 1j * q_eff * (freqs[positive] / lam - 1)) ** (-order)
    return response


def design_gammatone_hat(Q: int, order: int, lam: float, grid: np.ndarray) -> np.ndarray:
    """Gammatone response on the grid, DC forced to 0, rescaled to unit peak"""
    nyquist = nyquist_of(grid)
    if not 0 < lam < nyquist:
        raise RangeError(f"Gammatone center {lam} Hz outside (0, {nyquist})")
    if order < 1:
        raise ConfigurationError(f"Gammatone order must be >= 1, got {order}")

    hat = gammatone_response(grid, lam, Q, order)
    hat[0] = 0
    peak = np.max(np.abs(hat))
    if peak > 0:
        hat = hat / peak
    return hat


def design_shannon_hat(lam: float, grid: np.ndarray) -> np.ndarray:
    """Indicator of the half-open octave band [lam, 2*lam)"""
    nyquist = nyquist_of(grid)
    if not 0 < lam <= nyquist / 2:
        raise RangeError(f"Shannon band [{lam}, {2 * lam}) Hz does not fit below Nyquist ({nyquist} Hz)")
    inside = (grid >= lam) & (grid < 2 * lam)
    return inside.astype(complex)


def design_lowpass(T: float, grid: np.ndarray) -> np.ndarray:
    """Gaussian of time standard deviation T: exp(-(2*pi*f*T)^2 / 2)"""
    if not np.isfinite(T) or T <= 0:
        raise RangeError(f"Pooling scale T must be positive, got {T}")
    period = 1.0 / grid[1]
    if T >= period:
        raise RangeError(f"Pooling scale T={T} s must be shorter than the signal period ({period} s)")
    return np.exp(-0.5 * (2 * np.pi * grid * T) ** 2)


def build_filterbank(profile: WaveletProfile, Q: int, J: int, f_max: float, T: float,
                     grid: np.ndarray) -> FilterBank:
    """Geometric bank lambda_j = f_max * 2^(-j/Q), j = 0 .. Q*J - 1, plus lowpass"""
    if int(Q) != Q or Q < 1:
        raise ConfigurationError(f"Quality factor Q must be a positive integer, got {Q}")
    if int(J) != J or J < 1:
        raise ConfigurationError(f"Number of octaves must be a positive integer, got {J}")
    Q, J = int(Q), int(J)
    if profile.kind == 'shannon' and Q != 1:
        raise ConfigurationError(f"Shannon wavelets require Q=1, got Q={Q}")

    step = float(grid[1])
    if f_max * 2.0 ** (-J) <= step:
        raise ConfigurationError(
            f"Lowest band edge {f_max * 2.0 ** (-J)} Hz is not above the grid step {step} Hz; "
            f"reduce the octaves or lengthen the signal")

    lambdas = f_max * 2.0 ** (-np.arange(Q * J) / Q)
    if lambdas[-1] * (2 ** (1.0 / Q) - 1) < step:
        raise ConfigurationError(
            f"{Q * J} filters exceed the grid resolution: adjacent centers near {lambdas[-1]:.4g} Hz "
            f"are closer than the grid step {step} Hz")

    if profile.kind == 'gammatone':
        hats = np.stack([design_gammatone_hat(Q, profile.order, lam, grid) for lam in lambdas])
    else:
        hats = np.stack([design_shannon_hat(lam, grid) for lam in lambdas])

    lowpass_hat = design_lowpass(T, grid)
    logging.debug(f"Built {profile.kind} bank: Q={Q}, J={J}, f_max={f_max} Hz, {len(lambdas)} filters")
    return FilterBank(profile, Q, J, float(f_max), float(T), lambdas, hats, lowpass_hat, np.array(grid, dtype=float))


def modulation_floor(Q: int, T: float) -> float:
    """Lowest admissible modulation frequency for pooling scale T (Hz)"""
    return Q / T


def build_modulation_bank(fb: FilterBank) -> FilterBank:
    """Same bank with every filter below the modulation floor Q/T dropped"""
    keep = fb.lambdas >= modulation_floor(fb.Q, fb.T)
    if not np.any(keep):
        logging.warning(f"Modulation floor {modulation_floor(fb.Q, fb.T):.4g} Hz removes every filter")
    return FilterBank(fb.profile, fb.Q, fb.J, fb.f_max, fb.T,
                      np.array(fb.lambdas[keep]), np.array(fb.hats[keep]),
                      np.array(fb.lowpass_hat), np.array(fb.grid))


def nearest_lambda(fb: FilterBank, frequency: float) -> float:
    """Center frequency closest to `frequency` on a log scale"""
    if len(fb) == 0:
        raise ConfigurationError("Filterbank is empty")
    distances = np.abs(np.log2(fb.lambdas / frequency))
    return float(fb.lambdas[int(np.argmin(distances))])


def littlewood_paley(fb: FilterBank) -> Tuple[float, float]:
    """
    Extrema of sum_lambda |hat_lambda|^2 + |lowpass|^2 over grid frequencies
    between the lowest and the highest filter center.
    """
    lp_sum = np.sum(np.abs(fb.hats) ** 2, axis=0) + np.abs(fb.lowpass_hat) ** 2
    inside = (fb.grid >= fb.lambdas.min()) & (fb.grid <= fb.lambdas.max())
    if not np.any(inside):
        raise ConfigurationError("No grid frequency lies inside the covered band")
    return float(np.min(lp_sum[inside])), float(np.max(lp_sum[inside]))
