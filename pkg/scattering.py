"""
The iterated scattering transform: wavelet convolution followed by a pointwise
power or modulus, lowpass pooling into invariant coefficients, and per-layer
energy accounting. All convolutions are periodic (FFT products).
"""

# scattering.py

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

import config
from config import ConfigurationError, ResourceError
from filterbank import (FilterBank, WaveletProfile, build_filterbank, build_modulation_bank,
                        nearest_lambda)
from signals import Signal, grid_frequencies

NONLINEARITIES = ('power', 'modulus')

Path = Tuple[float, ...]
K = TypeVar('K')
V = TypeVar('V')


def validate_nonlinearity(nonlinearity: str):
    if nonlinearity not in NONLINEARITIES:
        raise ConfigurationError(f"Unknown nonlinearity '{nonlinearity}', expected one of {NONLINEARITIES}")


def apply_nonlinearity(z: np.ndarray, nonlinearity: str) -> np.ndarray:
    """|z|^2 for power, |z| for modulus"""
    if nonlinearity == 'power':
        return z.real ** 2 + z.imag ** 2
    return np.abs(z)


def map_ordered(func: Callable[[K], V], keys: Sequence[K], max_workers: int) -> List[V]:
    """
    Run func over keys in a thread pool and return results in key order,
    whatever the completion order.
    """
    if max_workers <= 1 or len(keys) <= 1:
        return [func(key) for key in keys]

    results: Dict[int, V] = {}
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        future_to_index = {executor.submit(func, key): i for i, key in enumerate(keys)}
        for future, i in future_to_index.items():
            results[i] = future.result()
    return [results[i] for i in range(len(keys))]


@dataclass
class ScatteringLayer:
    """U_m time series per path and, once pooled, S_m."""
    depth: int
    nonlinearity: str
    entries: Dict[Path, np.ndarray]
    pooled: Dict[Path, np.ndarray] = field(default_factory=dict)

    def paths(self) -> List[Path]:
        return list(self.entries.keys())

    def validate(self):
        """Check path shape, monotonicity and nonnegativity"""
        for path, series in self.entries.items():
            if len(path) != self.depth:
                raise ConfigurationError(f"Path {path} has {len(path)} elements at depth {self.depth}")
            if any(b >= a for a, b in zip(path, path[1:])):
                raise ConfigurationError(f"Path {path} is not strictly decreasing")
            if np.any(series < 0):
                raise ConfigurationError(f"Negative U value on path {path}")
        for path, series in self.pooled.items():
            if path not in self.entries:
                raise ConfigurationError(f"Pooled path {path} missing from entries")
            if np.any(series < 0):
                raise ConfigurationError(f"Negative S value on path {path}")


@dataclass(frozen=True)
class ScatteringConfig:
    profile: WaveletProfile
    Q: int
    J: int
    f_max: float
    T: float
    max_depth: int = 2
    nonlinearity: str = 'power'
    epsilon_relative: float = config.EPSILON_RELATIVE
    max_paths: int = config.MAX_PATHS
    lambda1: Optional[float] = None
    max_workers: int = config.MAX_WORKERS

    def __post_init__(self):
        if int(self.max_depth) != self.max_depth or self.max_depth < 1:
            raise ConfigurationError(f"Depth must be a positive integer, got {self.max_depth}")
        if not self.epsilon_relative > 0:
            raise ConfigurationError(f"Epsilon must be positive, got {self.epsilon_relative}")
        if self.max_paths < 1:
            raise ConfigurationError(f"Path cap must be positive, got {self.max_paths}")
        validate_nonlinearity(self.nonlinearity)

    def describe(self) -> dict:
        return {
            'profile': self.profile.describe(),
            'Q': self.Q,
            'J': self.J,
            'f_max': self.f_max,
            'T': self.T,
            'max_depth': self.max_depth,
            'nonlinearity': self.nonlinearity,
            'epsilon_relative': self.epsilon_relative,
            'max_paths': self.max_paths,
            'lambda1': self.lambda1,
        }

    def filterbank_for(self, x: Signal) -> FilterBank:
        grid = grid_frequencies(len(x), x.sample_rate)
        return build_filterbank(self.profile, self.Q, self.J, self.f_max, self.T, grid)


def check_grid(x: Signal, fb: FilterBank):
    if len(x) != fb.length or not np.isclose(x.sample_rate, fb.sample_rate):
        raise ConfigurationError(
            f"Signal grid ({len(x)} samples at {x.sample_rate} Hz) does not match the filterbank grid "
            f"({fb.length} samples at {fb.sample_rate} Hz)")


def scalogram(x: Signal, fb: FilterBank, nonlinearity: str = 'power',
              max_workers: int = config.MAX_WORKERS) -> ScatteringLayer:
    """U1(t, lambda1) = |x * psi_lambda1|^p(t)"""
    check_grid(x, fb)
    validate_nonlinearity(nonlinearity)
    spectrum = np.fft.fft(x.samples)

    def convolve(index: int) -> np.ndarray:
        return apply_nonlinearity(np.fft.ifft(spectrum * fb.hats[index]), nonlinearity)

    series = map_ordered(convolve, list(range(len(fb))), max_workers)
    entries = {(float(lam),): u for lam, u in zip(fb.lambdas, series)}
    return ScatteringLayer(1, nonlinearity, entries)


def children_of(path: Path, fb: FilterBank) -> List[int]:
    """Indices of the filters strictly below the last frequency of `path`"""
    return [i for i, lam in enumerate(fb.lambdas) if lam < path[-1]]


def scatter_layer(layer: ScatteringLayer, fb: FilterBank, nonlinearity: str = 'power',
                  parents: Optional[Iterable[Path]] = None, max_paths: int = config.MAX_PATHS,
                  max_workers: int = config.MAX_WORKERS) -> ScatteringLayer:
    """U_{m+1}(t, p + (lam,)) = |U_m(., p) * psi_lam|^p(t) for every lam < p[-1]"""
    if layer.depth < 1:
        raise ConfigurationError(f"Cannot scatter a layer of depth {layer.depth}")
    validate_nonlinearity(nonlinearity)
    parent_paths = layer.paths() if parents is None else [p for p in parents if p in layer.entries]

    child_count = sum(len(children_of(p, fb)) for p in parent_paths)
    if child_count > max_paths:
        raise ResourceError(
            f"Depth {layer.depth + 1} would hold {child_count} paths, above the cap of {max_paths}")

    def scatter_parent(path: Path) -> List[Tuple[Path, np.ndarray]]:
        spectrum = np.fft.fft(layer.entries[path])
        return [(path + (float(fb.lambdas[i]),),
                 apply_nonlinearity(np.fft.ifft(spectrum * fb.hats[i]), nonlinearity))
                for i in children_of(path, fb)]

    entries: Dict[Path, np.ndarray] = {}
    for children in map_ordered(scatter_parent, parent_paths, max_workers):
        entries.update(children)
    return ScatteringLayer(layer.depth + 1, nonlinearity, entries)


def pool(layer: ScatteringLayer, lowpass_hat: np.ndarray) -> ScatteringLayer:
    """S_m = U_m * phi_T, filled into `layer.pooled`"""
    for path, series in layer.entries.items():
        smoothed = np.fft.ifft(np.fft.fft(series) * lowpass_hat).real
        # float noise around zero
        layer.pooled[path] = np.maximum(smoothed, 0.0)
    return layer


def scattering_forward(x: Signal, cfg: ScatteringConfig,
                       fb: Optional[FilterBank] = None) -> List[ScatteringLayer]:
    """Layers 1..M, each with U_m and S_m"""
    if fb is None:
        fb = cfg.filterbank_for(x)
    check_grid(x, fb)
    if len(fb) > cfg.max_paths:
        raise ResourceError(f"Depth 1 would hold {len(fb)} paths, above the cap of {cfg.max_paths}")

    layers = [pool(scalogram(x, fb, cfg.nonlinearity, cfg.max_workers), fb.lowpass_hat)]
    layers[0].validate()
    logging.debug(f"Depth 1: {len(layers[0].entries)} paths")
    if cfg.max_depth == 1:
        return layers

    modulation_bank = build_modulation_bank(fb)
    for depth in range(2, cfg.max_depth + 1):
        parents = None
        if depth == 2 and cfg.lambda1 is not None:
            parents = [(nearest_lambda(fb, cfg.lambda1),)]
        layer = scatter_layer(layers[-1], modulation_bank, cfg.nonlinearity, parents,
                              cfg.max_paths, cfg.max_workers)
        layers.append(pool(layer, fb.lowpass_hat))
        layer.validate()
        logging.debug(f"Depth {depth}: {len(layer.entries)} paths")
    return layers


def layer_energy(layer: ScatteringLayer) -> float:
    """
    Mean power captured at this depth: sum over paths of mean(U) in power mode
    (U is already a squared modulus), of mean(U^2) in modulus mode.
    """
    if layer.nonlinearity == 'power':
        per_path = [float(np.mean(u)) for u in layer.entries.values()]
    else:
        per_path = [float(np.mean(u ** 2)) for u in layer.entries.values()]
    return math.fsum(per_path)


def scattering_energies(layers: Sequence[ScatteringLayer]) -> List[float]:
    return [layer_energy(layer) for layer in layers]
