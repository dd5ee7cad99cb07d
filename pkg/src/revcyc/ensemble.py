"""Gaussian ensemble of reverse-cyclic matrices.

The weight ``exp(-A Tr(H^T H)) = exp(-A N sum a_k^2)`` makes every generator
entry an independent ``Normal(0, 1/(2 A N))`` variate.

Each matrix draws from its own counter-based Philox stream keyed by
``(seed, index)``, so matrix ``i`` is the same no matter which subset of the
ensemble is generated, in what order, or on how many threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .core import GeneratorVector
from .errors import ContractViolation
from .spectral import SpectrumBatch, SpectrumDecomposition, spectrum_batch

SEED_MASK = (1 << 64) - 1
CHUNK = 4096


@dataclass(frozen=True)
class EnsembleConfig:
    dim: int
    stiffness: float = 1.0
    count: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.dim < 2:
            raise ContractViolation(f"dim must be >= 2, got {self.dim}")
        if not self.stiffness > 0:
            raise ContractViolation(f"stiffness must be positive, got {self.stiffness}")
        if self.count < 1:
            raise ContractViolation(f"count must be >= 1, got {self.count}")
        if not 0 <= self.seed <= SEED_MASK:
            raise ContractViolation("seed must be a 64-bit unsigned integer")

    @property
    def entry_std(self) -> float:
        return math.sqrt(1.0 / (2.0 * self.stiffness * self.dim))


def stream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for substream ``index`` of master ``seed``."""
    key = np.array([seed & SEED_MASK, index & SEED_MASK], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _draw(cfg: EnsembleConfig, index: int) -> np.ndarray:
    return cfg.entry_std * stream(cfg.seed, index).standard_normal(cfg.dim)


def sample_generator(cfg: EnsembleConfig, stream_index: int) -> GeneratorVector:
    if not 0 <= stream_index < cfg.count:
        raise ContractViolation(f"stream index {stream_index} outside [0, {cfg.count})")
    return GeneratorVector(tuple(_draw(cfg, stream_index)))


def sample_generators(
    cfg: EnsembleConfig, start: int = 0, stop: int | None = None, threads: int = 1
) -> np.ndarray:
    """Generators ``start..stop-1`` stacked into an array of shape ``(k, N)``."""
    stop = cfg.count if stop is None else stop
    if not 0 <= start <= stop <= cfg.count:
        raise ContractViolation(f"bad index range [{start}, {stop})")
    out = np.empty((stop - start, cfg.dim))

    def fill(lo: int, hi: int) -> None:
        for i in range(lo, hi):
            out[i - start] = _draw(cfg, i)

    if threads <= 1:
        fill(start, stop)
    else:
        bounds = np.linspace(start, stop, threads + 1).astype(int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, bounds[:-1], bounds[1:]))
    return out


def sample_spectra(cfg: EnsembleConfig, threads: int = 1) -> tuple[np.ndarray, SpectrumBatch]:
    """Whole ensemble at once: generator array and its spectra."""
    gens = sample_generators(cfg, threads=threads)
    return gens, spectrum_batch(gens)


def sample_ensemble(
    cfg: EnsembleConfig, threads: int = 1
) -> Iterator[tuple[GeneratorVector, SpectrumDecomposition]]:
    """Yield ``(generator, spectrum)`` for indices ``0..count-1`` in order."""
    for lo in range(0, cfg.count, CHUNK):
        hi = min(lo + CHUNK, cfg.count)
        gens = sample_generators(cfg, lo, hi, threads=threads)
        spectra = spectrum_batch(gens)
        for row, spec in zip(gens, spectra):
            yield GeneratorVector(tuple(row)), spec
