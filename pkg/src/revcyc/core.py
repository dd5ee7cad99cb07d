"""Reverse-cyclic matrices stored by their generator vector.

A reverse-cyclic matrix of order N is fixed by its first row ``a_1..a_N``;
row ``i+1`` is row ``i`` rotated left by one place, which makes the matrix
real symmetric with ``H[i, j] = a[(i + j) mod N]`` (0-based).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ContractViolation


@dataclass(frozen=True)
class GeneratorVector:
    """The N free entries of a reverse-cyclic matrix."""

    entries: tuple[float, ...]

    def __post_init__(self):
        entries = tuple(float(x) for x in self.entries)
        if len(entries) < 2:
            raise ContractViolation(f"generator needs at least 2 entries, got {len(entries)}")
        if not all(math.isfinite(x) for x in entries):
            raise ContractViolation("generator entries must be finite")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def of(cls, values: Sequence[float]) -> "GeneratorVector":
        return cls(tuple(values))

    @property
    def dim(self) -> int:
        return len(self.entries)

    def as_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=float)


@dataclass(frozen=True)
class DenseMatrix:
    """Row-major square matrix materialized from a generator (or a spectrum)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ContractViolation(f"dense matrix must be square, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ContractViolation("dense matrix values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def is_symmetric(self, tol: float = 0.0) -> bool:
        return bool(np.max(np.abs(self.values - self.values.T), initial=0.0) <= tol)


def entry(g: GeneratorVector, i: int, j: int) -> float:
    """Matrix element ``H[i, j]`` with 1-based indices."""
    n = g.dim
    if not (1 <= i <= n and 1 <= j <= n):
        raise ContractViolation(f"index ({i}, {j}) out of range for N={n}")
    return g.entries[(i + j - 2) % n]


def to_dense(g: GeneratorVector) -> DenseMatrix:
    n = g.dim
    idx = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    return DenseMatrix(g.as_array()[idx])


def weight_exponent(g: GeneratorVector, stiffness: float) -> float:
    """Exponent ``A * Tr(H^T H)`` of the Gaussian (Wishart-type) weight.

    Every generator entry appears exactly N times in H, so the trace reduces
    to ``N * sum(a_k**2)``.
    """
    if not stiffness > 0:
        raise ContractViolation(f"stiffness must be positive, got {stiffness}")
    return stiffness * g.dim * math.fsum(x * x for x in g.entries)
