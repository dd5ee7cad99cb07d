"""Closed-form spectra of reverse-cyclic matrices.

With ``c_m = sum_j a_j exp(2 pi i (j-1) m / N)`` the spectrum of H is
``{c_0} U {+|c_m|, -|c_m| : 1 <= m < N/2} U {c_{N/2}}`` (the last only for
even N).  The orthogonal eigenvector matrix is ``F^dagger diag(1, R)`` where
F is the unitary DFT matrix and R mixes each frequency with its mirror
image through the half-angle phases.

Also hosts an independent cyclic-Jacobi eigenvalue oracle and the 3x3
eigen-to-matrix map with its Jacobian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .core import DenseMatrix, GeneratorVector
from .errors import ContractViolation, DegenerateJacobianError, NumericalError

TWO_PI = 2.0 * math.pi
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 50


def n_pairs(dim: int) -> int:
    """Number of ``+-|E_k|`` pairs in a spectrum of order ``dim``."""
    return (dim - 1) // 2


# -- transform ---------------------------------------------------------------


def _kernel(dim: int) -> np.ndarray:
    # reduce j*m mod N before the exponential so large N keeps full accuracy
    jm = np.outer(np.arange(dim), np.arange(dim)) % dim
    return np.exp(2j * math.pi * jm / dim)


def _sequential_sum(a: np.ndarray, signs: Optional[np.ndarray] = None) -> np.ndarray:
    """Left-to-right sum over the last axis (same order as builtin ``sum``)."""
    a = np.atleast_2d(a)
    if signs is not None:
        a = a * signs
    acc = a[:, 0].copy()
    for j in range(1, a.shape[1]):
        acc += a[:, j]
    return acc


def _fft_radix2(x: np.ndarray) -> np.ndarray:
    # positive-exponent kernel, recursion on the last axis
    n = x.shape[-1]
    if n == 1:
        return x.astype(complex)
    even = _fft_radix2(x[..., 0::2])
    odd = _fft_radix2(x[..., 1::2])
    tw = np.exp(2j * math.pi * np.arange(n // 2) / n) * odd
    return np.concatenate([even + tw, even - tw], axis=-1)


def _is_pow2(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def dft_batch(a: np.ndarray, fast: bool = False) -> np.ndarray:
    """Transform every row of ``a`` (shape ``(count, N)``)."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    dim = a.shape[1]
    if fast and _is_pow2(dim):
        c = _fft_radix2(a)
    else:
        c = a @ _kernel(dim).T
    c[:, 0] = _sequential_sum(a)
    return c


def dft(g: GeneratorVector, fast: bool = False) -> np.ndarray:
    """Coefficients ``c_0 .. c_{N-1}`` by direct summation.

    ``fast=True`` switches to a radix-2 recursion when N is a power of two.
    """
    return dft_batch(g.as_array()[None, :], fast=fast)[0]


# -- spectrum ----------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumDecomposition:
    """Trivial eigenvalue, paired magnitudes with phases, and the even extra.

    The eigenvalue list is ordered ``(E1, |E2|, .., |EK|, [extra], -|EK|, .., -|E2|)``.
    Phases lie in ``[0, 2 pi)``.
    """

    dim: int
    trivial: float
    magnitudes: tuple[float, ...]
    phases: tuple[float, ...]
    even_extra: Optional[float] = None

    def __post_init__(self):
        k = n_pairs(self.dim)
        if len(self.magnitudes) != k or len(self.phases) != k:
            raise ContractViolation(f"N={self.dim} needs {k} pairs")
        if (self.even_extra is None) != (self.dim % 2 == 1):
            raise ContractViolation("even_extra must be present iff N is even")
        if any(m < 0 for m in self.magnitudes):
            raise ContractViolation("magnitudes must be nonnegative")
        if any(not (0.0 <= p < TWO_PI) for p in self.phases):
            raise ContractViolation("phases must lie in [0, 2pi)")

    @property
    def pairs(self) -> list[tuple[float, float]]:
        return list(zip(self.magnitudes, self.phases))

    def eigenvalues(self) -> np.ndarray:
        mags = np.array(self.magnitudes, dtype=float)
        middle = [self.even_extra] if self.even_extra is not None else []
        return np.concatenate([[self.trivial], mags, middle, -mags[::-1]])

    def sorted_eigenvalues(self) -> np.ndarray:
        return np.sort(self.eigenvalues())


@dataclass(frozen=True)
class SpectrumBatch:
    """Column-oriented spectra for many matrices of the same order."""

    dim: int
    trivial: np.ndarray  # (count,)
    magnitudes: np.ndarray  # (count, K)
    phases: np.ndarray  # (count, K)
    even_extra: Optional[np.ndarray] = None  # (count,) for even N

    def __len__(self) -> int:
        return len(self.trivial)

    def __iter__(self) -> Iterator[SpectrumDecomposition]:
        for i in range(len(self)):
            yield self[i]

    def __getitem__(self, i: int) -> SpectrumDecomposition:
        return SpectrumDecomposition(
            dim=self.dim,
            trivial=float(self.trivial[i]),
            magnitudes=tuple(float(x) for x in self.magnitudes[i]),
            phases=tuple(float(x) for x in self.phases[i]),
            even_extra=None if self.even_extra is None else float(self.even_extra[i]),
        )

    @classmethod
    def from_spectra(cls, spectra: Iterable[SpectrumDecomposition]) -> "SpectrumBatch":
        spectra = list(spectra)
        if not spectra:
            raise ContractViolation("no spectra given")
        dims = {s.dim for s in spectra}
        if len(dims) != 1:
            raise ContractViolation(f"mixed matrix orders {sorted(dims)}")
        dim = dims.pop()
        k = n_pairs(dim)
        extra = None
        if dim % 2 == 0:
            extra = np.array([s.even_extra for s in spectra], dtype=float)
        return cls(
            dim=dim,
            trivial=np.array([s.trivial for s in spectra], dtype=float),
            magnitudes=np.array([s.magnitudes for s in spectra], dtype=float).reshape(-1, k),
            phases=np.array([s.phases for s in spectra], dtype=float).reshape(-1, k),
            even_extra=extra,
        )

    def sorted_eigenvalues(self) -> np.ndarray:
        parts = [self.trivial[:, None], self.magnitudes, -self.magnitudes]
        if self.even_extra is not None:
            parts.append(self.even_extra[:, None])
        return np.sort(np.concatenate(parts, axis=1), axis=1)


def _phase(c: np.ndarray) -> np.ndarray:
    # argument of the conjugate coefficient (the exp(-2 pi i ..) transform);
    # this is the angle theta that parametrizes the 3x3 map below
    phi = np.mod(-np.angle(c), TWO_PI)
    phi = np.where(phi >= TWO_PI, 0.0, phi)
    return np.where(c == 0, 0.0, phi)


def spectrum_batch(a: np.ndarray) -> SpectrumBatch:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    dim = a.shape[1]
    c = dft_batch(a)
    k = n_pairs(dim)
    pc = c[:, 1 : k + 1]
    extra = None
    if dim % 2 == 0:
        signs = np.where(np.arange(dim) % 2 == 0, 1.0, -1.0)
        extra = _sequential_sum(a, signs)
    return SpectrumBatch(
        dim=dim,
        trivial=c[:, 0].real.copy(),
        magnitudes=np.abs(pc),
        phases=_phase(pc),
        even_extra=extra,
    )


def spectrum(g: GeneratorVector) -> SpectrumDecomposition:
    return spectrum_batch(g.as_array()[None, :])[0]


# -- eigenvectors ------------------------------------------------------------


@dataclass(frozen=True)
class EigenvectorMatrix:
    values: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.shape[0]


def fourier_matrix(dim: int) -> np.ndarray:
    """Unitary DFT matrix ``F[r, s] = exp(2 pi i r s / n) / sqrt(n)`` (0-based)."""
    return _kernel(dim) / math.sqrt(dim)


def rotation_block(phases: Sequence[float], even: bool) -> np.ndarray:
    """The block R mixing each frequency with its mirror.

    ``R = [[E^+, i E^+ I], [I E, -i I E I]]`` with ``E = diag(exp(i phi/2))/sqrt 2``
    and I the anti-diagonal identity; for even order a unit entry sits in the
    middle for the Nyquist frequency.
    """
    k = len(phases)
    e = np.diag(np.exp(0.5j * np.asarray(phases, dtype=float))) / math.sqrt(2.0)
    e_h = e.conj().T
    flip = np.fliplr(np.eye(k))
    top = [e_h, 1j * e_h @ flip]
    bottom = [flip @ e, -1j * flip @ e @ flip]
    if not even:
        return np.block([top, bottom]) if k else np.zeros((0, 0), complex)
    zc = np.zeros((k, 1))
    zr = np.zeros((1, k))
    return np.block(
        [
            [top[0], zc, top[1]],
            [zr, np.ones((1, 1)), zr],
            [bottom[0], zc, bottom[1]],
        ]
    )


def eigenvector_matrix(s: SpectrumDecomposition) -> EigenvectorMatrix:
    n = s.dim
    r = rotation_block(s.phases, even=(n % 2 == 0))
    d = np.zeros((n, n), dtype=complex)
    d[0, 0] = 1.0
    d[1:, 1:] = r
    o = fourier_matrix(n).conj().T @ d
    if np.max(np.abs(o.imag)) > 1e-10:
        raise NumericalError("eigenvector matrix is not real")
    return EigenvectorMatrix(o.real)


def reconstruct(s: SpectrumDecomposition) -> DenseMatrix:
    o = eigenvector_matrix(s).values
    return DenseMatrix((o * s.eigenvalues()) @ o.T)


# -- dense oracle ------------------------------------------------------------


def jacobi_eigenvalues_batch(ms: np.ndarray) -> np.ndarray:
    """Cyclic Jacobi on a stack of symmetric matrices, shape ``(B, N, N)``.

    Rotations are applied to every matrix of the stack in lockstep; sweeping
    stops once each off-diagonal Frobenius norm is below ``1e-12`` times the
    matrix norm. Returns ascending eigenvalues, shape ``(B, N)``.
    """
    a = np.array(ms, dtype=float)
    if a.ndim == 2:
        a = a[None]
    if a.ndim != 3 or a.shape[1] != a.shape[2]:
        raise ContractViolation(f"expected a stack of square matrices, got {a.shape}")
    scale = np.maximum(1.0, np.max(np.abs(a), axis=(1, 2)))
    if np.any(np.max(np.abs(a - a.transpose(0, 2, 1)), axis=(1, 2)) > 1e-12 * scale):
        raise ContractViolation("jacobi_eigenvalues needs a symmetric matrix")
    a = 0.5 * (a + a.transpose(0, 2, 1))
    n = a.shape[1]
    tol = JACOBI_TOL * np.sqrt(np.sum(a * a, axis=(1, 2)))
    offmask = ~np.eye(n, dtype=bool)

    for _ in range(JACOBI_MAX_SWEEPS + 1):
        off = np.sqrt(np.sum(a[:, offmask] ** 2, axis=1))
        if np.all(off <= tol):
            return np.sort(np.diagonal(a, axis1=1, axis2=2), axis=1)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                live = apq != 0.0
                if not np.any(live):
                    continue
                denom = np.where(live, 2.0 * apq, 1.0)
                theta = (a[:, q, q] - a[:, p, p]) / denom
                t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
                t = np.where(live, t, 0.0)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                cc, ss = c[:, None], s[:, None]
                colp = a[:, :, p].copy()
                colq = a[:, :, q]
                a[:, :, p] = cc * colp - ss * colq
                a[:, :, q] = ss * colp + cc * colq
                rowp = a[:, p, :].copy()
                rowq = a[:, q, :]
                a[:, p, :] = cc * rowp - ss * rowq
                a[:, q, :] = ss * rowp + cc * rowq
                a[live, p, q] = 0.0
                a[live, q, p] = 0.0
    raise NumericalError(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")


def jacobi_eigenvalues(m: DenseMatrix | np.ndarray) -> np.ndarray:
    values = m.values if isinstance(m, DenseMatrix) else np.asarray(m, dtype=float)
    return jacobi_eigenvalues_batch(values[None])[0]


# -- 3x3 parametrization -----------------------------------------------------


def map_eigen_to_matrix3(e1: float, abs_e2: float, theta: float) -> GeneratorVector:
    """Generator ``(a, b, c)`` of the 3x3 matrix with spectrum ``(E1, +-|E2|)``."""
    if abs_e2 < 0:
        raise ContractViolation(f"|E2| must be nonnegative, got {abs_e2}")
    cos, sin = math.cos(theta), math.sin(theta)
    r3 = math.sqrt(3.0)
    return GeneratorVector(
        (
            (e1 + 2.0 * abs_e2 * cos) / 3.0,
            (e1 - abs_e2 * (cos + r3 * sin)) / 3.0,
            (e1 - abs_e2 * (cos - r3 * sin)) / 3.0,
        )
    )


def jacobian3(
    e1: float, abs_e2: float, theta: float, numeric: bool = False, step: float = 1e-5
) -> float:
    """Absolute Jacobian of :func:`map_eigen_to_matrix3`, ``2|E2| / (3 sqrt 3)``.

    ``numeric=True`` instead returns ``|det|`` of the central-difference
    derivative matrix, for validation of the closed form.
    """
    if abs_e2 <= 0:
        raise DegenerateJacobianError("Jacobian vanishes at |E2| = 0")
    if not numeric:
        return 2.0 * abs_e2 / (3.0 * math.sqrt(3.0))
    x = np.array([e1, abs_e2, theta], dtype=float)
    cols = []
    for i in range(3):
        dx = np.zeros(3)
        dx[i] = step
        plus = map_eigen_to_matrix3(*(x + dx)).as_array()
        minus = map_eigen_to_matrix3(*(x - dx)).as_array()
        cols.append((plus - minus) / (2.0 * step))
    return abs(float(np.linalg.det(np.column_stack(cols))))
