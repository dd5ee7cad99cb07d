"""Closed-form eigenvalue densities, spacing laws and joint densities.

All laws are parameterized by the stiffness A of the Gaussian matrix weight.

Scalar laws
    trivial density       sqrt(A/pi) exp(-A E^2)
    nontrivial density    2 A |E| exp(-2 A E^2)
    S12 (trivial vs signed nontrivial eigenvalue)
    S23 = 2|E_k|          A s exp(-A s^2 / 2)
    Spp (two magnitudes)  printed with total mass 1/2

Joint densities over ``(E1, E2..E_{n+1}, theta_1..theta_n)`` with signed
``E`` and phases in ``[0, 2 pi)``; these integrate to one as written.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate, special

from .errors import ContractViolation, UnsupportedLawError

SQRT_PI = math.sqrt(math.pi)
TWO_PI = 2.0 * math.pi


class LawKind(enum.Enum):
    TRIVIAL_DENSITY = "trivial"
    NONTRIVIAL_DENSITY = "nontrivial"
    SPACING_S12 = "s12"
    SPACING_S23 = "s23"
    SPACING_SPP = "spp"
    JPDF3 = "jpdf3"
    JPDF5 = "jpdf5"
    JPDF_ODD = "jpdf"

    @property
    def is_scalar(self) -> bool:
        return self not in (LawKind.JPDF3, LawKind.JPDF5, LawKind.JPDF_ODD)

    @property
    def is_spacing(self) -> bool:
        return self in (LawKind.SPACING_S12, LawKind.SPACING_S23, LawKind.SPACING_SPP)


@dataclass(frozen=True)
class AnalyticLaw:
    """A law together with its stiffness.

    For joint densities ``n`` is the number of ``+-|E|`` pairs (1 for 3x3,
    2 for 5x5); ``even=True`` selects the even-order variant, which carries a
    second Gaussian eigenvalue right after ``E1``.
    """

    kind: LawKind
    stiffness: float = 1.0
    n: Optional[int] = None
    even: bool = False

    def __post_init__(self):
        if not self.stiffness > 0:
            raise ContractViolation(f"stiffness must be positive, got {self.stiffness}")
        fixed = {LawKind.JPDF3: 1, LawKind.JPDF5: 2}
        if self.kind in fixed:
            if self.n not in (None, fixed[self.kind]):
                raise ContractViolation(f"{self.kind.name} has n={fixed[self.kind]}")
            object.__setattr__(self, "n", fixed[self.kind])
        elif self.kind is LawKind.JPDF_ODD:
            if self.n is None or self.n < 1:
                raise ContractViolation("JPDF_ODD needs n >= 1")
        elif self.n is not None or self.even:
            raise ContractViolation(f"{self.kind.name} takes no n/even parameters")

    @property
    def total_mass(self) -> float:
        return 0.5 if self.kind is LawKind.SPACING_SPP else 1.0

    @property
    def lower(self) -> float:
        return 0.0 if self.kind.is_spacing else -math.inf

    def with_stiffness(self, stiffness: float) -> "AnalyticLaw":
        return AnalyticLaw(self.kind, stiffness, self.n, self.even)

    def pdf(self, x):
        return pdf(self, x)

    def cdf(self, x):
        return cdf(self, x)


# -- densities ---------------------------------------------------------------


def _trivial_pdf(x, a):
    return math.sqrt(a / math.pi) * np.exp(-a * x * x)


def _nontrivial_pdf(x, a):
    return 2.0 * a * np.abs(x) * np.exp(-2.0 * a * x * x)


def _s12_pdf(s, a):
    gauss = 12.0 * math.sqrt(a) / (9.0 * SQRT_PI) * np.exp(-a * s * s)
    cross = (
        4.0 * a * math.sqrt(3.0 * math.pi) / (9.0 * SQRT_PI)
        * s * np.exp(-2.0 * a * s * s / 3.0) * special.erf(math.sqrt(a / 3.0) * s)
    )
    return gauss + cross


def _s23_pdf(s, a):
    return a * s * np.exp(-0.5 * a * s * s)


def _spp_pdf(s, a):
    # exp(-A s^2) erfc(sqrt(A) s) == exp(-2 A s^2) erfcx(sqrt(A) s), no underflow
    tail = np.exp(-2.0 * a * s * s) * special.erfcx(math.sqrt(a) * s)
    return a * s * np.exp(-2.0 * a * s * s) - 0.5 * math.sqrt(math.pi * a) * (2.0 * a * s * s - 1.0) * tail


_SCALAR_PDF = {
    LawKind.TRIVIAL_DENSITY: _trivial_pdf,
    LawKind.NONTRIVIAL_DENSITY: _nontrivial_pdf,
    LawKind.SPACING_S12: _s12_pdf,
    LawKind.SPACING_S23: _s23_pdf,
    LawKind.SPACING_SPP: _spp_pdf,
}


def _jpdf(law: AnalyticLaw, x) -> np.ndarray:
    a = law.stiffness
    n = law.n
    n_gauss = 2 if law.even else 1
    width = n_gauss + 2 * n
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    if pts.shape[-1] != width:
        raise ContractViolation(f"expected points of length {width}, got {pts.shape[-1]}")
    gauss = pts[:, :n_gauss]
    paired = pts[:, n_gauss : n_gauss + n]
    theta = pts[:, n_gauss + n :]
    if np.any((theta < 0) | (theta >= TWO_PI)):
        raise ContractViolation("phases must lie in [0, 2pi)")
    expo = -a * (np.sum(gauss**2, axis=1) + 2.0 * np.sum(paired**2, axis=1))
    log_norm = (0.5 * n_gauss + n) * math.log(a / math.pi)
    if n < 5:
        out = math.exp(log_norm) * np.prod(np.abs(paired), axis=1) * np.exp(expo)
    else:
        with np.errstate(divide="ignore"):
            logp = log_norm + np.sum(np.log(np.abs(paired)), axis=1) + expo
        out = np.exp(logp)
    return out[0] if np.ndim(x) == 1 else out


def pdf(law: AnalyticLaw, x):
    """Density of ``law`` at ``x`` (scalar, array, or JPDF point(s))."""
    if not law.kind.is_scalar:
        return _jpdf(law, x)
    xs = np.asarray(x, dtype=float)
    if law.kind.is_spacing and np.any(xs < 0):
        raise ContractViolation(f"{law.kind.name} is supported on [0, inf)")
    out = _SCALAR_PDF[law.kind](xs, law.stiffness)
    return float(out) if out.ndim == 0 else out


def jpdf_factorized(law: AnalyticLaw, x) -> float:
    """Same value as ``pdf`` for a joint law, assembled from one-dimensional factors.

    Each Gaussian eigenvalue contributes the trivial density, each paired one
    the nontrivial density, each phase a uniform ``1/(2 pi)``.
    """
    if law.kind.is_scalar:
        raise UnsupportedLawError("factorization applies to joint laws only")
    n_gauss = 2 if law.even else 1
    x = np.asarray(x, dtype=float)
    a = law.stiffness
    value = 1.0
    for e in x[:n_gauss]:
        value *= _trivial_pdf(e, a)
    for e in x[n_gauss : n_gauss + law.n]:
        value *= _nontrivial_pdf(e, a)
    return float(value / TWO_PI**law.n)


# -- cumulative distributions ------------------------------------------------


def _trivial_cdf(x, a):
    return 0.5 * special.erfc(-math.sqrt(a) * x)


def _nontrivial_cdf(x, a):
    half_tail = 0.5 * np.exp(-2.0 * a * x * x)
    return np.where(x < 0, half_tail, 1.0 - half_tail)


def _s12_cdf(s, a):
    # integration by parts of the cross term
    return special.erf(math.sqrt(a) * s) - np.exp(-2.0 * a * s * s / 3.0) * special.erf(
        math.sqrt(a / 3.0) * s
    ) / math.sqrt(3.0)


def _s23_cdf(s, a):
    return -np.expm1(-0.5 * a * s * s)


def _spp_cdf(s, a):
    return -0.5 * np.expm1(-2.0 * a * s * s) + 0.5 * math.sqrt(math.pi * a) * s * np.exp(
        -2.0 * a * s * s
    ) * special.erfcx(math.sqrt(a) * s)


_SCALAR_CDF = {
    LawKind.TRIVIAL_DENSITY: _trivial_cdf,
    LawKind.NONTRIVIAL_DENSITY: _nontrivial_cdf,
    LawKind.SPACING_S12: _s12_cdf,
    LawKind.SPACING_S23: _s23_cdf,
    LawKind.SPACING_SPP: _spp_cdf,
}


def cdf(law: AnalyticLaw, x):
    """Mass of ``law`` below ``x``, in ``[0, total_mass]``."""
    if not law.kind.is_scalar:
        raise UnsupportedLawError(f"no cdf for joint law {law.kind.name}")
    xs = np.asarray(x, dtype=float)
    if law.kind.is_spacing:
        xs = np.maximum(xs, 0.0)
    with np.errstate(invalid="ignore"):
        out = _SCALAR_CDF[law.kind](xs, law.stiffness)
    out = np.where(np.isposinf(xs), law.total_mass, out)
    out = np.where(np.isneginf(xs), 0.0, out)
    return float(out) if out.ndim == 0 else out


def cdf_quad(law: AnalyticLaw, x: float) -> float:
    """Adaptive-quadrature cdf, independent of the closed forms above."""
    if not law.kind.is_scalar:
        raise UnsupportedLawError(f"no cdf for joint law {law.kind.name}")
    lo = law.lower
    if x <= lo:
        return 0.0
    f = lambda t: pdf(law, t)
    if lo == -math.inf and x > 0:
        left, _ = integrate.quad(f, -math.inf, 0.0, epsabs=1e-12, epsrel=1e-12)
        right, _ = integrate.quad(f, 0.0, x, epsabs=1e-12, epsrel=1e-12, limit=200)
        return left + right
    val, _ = integrate.quad(f, lo, x, epsabs=1e-12, epsrel=1e-12, limit=200)
    return val


def mean(law: AnalyticLaw) -> float:
    """Mean of the law normalized to unit mass, by quadrature."""
    if not law.kind.is_scalar:
        raise UnsupportedLawError(f"no mean for joint law {law.kind.name}")
    m, _ = integrate.quad(lambda t: t * pdf(law, t), law.lower, math.inf, epsabs=1e-13, epsrel=1e-13)
    return m / law.total_mass


def calibrate_unit_mean(kind: LawKind) -> float:
    """Stiffness at which a spacing law has unit mean.

    Means scale as ``1/sqrt(A)``, so ``A = mean(A=1)**2``.
    """
    if not kind.is_spacing:
        raise UnsupportedLawError(f"{kind.name} is not a spacing law")
    return mean(AnalyticLaw(kind, 1.0)) ** 2


# -- sampling ----------------------------------------------------------------


def _half_normal(rng, a, size):
    return np.abs(rng.standard_normal(size)) * math.sqrt(0.5 / a)


def _rayleigh(rng, sigma2, size):
    return np.sqrt(-2.0 * sigma2 * np.log1p(-rng.random(size)))


def _reject(rng, size, propose, target, envelope):
    out = np.empty(size)
    filled = 0
    while filled < size:
        want = max(64, int(1.3 * (size - filled) * 2.5))
        s = propose(want)
        keep = s[rng.random(want) * envelope(s) <= target(s)]
        take = min(len(keep), size - filled)
        out[filled : filled + take] = keep[:take]
        filled += take
    return out


def _sample_s12(rng, a, size):
    # envelope (2/3) halfnormal + (1/sqrt 3) Rayleigh(sigma^2 = 3/(4A)) bounds the density
    w = (2.0 / 3.0) / (2.0 / 3.0 + 1.0 / math.sqrt(3.0))

    def propose(k):
        pick = rng.random(k) < w
        return np.where(pick, _half_normal(rng, a, k), _rayleigh(rng, 0.75 / a, k))

    def envelope(s):
        hn = 2.0 * math.sqrt(a / math.pi) * np.exp(-a * s * s)
        ray = (4.0 * a / 3.0) * s * np.exp(-2.0 * a * s * s / 3.0)
        return (2.0 / 3.0) * hn + ray / math.sqrt(3.0)

    return _reject(rng, size, propose, lambda s: _s12_pdf(s, a), envelope)


def _sample_spp(rng, a, size):
    # normalized law 2*Spp <= (1/2) Rayleigh(sigma^2 = 1/(4A)) + (pi/2) halfnormal
    w = 0.5 / (0.5 + 0.5 * math.pi)

    def propose(k):
        pick = rng.random(k) < w
        return np.where(pick, _rayleigh(rng, 0.25 / a, k), _half_normal(rng, a, k))

    def envelope(s):
        ray = 4.0 * a * s * np.exp(-2.0 * a * s * s)
        hn = 2.0 * math.sqrt(a / math.pi) * np.exp(-a * s * s)
        return 0.5 * ray + 0.5 * math.pi * hn

    return _reject(rng, size, propose, lambda s: 2.0 * _spp_pdf(s, a), envelope)


def sample_law(law: AnalyticLaw, rng: np.random.Generator, size: Optional[int] = None):
    """Draw from a scalar law (normalized to unit mass) using ``rng`` only."""
    if not law.kind.is_scalar:
        raise UnsupportedLawError(f"cannot sample joint law {law.kind.name}")
    k = 1 if size is None else int(size)
    a = law.stiffness
    kind = law.kind
    if kind is LawKind.TRIVIAL_DENSITY:
        out = rng.standard_normal(k) * math.sqrt(0.5 / a)
    elif kind is LawKind.NONTRIVIAL_DENSITY:
        mag = np.sqrt(-np.log1p(-rng.random(k)) / (2.0 * a))
        out = np.where(rng.random(k) < 0.5, -mag, mag)
    elif kind is LawKind.SPACING_S23:
        out = np.sqrt(-2.0 * np.log1p(-rng.random(k)) / a)
    elif kind is LawKind.SPACING_S12:
        out = _sample_s12(rng, a, k)
    else:
        out = _sample_spp(rng, a, k)
    return float(out[0]) if size is None else out
