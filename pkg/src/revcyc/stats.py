"""Empirical observables, histograms and goodness-of-fit tests."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from scipy import stats as sps

from .errors import ContractViolation, EmptyDataError, InsufficientDataError
from .laws import AnalyticLaw, LawKind, cdf
from .spectral import SpectrumBatch, SpectrumDecomposition

KS_SERIES_TERMS = 100
MIN_EXPECTED = 5.0


class Observable(enum.Enum):
    NONTRIVIAL = "nontrivial"
    TRIVIAL = "trivial"
    S12 = "s12"
    S23 = "s23"
    SPP = "spp"


class Pairing(enum.Enum):
    ALL_PAIRS = "all-pairs"
    CONSECUTIVE = "consecutive"


# which analytic law each observable is compared with
OBSERVABLE_LAW = {
    Observable.NONTRIVIAL: LawKind.NONTRIVIAL_DENSITY,
    Observable.TRIVIAL: LawKind.TRIVIAL_DENSITY,
    Observable.S12: LawKind.SPACING_S12,
    Observable.S23: LawKind.SPACING_S23,
    Observable.SPP: LawKind.SPACING_SPP,
}

Spectra = Union[SpectrumBatch, Iterable[SpectrumDecomposition]]


def _as_batch(spectra: Spectra) -> SpectrumBatch:
    if isinstance(spectra, SpectrumBatch):
        return spectra
    return SpectrumBatch.from_spectra(spectra)


def extract_observable(
    spectra: Spectra, kind: Observable | str, pairing: Pairing | str = Pairing.ALL_PAIRS
) -> np.ndarray:
    """Flatten one eigenvalue or spacing observable over an ensemble.

    S12 pairs the trivial eigenvalue with both members of every +- pair.
    Spp uses all unordered pairs of magnitudes within a matrix by default,
    or gaps between sorted magnitudes with ``pairing="consecutive"``.
    The even-order extra eigenvalue belongs to none of these observables.
    """
    try:
        kind = Observable(kind)
        pairing = Pairing(pairing)
    except ValueError as exc:
        raise ContractViolation(str(exc)) from None
    b = _as_batch(spectra)
    mags = b.magnitudes
    if kind is Observable.TRIVIAL:
        return b.trivial.copy()
    if kind is Observable.NONTRIVIAL:
        return np.concatenate([mags, -mags], axis=1).ravel()
    if kind is Observable.S23:
        return 2.0 * mags.ravel()
    if kind is Observable.S12:
        signed = np.concatenate([mags, -mags], axis=1)
        return np.abs(b.trivial[:, None] - signed).ravel()
    # SPP
    k = mags.shape[1]
    if k < 2:
        return np.empty(0)
    if pairing is Pairing.CONSECUTIVE:
        return np.diff(np.sort(mags, axis=1), axis=1).ravel()
    i, j = np.triu_indices(k, 1)
    return np.abs(mags[:, i] - mags[:, j]).ravel()


# -- histograms --------------------------------------------------------------


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    underflow: int = 0
    overflow: int = 0
    normalization: float = 1.0

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        counts = np.asarray(self.counts, dtype=np.int64)
        if edges.ndim != 1 or len(edges) != len(counts) + 1:
            raise ContractViolation("need len(counts) == len(edges) - 1")
        if np.any(np.diff(edges) <= 0):
            raise ContractViolation("edges must be strictly ascending")
        if np.any(counts < 0):
            raise ContractViolation("counts must be nonnegative")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def n_all(self) -> int:
        return self.total + self.underflow + self.overflow

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def merge(self, other: "Histogram") -> "Histogram":
        if not np.array_equal(self.edges, other.edges):
            raise ContractViolation("cannot merge histograms with different edges")
        return Histogram(
            self.edges,
            self.counts + other.counts,
            self.underflow + other.underflow,
            self.overflow + other.overflow,
            self.normalization,
        )

    __add__ = merge


def build_histogram(
    values: Sequence[float],
    bins: int,
    range: Optional[tuple[float, float]] = None,
    normalization: float = 1.0,
) -> Histogram:
    """Uniform-bin histogram; values outside ``range`` go to under/overflow."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise EmptyDataError("cannot histogram an empty value list")
    if bins < 1:
        raise ContractViolation(f"bins must be >= 1, got {bins}")
    lo, hi = (float(v.min()), float(v.max())) if range is None else map(float, range)
    if hi <= lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, bins + 1)
    inside = (v >= lo) & (v <= hi)
    counts, _ = np.histogram(v[inside], bins=edges)
    return Histogram(
        edges, counts, int(np.sum(v < lo)), int(np.sum(v > hi)), normalization
    )


def density_normalize(
    h: Histogram, target_mass: float = 1.0, include_outliers: bool = False
) -> list[tuple[float, float]]:
    """``(center, density)`` rows integrating to ``target_mass``.

    With ``include_outliers`` the under/overflow tallies count toward the
    normalization, so the rows estimate the full-line density instead.
    """
    denom = h.n_all if include_outliers else h.total
    if h.total <= 0:
        raise EmptyDataError("histogram has no in-range counts")
    dens = target_mass * h.counts / (denom * h.widths)
    return list(zip(h.centers.tolist(), dens.tolist()))


# -- goodness of fit ---------------------------------------------------------


@dataclass
class GofReport:
    law: str
    n: int
    ks_statistic: Optional[float] = None
    ks_pvalue: Optional[float] = None
    chi2_statistic: Optional[float] = None
    chi2_pvalue: Optional[float] = None
    dof: Optional[int] = None
    threshold: Optional[float] = None
    passed: Optional[bool] = None
    label: str = ""
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def kolmogorov_sf(lam: float) -> float:
    """Asymptotic ``P(sqrt(n) D > lam)`` from the alternating Kolmogorov series."""
    if lam < 0.2:
        return 1.0
    k = np.arange(1, KS_SERIES_TERMS + 1)
    terms = (-1.0) ** (k - 1) * np.exp(-2.0 * k * k * lam * lam)
    return float(min(1.0, max(0.0, 2.0 * terms.sum())))


def ks_statistic(values: Sequence[float], law: AnalyticLaw) -> float:
    x = np.sort(np.asarray(values, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise EmptyDataError("KS test needs at least one value")
    f = np.asarray(cdf(law, x)) / law.total_mass
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def ks_test(values: Sequence[float], law: AnalyticLaw, threshold: float = 0.02) -> GofReport:
    """One-sample KS against ``law`` rescaled to unit mass; passes if ``D < threshold``."""
    x = np.asarray(values, dtype=float).ravel()
    d = ks_statistic(x, law)
    return GofReport(
        law=law.kind.value,
        n=int(x.size),
        ks_statistic=d,
        ks_pvalue=kolmogorov_sf(math.sqrt(x.size) * d),
        threshold=threshold,
        passed=d < threshold,
    )


def _pool(observed: np.ndarray, expected: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    obs_out, exp_out = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(observed, expected):
        o_acc += o
        e_acc += e
        if e_acc >= MIN_EXPECTED:
            obs_out.append(o_acc)
            exp_out.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0 or o_acc > 0:
        if obs_out:
            obs_out[-1] += o_acc
            exp_out[-1] += e_acc
        else:
            obs_out.append(o_acc)
            exp_out.append(e_acc)
    return np.array(obs_out), np.array(exp_out)


def chi_square_test(h: Histogram, law: AnalyticLaw, alpha: float = 1e-3) -> GofReport:
    """Pearson test of the bin counts (plus under/overflow cells) against ``law``.

    Adjacent cells are pooled until each expects at least 5 counts; passes
    if the p-value exceeds ``alpha``.
    """
    n = h.n_all
    f = np.asarray(cdf(law, h.edges)) / law.total_mass
    expected = n * np.concatenate([[f[0]], np.diff(f), [1.0 - f[-1]]])
    observed = np.concatenate([[h.underflow], h.counts, [h.overflow]]).astype(float)
    obs, exp = _pool(observed, np.maximum(expected, 0.0))
    if len(obs) < 2:
        raise InsufficientDataError(f"only {len(obs)} bins retained after pooling")
    stat = float(np.sum((obs - exp) ** 2 / exp))
    dof = len(obs) - 1
    p = float(sps.chi2.sf(stat, dof))
    return GofReport(
        law=law.kind.value,
        n=n,
        chi2_statistic=stat,
        chi2_pvalue=p,
        dof=dof,
        threshold=alpha,
        passed=p > alpha,
    )


def chi_square_two_sample(counts_a: np.ndarray, counts_b: np.ndarray, alpha: float = 1e-3) -> GofReport:
    """Homogeneity test of two histograms with identical binning (any shape).

    Cells whose pooled expectation falls below 5 in either sample are lumped
    into one remainder cell.
    """
    a = np.asarray(counts_a, dtype=float).ravel()
    b = np.asarray(counts_b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ContractViolation("histograms must share their binning")
    na, nb = a.sum(), b.sum()
    if na == 0 or nb == 0:
        raise EmptyDataError("both samples need counts")
    both = a + b
    small = np.minimum(na, nb) * both / (na + nb) < MIN_EXPECTED
    a = np.append(a[~small], a[small].sum())
    b = np.append(b[~small], b[small].sum())
    keep = (a + b) > 0
    a, b = a[keep], b[keep]
    if len(a) < 2:
        raise InsufficientDataError("fewer than 2 populated cells")
    both = a + b
    ea = na * both / (na + nb)
    eb = nb * both / (na + nb)
    stat = float(np.sum((a - ea) ** 2 / ea + (b - eb) ** 2 / eb))
    dof = len(a) - 1
    p = float(sps.chi2.sf(stat, dof))
    return GofReport(
        law="two-sample",
        n=int(na + nb),
        chi2_statistic=stat,
        chi2_pvalue=p,
        dof=dof,
        threshold=alpha,
        passed=p > alpha,
    )


def gof_report(
    values: Sequence[float],
    law: AnalyticLaw,
    bins: int = 60,
    range: Optional[tuple[float, float]] = None,
    ks_threshold: float = 0.02,
    label: str = "",
) -> GofReport:
    """KS and chi-square together; ``passed`` follows the KS gate."""
    x = np.asarray(values, dtype=float).ravel()
    rep = ks_test(x, law, ks_threshold)
    try:
        chi = chi_square_test(build_histogram(x, bins, range), law)
        rep.chi2_statistic, rep.chi2_pvalue, rep.dof = chi.chi2_statistic, chi.chi2_pvalue, chi.dof
    except InsufficientDataError:
        pass
    rep.label = label
    return rep
