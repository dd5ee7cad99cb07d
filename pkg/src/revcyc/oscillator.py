"""Screened harmonic oscillator whose ground-state density is the eigenvalue JPDF.

Hamiltonian on n coordinates::

    H = -Laplacian + A^2 x_1^2 + sum_{i>=2} (4 A^2 x_i^2 - 1 / (4 x_i^2))

with ground state ``Psi = prod_{i>=2} sqrt|x_i| exp(-A/2 (x_1^2 + 2 sum x_i^2))``
and energy ``(4n - 3) A``.  ``Psi^2`` has the same form as the joint
eigenvalue density of a ``(2n - 1)``-dimensional reverse-cyclic matrix with
``x_1 <-> E1`` and ``x_i <-> E_i``.

``harmonic=2`` switches to the even-order analogue (two unscreened
coordinates, energy ``(4n - 6) A``).  That mapping is an extrapolation and
is not used by the acceptance checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .ensemble import stream
from .errors import ContractViolation, InsufficientDataError, SingularPointError
from .laws import AnalyticLaw, LawKind
from .stats import GofReport, chi_square_two_sample, gof_report

MIN_MARGINAL_SAMPLES = 10_000


@dataclass(frozen=True)
class McmcConfig:
    """Metropolis settings. ``steps`` counts post-burn-in steps per chain."""

    steps: int = 20_000
    burn_in: int = 2_000
    thinning: int = 20
    proposal_std: Optional[float] = None  # default 0.5 / sqrt(A)
    seed: int = 0
    chains: int = 100

    def __post_init__(self):
        if self.steps < 1 or self.burn_in < 0 or self.thinning < 1 or self.chains < 1:
            raise ContractViolation("invalid MCMC settings")
        if self.proposal_std is not None and not self.proposal_std > 0:
            raise ContractViolation("proposal_std must be positive")


@dataclass(frozen=True)
class OscillatorConfig:
    n: int
    stiffness: float = 1.0
    fd_step: float = 1e-3
    exclusion_radius: float = 0.05
    mcmc: McmcConfig = field(default_factory=McmcConfig)
    harmonic: int = 1

    def __post_init__(self):
        if self.n < 2:
            raise ContractViolation(f"n must be >= 2, got {self.n}")
        if not self.stiffness > 0:
            raise ContractViolation("stiffness must be positive")
        if not (self.fd_step > 0 and self.exclusion_radius > 0):
            raise ContractViolation("fd_step and exclusion_radius must be positive")
        if self.fd_step > self.exclusion_radius / 10:
            raise ContractViolation("fd_step must not exceed exclusion_radius / 10")
        if self.harmonic not in (1, 2) or self.harmonic >= self.n:
            raise ContractViolation("harmonic must be 1, or 2 with n >= 3")

    @property
    def proposal_std(self) -> float:
        if self.mcmc.proposal_std is not None:
            return self.mcmc.proposal_std
        return 0.5 / math.sqrt(self.stiffness)

    @property
    def energy(self) -> float:
        return ground_state_energy(self.n, self.stiffness, self.harmonic)


def ground_state_energy(n: int, stiffness: float, harmonic: int = 1) -> float:
    return (harmonic + 4 * (n - harmonic)) * stiffness


def log_psi2(x: np.ndarray, stiffness: float, harmonic: int = 1) -> np.ndarray:
    """``log Psi^2`` for rows of ``x``; ``-inf`` on the singular hyperplanes."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    free, screened = x[:, :harmonic], x[:, harmonic:]
    with np.errstate(divide="ignore"):
        logs = np.sum(np.log(np.abs(screened)), axis=1)
    return logs - stiffness * (np.sum(free**2, axis=1) + 2.0 * np.sum(screened**2, axis=1))


def log_gaussian2(x: np.ndarray, stiffness: float, harmonic: int = 1) -> np.ndarray:
    """Same Gaussian factor as ``log_psi2`` without the ``|x_i|`` screening terms."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return -stiffness * (np.sum(x[:, :harmonic] ** 2, axis=1) + 2.0 * np.sum(x[:, harmonic:] ** 2, axis=1))


def ground_state_psi(x, stiffness: float, harmonic: int = 1) -> float:
    """Unnormalized ground state at a single point."""
    x = np.asarray(x, dtype=float)
    if np.any(x[harmonic:] == 0):
        raise SingularPointError("ground state is singular at x_i = 0 for screened coordinates")
    free, screened = x[:harmonic], x[harmonic:]
    return float(
        np.prod(np.sqrt(np.abs(screened)))
        * np.exp(-0.5 * stiffness * (np.sum(free**2) + 2.0 * np.sum(screened**2)))
    )


def potential(x, stiffness: float, harmonic: int = 1) -> float:
    x = np.asarray(x, dtype=float)
    a2 = stiffness * stiffness
    free, screened = x[:harmonic], x[harmonic:]
    return float(a2 * np.sum(free**2) + np.sum(4.0 * a2 * screened**2 - 0.25 / screened**2))


def local_energy(x, cfg: OscillatorConfig, step: Optional[float] = None) -> float:
    """``(H Psi)(x) / Psi(x)`` with a central-difference Laplacian."""
    x = np.asarray(x, dtype=float)
    if x.shape != (cfg.n,):
        raise ContractViolation(f"expected {cfg.n} coordinates")
    h = cfg.fd_step if step is None else step
    if np.any(np.abs(x[cfg.harmonic :]) < cfg.exclusion_radius):
        raise SingularPointError(
            f"screened coordinates must satisfy |x_i| >= {cfg.exclusion_radius}"
        )
    a = cfg.stiffness
    psi0 = ground_state_psi(x, a, cfg.harmonic)
    lap = 0.0
    for i in range(cfg.n):
        e = np.zeros(cfg.n)
        e[i] = h
        lap += ground_state_psi(x + e, a, cfg.harmonic) - 2.0 * psi0 + ground_state_psi(x - e, a, cfg.harmonic)
    lap /= h * h
    return -lap / psi0 + potential(x, a, cfg.harmonic)


def hamiltonian_residual(x, cfg: OscillatorConfig, step: Optional[float] = None) -> float:
    """Relative deviation of the local energy from the ground-state energy."""
    target = cfg.energy
    return abs(local_energy(x, cfg, step) - target) / target


def admissible_points(cfg: OscillatorConfig, count: int, seed: int = 0, margin: float = 0.5) -> np.ndarray:
    """Random test points with every screened ``|x_i|`` in ``[margin, 3 margin]``.

    The free coordinates are uniform on ``[-3 margin, 3 margin]``; ``margin``
    is in units of ``1/sqrt(A)``.
    """
    rng = stream(seed, cfg.n)
    scale = margin / math.sqrt(cfg.stiffness)
    scale = max(scale, cfg.exclusion_radius)
    pts = rng.uniform(-3 * scale, 3 * scale, size=(count, cfg.n))
    mag = rng.uniform(scale, 3 * scale, size=(count, cfg.n - cfg.harmonic))
    sign = np.where(rng.random(mag.shape) < 0.5, -1.0, 1.0)
    pts[:, cfg.harmonic :] = sign * mag
    return pts


# -- Metropolis sampling -----------------------------------------------------


@dataclass(frozen=True)
class McmcResult:
    samples: np.ndarray  # (retained, n), chain-major
    acceptance_rate: float
    chains: int


def mcmc_ground_state(
    cfg: OscillatorConfig,
    log_density: Optional[Callable[[np.ndarray, float, int], np.ndarray]] = None,
) -> McmcResult:
    """Random-walk Metropolis chains targeting ``Psi^2`` (or ``log_density``).

    Chains advance in lockstep; chain ``c`` takes its proposals and
    acceptance draws from substream ``c`` of the configured seed, so results
    depend only on the config. Proposals landing on a singular hyperplane
    have zero target density and are rejected.
    """
    logp = log_psi2 if log_density is None else log_density
    m = cfg.mcmc
    a, n, k = cfg.stiffness, cfg.n, m.chains
    sigma = cfg.proposal_std
    gens = [stream(m.seed, c) for c in range(k)]

    x = np.zeros((k, n))
    x[:, cfg.harmonic :] = 0.5 / math.sqrt(a)
    lp = logp(x, a, cfg.harmonic)
    total = m.burn_in + m.steps
    keep = m.steps // m.thinning
    out = np.empty((k, keep, n))
    accepted = 0
    block = 1024
    t = 0
    while t < total:
        b = min(block, total - t)
        noise = np.stack([g.standard_normal((b, n)) for g in gens], axis=1) * sigma
        logu = np.log(np.stack([g.random(b) for g in gens], axis=1))
        for j in range(b):
            prop = x + noise[j]
            lq = logp(prop, a, cfg.harmonic)
            acc = logu[j] < lq - lp
            x = np.where(acc[:, None], prop, x)
            lp = np.where(acc, lq, lp)
            step = t + j
            if step >= m.burn_in:
                accepted += int(acc.sum())
                s = step - m.burn_in + 1
                if s % m.thinning == 0 and s // m.thinning <= keep:
                    out[:, s // m.thinning - 1] = x
        t += b
    rate = accepted / (m.steps * k)
    return McmcResult(out.reshape(k * keep, n), rate, k)


def marginal_report(samples: np.ndarray, cfg: OscillatorConfig, ks_threshold: float = 0.02) -> list[GofReport]:
    """Goodness of fit of coordinate marginals and inter-coordinate spacings.

    Free coordinates are compared with the trivial density and screened ones
    with the nontrivial density; ``|x_1 - x_i|``, ``2|x_i|`` and
    ``||x_i| - |x_j|||`` with the S12, S23 and Spp laws.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 2 or x.shape[0] < MIN_MARGINAL_SAMPLES:
        raise InsufficientDataError(
            f"need at least {MIN_MARGINAL_SAMPLES} samples, got {0 if x.ndim != 2 else x.shape[0]}"
        )
    a, h = cfg.stiffness, cfg.harmonic
    law = lambda kind: AnalyticLaw(kind, a)
    reports = []
    for i in range(x.shape[1]):
        kind = LawKind.TRIVIAL_DENSITY if i < h else LawKind.NONTRIVIAL_DENSITY
        reports.append(gof_report(x[:, i], law(kind), ks_threshold=ks_threshold, label=f"x{i + 1}"))
    for i in range(h, x.shape[1]):
        reports.append(
            gof_report(np.abs(x[:, 0] - x[:, i]), law(LawKind.SPACING_S12), ks_threshold=ks_threshold, label=f"|x1-x{i + 1}|")
        )
        reports.append(
            gof_report(2.0 * np.abs(x[:, i]), law(LawKind.SPACING_S23), ks_threshold=ks_threshold, label=f"2|x{i + 1}|")
        )
    for i in range(h, x.shape[1]):
        for j in range(i + 1, x.shape[1]):
            reports.append(
                gof_report(
                    np.abs(np.abs(x[:, i]) - np.abs(x[:, j])),
                    law(LawKind.SPACING_SPP),
                    ks_threshold=ks_threshold,
                    label=f"||x{i + 1}|-|x{j + 1}||",
                )
            )
    return reports


def dictionary_check(
    samples: np.ndarray,
    trivial: np.ndarray,
    magnitude: np.ndarray,
    bins: int = 12,
    alpha: float = 1e-3,
) -> GofReport:
    """Two-sample chi-square of ``(x_1, |x_2|)`` against ``(E1, |E2|)`` joint histograms."""
    x = np.asarray(samples, dtype=float)
    lo1 = min(x[:, 0].min(), trivial.min())
    hi1 = max(x[:, 0].max(), trivial.max())
    hi2 = max(np.abs(x[:, 1]).max(), magnitude.max())
    edges = (np.linspace(lo1, hi1, bins + 1), np.linspace(0.0, hi2, bins + 1))
    ha, _, _ = np.histogram2d(x[:, 0], np.abs(x[:, 1]), bins=edges)
    hb, _, _ = np.histogram2d(trivial, magnitude, bins=edges)
    rep = chi_square_two_sample(ha, hb, alpha)
    rep.label = "(x1,|x2|) vs (E1,|E2|)"
    return rep
