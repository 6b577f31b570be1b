"""zCDP accounting and sensitivity-calibrated Gaussian mechanisms.

Noise scales follow the Gaussian mechanism: a statistic with L2 sensitivity
Delta released with per-coordinate std Delta / sqrt(2 rho) satisfies
rho-zCDP.  Composition adds the rho values; conversion to (eps, delta)-DP
uses eps = rho + 2 sqrt(rho ln(1/delta)).

All logs are natural.  All sampling takes an explicit numpy Generator so
every mechanism is a pure function of (parameters, stream state).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spectra import SymmetricMatrix

__all__ = [
    "PrivacyBudget",
    "DpGuarantee",
    "NoiseScales",
    "BudgetLedger",
    "zcdp_to_dp",
    "matrix_noise_scale",
    "vector_noise_scale",
    "sample_symmetric_gaussian",
    "sample_gaussian_vector",
    "compose",
]


@dataclass(frozen=True)
class PrivacyBudget:
    """A zCDP budget, parameterized by rho > 0."""

    rho: float

    def __post_init__(self):
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise ValueError(f"rho must be a positive finite real, got {self.rho}")


@dataclass(frozen=True)
class DpGuarantee:
    epsilon: float
    delta: float


@dataclass(frozen=True)
class NoiseScales:
    """Matrix-entry std (sigma1) and vector-coordinate std (sigma2)."""

    sigma1: float
    sigma2: float


@dataclass(frozen=True)
class BudgetLedger:
    """Append-only record of rho spent, labelled per statistic."""

    entries: tuple = ()

    @property
    def total(self) -> float:
        return sum(rho for _, rho in self.entries)


def compose(ledger: BudgetLedger, label: str, rho: float) -> BudgetLedger:
    """Return a new ledger with (label, rho) appended; rho values add."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    return BudgetLedger(entries=ledger.entries + ((label, float(rho)),))


def zcdp_to_dp(budget: PrivacyBudget, delta: float) -> DpGuarantee:
    """Convert rho-zCDP to an (epsilon, delta)-DP guarantee."""
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    rho = budget.rho
    eps = rho + 2.0 * math.sqrt(rho * math.log(1.0 / delta))
    return DpGuarantee(epsilon=eps, delta=delta)


def _check_scale_args(d: int, n: int, eta: float):
    if d < 1 or n < 1:
        raise ValueError("d and n must be positive integers")
    if not (0.0 < eta < 1.0):
        raise ValueError(f"eta must lie in (0, 1), got {eta}")


def matrix_noise_scale(d: int, n: int, eta: float, budget: PrivacyBudget) -> float:
    """Per-entry std for privatizing the truncated second-moment matrix.

    The Frobenius sensitivity of the truncated statistic is
    2 d (1 + ln(2n/eta)) / n, giving sigma = Delta / sqrt(2 rho).
    """
    _check_scale_args(d, n, eta)
    return 2.0 * d * (1.0 + math.log(2.0 * n / eta)) / (math.sqrt(2.0 * budget.rho) * n)


def vector_noise_scale(d: int, n: int, eta: float, budget: PrivacyBudget) -> float:
    """Per-coordinate std for privatizing the truncated cross moment."""
    _check_scale_args(d, n, eta)
    return (
        2.0 * math.sqrt(d) * (1.0 + math.log(2.0 * n / eta))
        / (math.sqrt(2.0 * budget.rho) * n)
    )


def sample_symmetric_gaussian(
    d: int, sigma: float, rng: np.random.Generator
) -> SymmetricMatrix:
    """Symmetric noise matrix with every entry (diagonal included) N(0, sigma^2).

    The upper triangle is drawn i.i.d. and mirrored, so the output equals its
    transpose bit-exactly.  sigma = 0 returns the zero matrix (zero-noise hook).
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0.0:
        return SymmetricMatrix(np.zeros((d, d)))
    upper = np.zeros((d, d))
    iu = np.triu_indices(d)
    upper[iu] = rng.normal(0.0, sigma, size=len(iu[0]))
    return SymmetricMatrix(upper + np.triu(upper, k=1).T)


def sample_gaussian_vector(d: int, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """N(0, sigma^2 I) draw in R^d; sigma = 0 returns zeros."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0.0:
        return np.zeros(d)
    return rng.normal(0.0, sigma, size=d)
