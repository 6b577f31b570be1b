"""Public-moment transformation and norm truncation of private samples.

The pipeline whitens private rows by the inverse square root of a public
second-moment matrix, then clips any row whose Euclidean norm reaches the
radius sqrt(d (1 + ln(2n/eta))).  For well-matched public data the
transformed rows are near-isotropic and the clip almost never fires.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectra import SymmetricMatrix, inv_sqrt

__all__ = [
    "TruncationPolicy",
    "TruncationReport",
    "transform",
    "truncate",
    "scalar_policy",
    "pmt_pipeline",
]


def truncation_radius(d: int, n: int, eta: float) -> float:
    return math.sqrt(d * (1.0 + math.log(2.0 * n / eta)))


@dataclass(frozen=True)
class TruncationPolicy:
    """Norm-clipping policy: radius sqrt(d (1 + ln(2n/eta)))."""

    dim: int
    n: int
    eta: float

    def __post_init__(self):
        if self.dim < 1 or self.n < 1:
            raise ValueError("dim and n must be positive")
        if not (0.0 < self.eta < 1.0):
            raise ValueError(f"eta must lie in (0, 1), got {self.eta}")

    @property
    def radius(self) -> float:
        return truncation_radius(self.dim, self.n, self.eta)


@dataclass(frozen=True)
class TruncationReport:
    """Empirical witness of how often the clip fired."""

    total: int
    truncated: int
    max_norm_seen: float

    def __post_init__(self):
        if not (0 <= self.truncated <= self.total):
            raise ValueError("truncated count out of range")

    @property
    def fraction(self) -> float:
        return self.truncated / self.total if self.total else 0.0


def transform(samples: np.ndarray, preconditioner_inv_sqrt: SymmetricMatrix) -> np.ndarray:
    """Apply the whitening map row-wise: row_i -> P @ row_i.

    P is symmetric, so this is samples @ P.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2:
        raise ValueError(f"expected an n x d sample matrix, got shape {samples.shape}")
    if samples.shape[1] != preconditioner_inv_sqrt.dim:
        raise ValueError(
            f"dimension mismatch: samples have d={samples.shape[1]}, "
            f"preconditioner is {preconditioner_inv_sqrt.dim}x{preconditioner_inv_sqrt.dim}"
        )
    return samples @ preconditioner_inv_sqrt.entries


def clip_rows(samples: np.ndarray, radius: float):
    """Clip rows with norm >= radius back onto the radius sphere.

    Rows strictly inside the radius pass through bit-exactly; clipped rows
    keep their direction.  Returns (clipped samples, TruncationReport).
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2:
        raise ValueError(f"expected an n x d matrix, got shape {samples.shape}")
    norms = np.linalg.norm(samples, axis=1)
    over = norms >= radius
    out = samples.copy()
    if np.any(over):
        out[over] = samples[over] * (radius / norms[over])[:, None]
    report = TruncationReport(
        total=samples.shape[0],
        truncated=int(np.count_nonzero(over)),
        max_norm_seen=float(norms.max(initial=0.0)),
    )
    return out, report


def truncate(samples: np.ndarray, policy: TruncationPolicy):
    """Clip rows against the policy radius; see :func:`clip_rows`."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[1] != policy.dim:
        raise ValueError(
            f"expected an n x {policy.dim} matrix, got shape {samples.shape}"
        )
    return clip_rows(samples, policy.radius)


def scalar_policy(n: int, eta: float) -> TruncationPolicy:
    """The d = 1 policy used for response values."""
    return TruncationPolicy(dim=1, n=n, eta=eta)


def pmt_pipeline(samples: np.ndarray, public_moment: SymmetricMatrix, eta: float):
    """Whiten by the public moment's inverse square root, then clip.

    Equivalent to truncate(transform(samples, inv_sqrt(public_moment)),
    TruncationPolicy(d, n, eta)).
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2:
        raise ValueError(f"expected an n x d sample matrix, got shape {samples.shape}")
    n, d = samples.shape
    pre = inv_sqrt(public_moment)
    policy = TruncationPolicy(dim=d, n=n, eta=eta)
    return truncate(transform(samples, pre), policy)
