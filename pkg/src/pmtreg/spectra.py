"""Spectral utilities for symmetric matrices.

Everything downstream (preconditioning, noisy-matrix inversion, condition
diagnostics) is built on the eigendecomposition of a symmetric matrix, so
this module owns the symmetrization convention and all matrix functions
derived from the spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SymmetricMatrix",
    "SpectralDiagnostics",
    "TheoryBounds",
    "SingularMatrixError",
    "InsufficientPublicDataError",
    "eig_sym",
    "inv_sqrt",
    "inv_sqrt_clamped",
    "sqrt_sym",
    "diagnostics",
    "theory_bracket",
    "stable_inverse",
]


class SingularMatrixError(ValueError):
    """Raised when a matrix is too close to singular to invert."""

    def __init__(self, msg, lambda_min=None, lambda_max=None):
        super().__init__(msg)
        self.lambda_min = lambda_min
        self.lambda_max = lambda_max


class InsufficientPublicDataError(ValueError):
    """Raised when the public sample count does not exceed the dimension."""


def _mirror_upper(a: np.ndarray) -> np.ndarray:
    # Copy the upper triangle onto the lower one so entries match bit-exactly.
    out = np.triu(a) + np.triu(a, k=1).T
    return out


@dataclass(frozen=True)
class SymmetricMatrix:
    """A d x d real symmetric matrix, symmetrized on construction.

    The input is replaced by (M + M^T)/2 and then the upper triangle is
    mirrored so that entries[i, j] == entries[j, i] bit-exactly.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        a = _mirror_upper((a + a.T) / 2.0)
        a.flags.writeable = False
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, d: int) -> "SymmetricMatrix":
        return cls(np.eye(d))

    @classmethod
    def diag(cls, values) -> "SymmetricMatrix":
        return cls(np.diag(np.asarray(values, dtype=np.float64)))


@dataclass(frozen=True)
class SpectralDiagnostics:
    """Condition-number diagnostics of a symmetric matrix.

    ``avg_cond`` is the averaged condition number: the mean of
    lambda_i / lambda_min over the spectrum.  When lambda_min <= 0 both
    condition numbers are reported as +inf.
    """

    eigenvalues: np.ndarray
    trace: float
    avg_trace: float
    lambda_min: float
    lambda_max: float
    cond: float
    avg_cond: float

    def as_dict(self) -> dict:
        return {
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "trace": self.trace,
            "avg_trace": self.avg_trace,
            "lambda_min": self.lambda_min,
            "lambda_max": self.lambda_max,
            "cond": self.cond,
            "avg_cond": self.avg_cond,
        }


@dataclass(frozen=True)
class TheoryBounds:
    """Two-sided spectral bracket for the preconditioned second moment.

    With n_pub public samples in dimension d and failure probability eta,
    the preconditioned population second moment lies in [L, U] in the
    Loewner order with high probability.  Diagnostic only; all
    unspecified constants are taken as 1.
    """

    lower_L: float
    upper_U: float
    n_pub: int
    eta: float


def eig_sym(m: SymmetricMatrix):
    """Eigendecomposition, eigenvalues ascending, eigenvectors as columns."""
    lam, vec = np.linalg.eigh(m.entries)
    return lam, vec


def inv_sqrt_clamped(m: SymmetricMatrix, floor: float | None = None):
    """Inverse square root with eigenvalue clamping.

    Eigenvalues below ``floor`` (default 1e-10 * lambda_max) are clamped up
    to it before taking lambda^{-1/2}; the number of clamped eigenvalues is
    returned so callers can record it in provenance.

    Returns:
        (SymmetricMatrix, clamped_count)
    """
    lam, vec = eig_sym(m)
    lam_max = lam[-1]
    if lam_max <= 0:
        raise SingularMatrixError(
            "all eigenvalues nonpositive; matrix has no inverse square root",
            lambda_min=float(lam[0]),
            lambda_max=float(lam_max),
        )
    if floor is None:
        floor = 1e-10 * lam_max
    if floor <= 0:
        raise ValueError("floor must be positive")
    clamped = int(np.sum(lam < floor))
    lam_eff = np.maximum(lam, floor)
    out = (vec * lam_eff ** -0.5) @ vec.T
    return SymmetricMatrix(out), clamped


def inv_sqrt(m: SymmetricMatrix, floor: float | None = None) -> SymmetricMatrix:
    """Inverse matrix square root; see :func:`inv_sqrt_clamped`."""
    return inv_sqrt_clamped(m, floor)[0]


def sqrt_sym(m: SymmetricMatrix) -> SymmetricMatrix:
    """Symmetric PSD square root via the eigendecomposition."""
    lam, vec = eig_sym(m)
    lam_max = max(lam[-1], 0.0)
    if lam[0] < -1e-10 * lam_max:
        raise ValueError(
            f"matrix is not PSD: lambda_min={lam[0]:.3e} vs lambda_max={lam_max:.3e}"
        )
    lam = np.maximum(lam, 0.0)
    out = (vec * np.sqrt(lam)) @ vec.T
    return SymmetricMatrix(out)


def diagnostics(m: SymmetricMatrix) -> SpectralDiagnostics:
    """Eigenvalue-based conditioning summary of a symmetric matrix."""
    lam, _ = eig_sym(m)
    d = m.dim
    lam_min = float(lam[0])
    lam_max = float(lam[-1])
    trace = float(np.sum(lam))
    if lam_min > 0:
        cond = lam_max / lam_min
        avg_cond = float(np.mean(lam / lam_min))
    else:
        cond = np.inf
        avg_cond = np.inf
    return SpectralDiagnostics(
        eigenvalues=lam,
        trace=trace,
        avg_trace=trace / d,
        lambda_min=lam_min,
        lambda_max=lam_max,
        cond=cond,
        avg_cond=avg_cond,
    )


def theory_bracket(d: int, n_pub: int, eta: float) -> TheoryBounds:
    """Lower/upper spectral bounds L, U for the preconditioned second moment.

    L = n / (sqrt(n) + sqrt(d) + sqrt(2 ln(1/eta)))^2 and U with a minus in
    the denominator; U is +inf when the denominator is nonpositive.
    """
    if not (0.0 < eta < 1.0):
        raise ValueError("eta must lie in (0, 1)")
    if n_pub <= d:
        raise InsufficientPublicDataError(
            f"need n_pub > d, got n_pub={n_pub}, d={d}"
        )
    slack = np.sqrt(d) + np.sqrt(2.0 * np.log(1.0 / eta))
    lower = n_pub / (np.sqrt(n_pub) + slack) ** 2
    denom = np.sqrt(n_pub) - slack
    upper = n_pub / denom**2 if denom > 0 else np.inf
    return TheoryBounds(lower_L=float(lower), upper_U=float(upper), n_pub=n_pub, eta=eta)


def stable_inverse(m: SymmetricMatrix) -> SymmetricMatrix:
    """Inverse of an SPD matrix through its eigendecomposition.

    Never forms cofactors; raises SingularMatrixError (carrying both extreme
    eigenvalues) when lambda_min <= 1e-12 * lambda_max.
    """
    lam, vec = eig_sym(m)
    lam_min, lam_max = float(lam[0]), float(lam[-1])
    if lam_min <= 1e-12 * lam_max or lam_min <= 0:
        raise SingularMatrixError(
            f"matrix numerically singular: lambda_min={lam_min:.3e}, "
            f"lambda_max={lam_max:.3e}",
            lambda_min=lam_min,
            lambda_max=lam_max,
        )
    out = (vec / lam) @ vec.T
    return SymmetricMatrix(out)
