"""OLS estimators: non-private, sufficient-statistics DP baseline, and the
public-moment-preconditioned DP variant.

The DP estimators privatize the two sufficient statistics (X^T X / n and
X^T y / n) with the Gaussian mechanism and solve the perturbed normal
equations.  The preconditioned variant first whitens private rows by the
public second-moment matrix, which shrinks both the truncation radius and
the condition number of the matrix being inverted, then undoes the change
of variables on the solved coefficients.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import pmt
from .privacy import (
    BudgetLedger,
    PrivacyBudget,
    compose,
    matrix_noise_scale,
    sample_gaussian_vector,
    sample_symmetric_gaussian,
    vector_noise_scale,
)
from .spectra import (
    SingularMatrixError,
    SpectralDiagnostics,
    SymmetricMatrix,
    TheoryBounds,
    diagnostics,
    inv_sqrt_clamped,
)

__all__ = [
    "Method",
    "LabeledDataset",
    "PublicMoments",
    "EstimatorOutput",
    "UnstableInversionError",
    "olse",
    "dp_pmt_second_moment",
    "dp_pmtolse",
    "dp_olse_baseline",
    "stability_ratio",
]


class Method(enum.Enum):
    OLSE = "OLSE"
    DP_OLSE = "DP_OLSE"
    DP_PMTOLSE = "DP_PMTOLSE"


class UnstableInversionError(RuntimeError):
    """The noisy second-moment matrix is numerically singular."""

    def __init__(self, msg, post_diag: SpectralDiagnostics | None = None):
        super().__init__(msg)
        self.post_diag = post_diag


@dataclass(frozen=True)
class LabeledDataset:
    """A design matrix with its response vector."""

    features: np.ndarray
    responses: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.responses, dtype=np.float64)
        if x.ndim != 2:
            raise ValueError(f"features must be an n x d matrix, got shape {x.shape}")
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise ValueError(
                f"responses must be a vector of length {x.shape[0]}, got shape {y.shape}"
            )
        if x.shape[0] < 1 or x.shape[1] < 1:
            raise ValueError("need n >= 1 and d >= 1")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "responses", y)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class PublicMoments:
    """Public second moments used as the preconditioner.

    feature_moment is B^T B / n_B; response_moment is sqrt(mean(y_B^2)).
    """

    feature_moment: SymmetricMatrix
    response_moment: float
    n_pub: int

    def __post_init__(self):
        if self.response_moment < 0:
            raise ValueError("response_moment must be nonnegative")
        if self.n_pub < 1:
            raise ValueError("n_pub must be positive")


@dataclass(frozen=True)
class EstimatorOutput:
    """A coefficient estimate plus its provenance."""

    beta: np.ndarray
    method: Method
    rho_total: float
    feature_truncation: pmt.TruncationReport
    response_truncation: pmt.TruncationReport
    pre_diag: SpectralDiagnostics
    post_diag: SpectralDiagnostics
    clamp_count: int
    ledger: BudgetLedger = BudgetLedger()
    notes: tuple = ()

    def __post_init__(self):
        if (self.rho_total == 0.0) != (self.method is Method.OLSE):
            raise ValueError("rho_total must be zero exactly for the non-DP OLSE")


def _solve_normal_equations(
    second_moment: np.ndarray, cross_moment: np.ndarray
) -> np.ndarray:
    # symmetric-indefinite solve; the noisy matrix need not be PSD
    return scipy.linalg.solve(second_moment, cross_moment, assume_a="sym")


def _guard_invertible(m: SymmetricMatrix) -> SpectralDiagnostics:
    """Spectral guard for solving against a (possibly indefinite) matrix."""
    diag = diagnostics(m)
    abs_eigs = np.abs(diag.eigenvalues)
    if abs_eigs.min() <= 1e-12 * abs_eigs.max():
        raise UnstableInversionError(
            f"noisy second moment numerically singular: |lambda| range "
            f"[{abs_eigs.min():.3e}, {abs_eigs.max():.3e}]",
            post_diag=diag,
        )
    return diag


def olse(data: LabeledDataset) -> EstimatorOutput:
    """Plain ordinary least squares via the normal equations."""
    x, y, n = data.features, data.responses, data.n
    second = SymmetricMatrix(x.T @ x / n)
    diag = diagnostics(second)
    if diag.lambda_min <= 1e-12 * diag.lambda_max:
        raise SingularMatrixError(
            f"singular design: lambda_min={diag.lambda_min:.3e}, "
            f"lambda_max={diag.lambda_max:.3e}",
            lambda_min=diag.lambda_min,
            lambda_max=diag.lambda_max,
        )
    beta = _solve_normal_equations(second.entries, x.T @ y / n)
    norms = np.linalg.norm(x, axis=1)
    no_trunc = pmt.TruncationReport(total=n, truncated=0, max_norm_seen=float(norms.max()))
    resp_report = pmt.TruncationReport(
        total=n, truncated=0, max_norm_seen=float(np.abs(y).max())
    )
    return EstimatorOutput(
        beta=beta,
        method=Method.OLSE,
        rho_total=0.0,
        feature_truncation=no_trunc,
        response_truncation=resp_report,
        pre_diag=diag,
        post_diag=diag,
        clamp_count=0,
    )


def dp_pmt_second_moment(
    samples: np.ndarray,
    public_moment: SymmetricMatrix,
    eta: float,
    budget: PrivacyBudget,
    rng: np.random.Generator,
    zero_noise: bool = False,
):
    """Privatized second moment of preconditioned, truncated samples.

    Returns (noisy second-moment matrix, truncation report).  Spends rho.
    """
    samples = np.asarray(samples, dtype=np.float64)
    n, d = samples.shape
    clipped, report = pmt.pmt_pipeline(samples, public_moment, eta)
    stat = clipped.T @ clipped / n
    sigma = 0.0 if zero_noise else matrix_noise_scale(d, n, eta, budget)
    noise = sample_symmetric_gaussian(d, sigma, rng)
    return SymmetricMatrix(stat + noise.entries), report


def dp_pmtolse(
    data: LabeledDataset,
    public: PublicMoments,
    eta: float,
    budget_per_stat: PrivacyBudget,
    rng: np.random.Generator,
    zero_noise: bool = False,
) -> EstimatorOutput:
    """DP least squares with public-moment preconditioning.

    Whitens features by the public feature moment and rescales responses by
    the public response moment, clips both, privatizes the two sufficient
    statistics (rho each, 2 rho total), solves the noisy normal equations in
    the whitened coordinates, and maps the solution back.

    ``zero_noise`` is a test hook that forces both noise scales to zero; it
    must never be set on a privacy-claiming path.
    """
    if public.n_pub <= data.d:
        raise ValueError(
            f"need n_pub > d for the preconditioner, got n_pub={public.n_pub}, d={data.d}"
        )
    if data.n <= data.d:
        raise ValueError(f"need n > d private samples, got n={data.n}, d={data.d}")
    if public.response_moment <= 0:
        raise ValueError("response_moment must be positive to rescale responses")
    n, d = data.n, data.d
    rho = budget_per_stat.rho

    pre, clamp_count = inv_sqrt_clamped(public.feature_moment)
    feat_policy = pmt.TruncationPolicy(dim=d, n=n, eta=eta)
    a_tilde, feat_report = pmt.truncate(pmt.transform(data.features, pre), feat_policy)

    resp_policy = pmt.scalar_policy(n, eta)
    y_scaled = (data.responses / public.response_moment)[:, None]
    y_tilde, resp_report = pmt.truncate(y_scaled, resp_policy)
    y_tilde = y_tilde[:, 0]

    second = SymmetricMatrix(a_tilde.T @ a_tilde / n)
    cross = a_tilde.T @ y_tilde / n
    pre_diag = diagnostics(second)

    sigma1 = 0.0 if zero_noise else matrix_noise_scale(d, n, eta, budget_per_stat)
    sigma2 = 0.0 if zero_noise else vector_noise_scale(d, n, eta, budget_per_stat)
    noise_mat = sample_symmetric_gaussian(d, sigma1, rng)
    noise_vec = sample_gaussian_vector(d, sigma2, rng)

    noisy_second = SymmetricMatrix(second.entries + noise_mat.entries)
    post_diag = _guard_invertible(noisy_second)
    beta_tilde = _solve_normal_equations(noisy_second.entries, cross + noise_vec)
    beta = public.response_moment * (pre.entries @ beta_tilde)

    ledger = compose(BudgetLedger(), "second_moment", rho)
    ledger = compose(ledger, "cross_moment", rho)
    return EstimatorOutput(
        beta=beta,
        method=Method.DP_PMTOLSE,
        rho_total=ledger.total,
        feature_truncation=feat_report,
        response_truncation=resp_report,
        pre_diag=pre_diag,
        post_diag=post_diag,
        clamp_count=clamp_count,
        ledger=ledger,
    )


def dp_olse_baseline(
    data: LabeledDataset,
    eta: float,
    budget_per_stat: PrivacyBudget,
    rng: np.random.Generator,
    zero_noise: bool = False,
) -> EstimatorOutput:
    """Private-data-only DP least squares baseline.

    Truncation radii and noise scales are driven by the trace of the raw
    private second moment and the raw response second moment; both are
    computed from the untruncated private data without privatization, which
    is this baseline's known caveat (recorded in ``notes``).
    """
    if data.n <= data.d:
        raise ValueError(f"need n > d private samples, got n={data.n}, d={data.d}")
    n, d = data.n, data.d
    rho = budget_per_stat.rho
    log_term = math.log(2.0 * n / eta)
    if not (0.0 < eta < 1.0):
        raise ValueError(f"eta must lie in (0, 1), got {eta}")

    trace_a = float(np.sum(data.features**2)) / n
    sigma_a_sq = float(np.mean(data.responses**2))
    feat_radius = math.sqrt(trace_a + d * log_term)
    resp_radius = math.sqrt(sigma_a_sq + log_term)

    a_clip, feat_report = pmt.clip_rows(data.features, feat_radius)
    y_clip, resp_report = pmt.clip_rows(data.responses[:, None], resp_radius)
    y_clip = y_clip[:, 0]

    second = SymmetricMatrix(a_clip.T @ a_clip / n)
    cross = a_clip.T @ y_clip / n
    pre_diag = diagnostics(second)

    if zero_noise:
        sigma1 = sigma2 = 0.0
    else:
        sigma1 = 2.0 * (trace_a + d * log_term) / (math.sqrt(2.0 * rho) * n)
        sigma2 = (
            2.0
            * math.sqrt((trace_a + d * log_term) * (sigma_a_sq + log_term))
            / (math.sqrt(2.0 * rho) * n)
        )
    noise_mat = sample_symmetric_gaussian(d, sigma1, rng)
    noise_vec = sample_gaussian_vector(d, sigma2, rng)

    noisy_second = SymmetricMatrix(second.entries + noise_mat.entries)
    post_diag = _guard_invertible(noisy_second)
    beta = _solve_normal_equations(noisy_second.entries, cross + noise_vec)

    ledger = compose(BudgetLedger(), "second_moment", rho)
    ledger = compose(ledger, "cross_moment", rho)
    return EstimatorOutput(
        beta=beta,
        method=Method.DP_OLSE,
        rho_total=ledger.total,
        feature_truncation=feat_report,
        response_truncation=resp_report,
        pre_diag=pre_diag,
        post_diag=post_diag,
        clamp_count=0,
        ledger=ledger,
        notes=("truncation radii derived from unprivatized private moments",),
    )


def stability_ratio(
    d: int,
    n_priv: int,
    eta: float,
    budget: PrivacyBudget,
    bounds: TheoryBounds,
) -> float:
    """Diagnostic ratio for the noisy-inverse stability condition.

    Values <= 0.5 indicate the regime where the perturbed second moment is
    provably invertible with high probability.  Returns +inf when the
    finite-sample correction factor is nonpositive.
    """
    if not math.isfinite(bounds.lower_L):
        raise ValueError("bounds must be finite")
    correction = 1.0 - (math.sqrt(d) + math.sqrt(math.log(1.0 / eta))) / math.sqrt(n_priv)
    if correction <= 0:
        return math.inf
    numerator = d**1.5 * (1.0 + math.log(2.0 * n_priv / eta)) * math.log(1.0 / eta)
    denominator = math.sqrt(budget.rho) * n_priv * bounds.lower_L * correction**2
    return numerator / denominator
