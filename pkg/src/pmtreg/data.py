"""Synthetic data generation, CSV ingestion, normalization, and splitting."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .estimators import LabeledDataset, PublicMoments
from .spectra import SymmetricMatrix, sqrt_sym

__all__ = [
    "SyntheticModelSpec",
    "SplitSpec",
    "SplitMode",
    "NormalizationRecord",
    "CsvParseError",
    "generate",
    "default_synthetic",
    "ingest_csv",
    "normalize",
    "split",
    "public_moments",
]


class CsvParseError(ValueError):
    pass


class SplitMode(Enum):
    RANDOM_WITHOUT_REPLACEMENT = "random"
    HEAD_TAIL = "head"


@dataclass(frozen=True)
class SyntheticModelSpec:
    """Linear model x ~ N(mean, covariance), y = x . beta + N(0, noise_std^2).

    ``coefficients`` may be None, meaning the caller samples beta (standard
    normal) once per experiment.  The implied feature second moment is
    covariance + mean mean^T.
    """

    d: int
    mean: np.ndarray
    covariance: SymmetricMatrix
    coefficients: np.ndarray | None = None
    noise_std: float = 0.05

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        if mean.shape != (self.d,):
            raise ValueError(f"mean must have shape ({self.d},), got {mean.shape}")
        if self.covariance.dim != self.d:
            raise ValueError("covariance dimension does not match d")
        if self.coefficients is not None:
            coef = np.asarray(self.coefficients, dtype=np.float64)
            if coef.shape != (self.d,):
                raise ValueError(f"coefficients must have shape ({self.d},)")
            object.__setattr__(self, "coefficients", coef)
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")
        object.__setattr__(self, "mean", mean)

    def second_moment(self) -> SymmetricMatrix:
        return SymmetricMatrix(self.covariance.entries + np.outer(self.mean, self.mean))

    def with_coefficients(self, beta: np.ndarray) -> "SyntheticModelSpec":
        return SyntheticModelSpec(
            d=self.d,
            mean=self.mean,
            covariance=self.covariance,
            coefficients=beta,
            noise_std=self.noise_std,
        )


@dataclass(frozen=True)
class SplitSpec:
    n_pub: int
    n_priv: int
    seed: int
    mode: SplitMode = SplitMode.RANDOM_WITHOUT_REPLACEMENT

    def __post_init__(self):
        if self.n_pub < 1 or self.n_priv < 1:
            raise ValueError("split sizes must be positive")


@dataclass(frozen=True)
class NormalizationRecord:
    """Per-column shift/scale allowing exact inversion of normalize()."""

    feature_shift: np.ndarray
    feature_scale: np.ndarray
    response_shift: float
    response_scale: float


def generate(
    spec: SyntheticModelSpec, n: int, rng: np.random.Generator
) -> LabeledDataset:
    """Draw n samples from the spec's linear model.

    Requires spec.coefficients to be set.
    """
    if spec.coefficients is None:
        raise ValueError("spec.coefficients must be set before generating data")
    root = sqrt_sym(spec.covariance)
    z = rng.standard_normal((n, spec.d))
    x = spec.mean + z @ root.entries
    noise = rng.normal(0.0, spec.noise_std, size=n) if spec.noise_std > 0 else np.zeros(n)
    y = x @ spec.coefficients + noise
    return LabeledDataset(features=x, responses=y)


def default_synthetic(d: int = 10, mu_scale: float = 2.0) -> SyntheticModelSpec:
    """Default ill-conditioned synthetic design.

    mean = mu_scale * ones and a geometric ladder of covariance eigenvalues
    from 0.2 to 2.0; the rank-one mean term gives the second moment one
    dominant eigenvalue, so its averaged condition number lands well above
    10.  Coefficients are left unset (sampled per experiment).
    """
    psi = np.geomspace(0.2, 2.0, d)
    return SyntheticModelSpec(
        d=d,
        mean=np.full(d, mu_scale),
        covariance=SymmetricMatrix.diag(psi),
        noise_std=0.05,
    )


def ingest_csv(
    path: str | Path, delimiter: str = ";", response_column: str = "quality"
) -> LabeledDataset:
    """Read a numeric CSV with a header row into a LabeledDataset.

    Features are all non-response columns in header order.  Parse failures
    report the offending row and column.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvParseError(f"{path}: empty file") from None
        header = [h.strip().strip('"') for h in header]
        if response_column not in header:
            raise CsvParseError(
                f"{path}: response column {response_column!r} not in header {header}"
            )
        resp_idx = header.index(response_column)
        rows = []
        for row_num, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise CsvParseError(
                    f"{path}: row {row_num} has {len(row)} cells, expected {len(header)}"
                )
            try:
                rows.append([float(cell) for cell in row])
            except ValueError:
                bad = next(i for i, c in enumerate(row) if not _is_float(c))
                raise CsvParseError(
                    f"{path}: row {row_num}, column {header[bad]!r}: "
                    f"cannot parse {row[bad]!r} as a number"
                ) from None
    if not rows:
        raise CsvParseError(f"{path}: no data rows")
    table = np.asarray(rows, dtype=np.float64)
    features = np.delete(table, resp_idx, axis=1)
    responses = table[:, resp_idx]
    return LabeledDataset(features=features, responses=responses)


def _is_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def normalize(data: LabeledDataset):
    """Standardize every feature column and the response to mean 0, variance 1.

    Uses population variance (divide by n) over the full dataset.  Returns
    (normalized dataset, NormalizationRecord); the record inverts the map
    exactly: original = normalized * scale + shift.
    """
    x, y = data.features, data.responses
    x_mean = x.mean(axis=0)
    x_std = x.std(axis=0)
    zero = np.flatnonzero(x_std == 0)
    if zero.size:
        raise ValueError(f"zero-variance feature column(s) at index {zero.tolist()}")
    y_mean = float(y.mean())
    y_std = float(y.std())
    if y_std == 0:
        raise ValueError("zero-variance response column")
    record = NormalizationRecord(
        feature_shift=x_mean,
        feature_scale=x_std,
        response_shift=y_mean,
        response_scale=y_std,
    )
    out = LabeledDataset(features=(x - x_mean) / x_std, responses=(y - y_mean) / y_std)
    return out, record


def split(data: LabeledDataset, spec: SplitSpec):
    """Deterministic disjoint public/private split; returns (public, private)."""
    n = data.n
    if spec.n_pub + spec.n_priv > n:
        raise ValueError(
            f"split sizes {spec.n_pub}+{spec.n_priv} exceed dataset size {n}"
        )
    if spec.mode is SplitMode.HEAD_TAIL:
        idx = np.arange(n)
    else:
        idx = np.random.default_rng(np.random.SeedSequence(spec.seed)).permutation(n)
    pub_idx = idx[: spec.n_pub]
    priv_idx = idx[spec.n_pub : spec.n_pub + spec.n_priv]
    public = LabeledDataset(
        features=data.features[pub_idx], responses=data.responses[pub_idx]
    )
    private = LabeledDataset(
        features=data.features[priv_idx], responses=data.responses[priv_idx]
    )
    return public, private


def public_moments(public: LabeledDataset) -> PublicMoments:
    """Uncentered second moments of the public rows (no mean subtraction)."""
    x, y, n = public.features, public.responses, public.n
    return PublicMoments(
        feature_moment=SymmetricMatrix(x.T @ x / n),
        response_moment=float(np.sqrt(np.mean(y**2))),
        n_pub=n,
    )
