"""Multi-trial experiment orchestration and CSV emission.

A grid is the cross product (method, rho, n_priv, n_pub); each cell runs
``trials`` independent trials with per-trial rng streams derived from
(seed, cell index, trial index), so trial execution order and scheduling
never affect the numbers.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from itertools import product
from pathlib import Path

import numpy as np

from .data import (
    SplitMode,
    SplitSpec,
    SyntheticModelSpec,
    generate,
    public_moments,
    split,
)
from .estimators import (
    LabeledDataset,
    Method,
    UnstableInversionError,
    dp_olse_baseline,
    dp_pmtolse,
    olse,
)
from .privacy import PrivacyBudget
from .spectra import SingularMatrixError

__all__ = [
    "Reference",
    "ExperimentGrid",
    "CellResult",
    "SyntheticSource",
    "DatasetSource",
    "run_grid",
    "emit_csv",
    "read_results_csv",
]

_SEED_MASK = 0xFFFFFFFFFFFFFFFF

CSV_HEADER = [
    "method",
    "rho",
    "n_priv",
    "n_pub",
    "trials_ok",
    "trials_failed",
    "mean_err",
    "std_err",
    "mean_truncated_frac",
    "mean_avg_cond_pre",
]


class Reference(Enum):
    TRUE_BETA = "true_beta"
    NONPRIVATE_OLSE = "nonprivate_olse"


@dataclass(frozen=True)
class ExperimentGrid:
    methods: tuple
    rho_values: tuple
    n_priv_values: tuple
    n_pub_values: tuple
    eta: float
    trials: int
    seed: int
    reference: Reference
    zero_noise: bool = False

    def __post_init__(self):
        for name in ("methods", "rho_values", "n_priv_values", "n_pub_values"):
            value = tuple(getattr(self, name))
            if not value:
                raise ValueError(f"{name} must be non-empty")
            object.__setattr__(self, name, value)
        if any(m not in (Method.DP_OLSE, Method.DP_PMTOLSE) for m in self.methods):
            raise ValueError("grid methods must be DP_OLSE or DP_PMTOLSE")
        if any(r <= 0 for r in self.rho_values):
            raise ValueError("rho values must be positive")
        if not (0.0 < self.eta < 1.0):
            raise ValueError(f"eta must lie in (0, 1), got {self.eta}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    def cells(self):
        return list(
            product(self.methods, self.rho_values, self.n_priv_values, self.n_pub_values)
        )


@dataclass(frozen=True)
class CellResult:
    method: Method
    rho: float
    n_priv: int
    n_pub: int
    trials_ok: int
    trials_failed: int
    mean_err: float
    std_err: float
    mean_truncated_frac: float
    mean_avg_cond_pre: float


@dataclass(frozen=True)
class SyntheticSource:
    """Per-trial resampling from a synthetic linear model.

    If the spec's coefficients are unset, beta is drawn once per grid from a
    standard normal, using a stream keyed off the grid seed.
    """

    spec: SyntheticModelSpec


@dataclass(frozen=True)
class DatasetSource:
    """Per-trial public/private resampling from a fixed (real) dataset."""

    dataset: LabeledDataset
    split_mode: SplitMode = SplitMode.RANDOM_WITHOUT_REPLACEMENT


def _trial_rng(seed: int, cell_index: int, trial: int) -> np.random.Generator:
    ss = np.random.SeedSequence([seed & _SEED_MASK, 1, cell_index, trial])
    return np.random.default_rng(ss)


def _grid_beta(grid: ExperimentGrid, d: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([grid.seed & _SEED_MASK, 0]))
    return rng.standard_normal(d)


def _validate(grid: ExperimentGrid, source):
    if isinstance(source, SyntheticSource):
        return
    if isinstance(source, DatasetSource):
        if grid.reference is Reference.TRUE_BETA:
            raise ValueError("TRUE_BETA reference requires a synthetic source")
        need = max(grid.n_pub_values) + max(grid.n_priv_values)
        if need > source.dataset.n:
            raise ValueError(
                f"largest split needs {need} rows but dataset has {source.dataset.n}"
            )
        return
    raise TypeError(f"unsupported source type {type(source).__name__}")


def _run_trial(grid, source, method, rho, n_priv, n_pub, rng, beta_true):
    if isinstance(source, SyntheticSource):
        spec = source.spec.with_coefficients(beta_true)
        public = generate(spec, n_pub, rng)
        private = generate(spec, n_priv, rng)
    else:
        split_seed = int(rng.integers(0, 2**63))
        public, private = split(
            source.dataset,
            SplitSpec(n_pub=n_pub, n_priv=n_priv, seed=split_seed, mode=source.split_mode),
        )

    if grid.reference is Reference.TRUE_BETA:
        ref = beta_true
    else:
        ref = olse(private).beta

    budget = PrivacyBudget(rho)
    if method is Method.DP_PMTOLSE:
        out = dp_pmtolse(
            private, public_moments(public), grid.eta, budget, rng,
            zero_noise=grid.zero_noise,
        )
    else:
        out = dp_olse_baseline(
            private, grid.eta, budget, rng, zero_noise=grid.zero_noise
        )

    err = float(np.linalg.norm(out.beta - ref))
    frac = (out.feature_truncation.truncated + out.response_truncation.truncated) / (
        out.feature_truncation.total + out.response_truncation.total
    )
    return err, frac, out.pre_diag.avg_cond


def run_grid(grid: ExperimentGrid, source) -> list[CellResult]:
    """Run every cell of the grid; failed (unstable-inversion) trials are
    counted per cell and excluded from the mean/std, never silently dropped."""
    _validate(grid, source)

    if isinstance(source, SyntheticSource):
        spec = source.spec
        beta_true = (
            spec.coefficients
            if spec.coefficients is not None
            else _grid_beta(grid, spec.d)
        )
    else:
        beta_true = None

    results = []
    for cell_index, (method, rho, n_priv, n_pub) in enumerate(grid.cells()):
        errs, fracs, conds = [], [], []
        failed = 0
        for trial in range(grid.trials):
            rng = _trial_rng(grid.seed, cell_index, trial)
            try:
                err, frac, avg_cond = _run_trial(
                    grid, source, method, rho, n_priv, n_pub, rng, beta_true
                )
            except (UnstableInversionError, SingularMatrixError):
                failed += 1
                continue
            errs.append(err)
            fracs.append(frac)
            conds.append(avg_cond)
        ok = len(errs)
        if ok:
            mean_err = float(np.mean(errs))
            std_err = float(np.std(errs, ddof=1)) if ok > 1 else 0.0
            mean_frac = float(np.mean(fracs))
            mean_cond = float(np.mean(conds))
        else:
            mean_err = std_err = mean_frac = mean_cond = math.nan
        results.append(
            CellResult(
                method=method,
                rho=float(rho),
                n_priv=int(n_priv),
                n_pub=int(n_pub),
                trials_ok=ok,
                trials_failed=failed,
                mean_err=mean_err,
                std_err=std_err,
                mean_truncated_frac=mean_frac,
                mean_avg_cond_pre=mean_cond,
            )
        )
    return results


def _sort_key(r: CellResult):
    return (r.method.value, r.rho, r.n_priv, r.n_pub)


def emit_csv(results: list[CellResult], out: str | Path) -> None:
    """Write results as UTF-8 CSV, sorted by (method, rho, n_priv, n_pub).

    Floats use the shortest round-trip decimal via repr().
    """
    if not results:
        raise ValueError("results must be non-empty")
    rows = sorted(results, key=_sort_key)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow(
                [
                    r.method.value,
                    repr(r.rho),
                    r.n_priv,
                    r.n_pub,
                    r.trials_ok,
                    r.trials_failed,
                    repr(r.mean_err),
                    repr(r.std_err),
                    repr(r.mean_truncated_frac),
                    repr(r.mean_avg_cond_pre),
                ]
            )


def read_results_csv(path: str | Path) -> list[CellResult]:
    """Re-parse a file written by emit_csv (round-trip exact)."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_HEADER:
            raise ValueError(f"unexpected header {header}")
        for row in reader:
            out.append(
                CellResult(
                    method=Method(row[0]),
                    rho=float(row[1]),
                    n_priv=int(row[2]),
                    n_pub=int(row[3]),
                    trials_ok=int(row[4]),
                    trials_failed=int(row[5]),
                    mean_err=float(row[6]),
                    std_err=float(row[7]),
                    mean_truncated_frac=float(row[8]),
                    mean_avg_cond_pre=float(row[9]),
                )
            )
    return out
