"""Differentially private least squares with public second-moment
preconditioning, plus the private-data-only baseline and an experiment
harness."""

from .estimators import (
    EstimatorOutput,
    LabeledDataset,
    Method,
    PublicMoments,
    UnstableInversionError,
    dp_olse_baseline,
    dp_pmt_second_moment,
    dp_pmtolse,
    olse,
)
from .privacy import BudgetLedger, DpGuarantee, NoiseScales, PrivacyBudget
from .spectra import SpectralDiagnostics, SymmetricMatrix, TheoryBounds

__all__ = [
    "BudgetLedger",
    "DpGuarantee",
    "EstimatorOutput",
    "LabeledDataset",
    "Method",
    "NoiseScales",
    "PrivacyBudget",
    "PublicMoments",
    "SpectralDiagnostics",
    "SymmetricMatrix",
    "TheoryBounds",
    "UnstableInversionError",
    "dp_olse_baseline",
    "dp_pmt_second_moment",
    "dp_pmtolse",
    "olse",
]
