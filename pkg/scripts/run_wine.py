#!/usr/bin/env python3
"""Reproduce the white-wine-quality sweep.

Expects the UCI white-wine CSV (semicolon-delimited, response column
"quality") on disk; the file is an input, this script does not download it.
Columns are standardized to mean 0 / variance 1, the rows are split into a
small public part and a large private part per trial, and both DP estimators
run across several privacy budgets.

Usage:
    python scripts/run_wine.py winequality-white.csv results.csv [--trials 300]
"""

import argparse
import sys

from pmtreg.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("data", help="path to the white-wine CSV")
    parser.add_argument("out", help="output CSV path")
    parser.add_argument("--trials", type=int, default=300)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    return cli_main(
        [
            "real",
            "--data", args.data,
            "--rho", "5,50,500",
            "--n-pub", "249",
            "--n-priv", "4649",
            "--trials", str(args.trials),
            "--seed", str(args.seed),
            "--out", args.out,
        ]
    )


if __name__ == "__main__":
    sys.exit(main())
