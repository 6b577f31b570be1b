#!/usr/bin/env python3
"""Reproduce the headline synthetic sweep.

Runs both DP estimators on the default ill-conditioned synthetic model over
rho in {2, 10} and n_priv in {3000, 5000, 10000} with a small public sample
(n_pub = 20), then writes one CSV row per grid cell.

Usage:
    python scripts/run_synthetic.py results.csv [--trials 300] [--seed 0]
"""

import argparse
import sys

from pmtreg.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out", help="output CSV path")
    parser.add_argument("--trials", type=int, default=300)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    return cli_main(
        [
            "synth",
            "--rho", "2,10",
            "--n-priv", "3000,5000,10000",
            "--n-pub", "20",
            "--trials", str(args.trials),
            "--seed", str(args.seed),
            "--out", args.out,
        ]
    )


if __name__ == "__main__":
    sys.exit(main())
