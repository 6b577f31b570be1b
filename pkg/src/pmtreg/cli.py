"""Command-line interface: synthetic sweeps, real-data sweeps, diagnostics.

Exit codes: 0 success, 1 runtime failure, 2 usage/validation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import data as data_mod
from .data import SplitMode, default_synthetic, ingest_csv, normalize
from .estimators import Method, UnstableInversionError
from .harness import (
    DatasetSource,
    ExperimentGrid,
    Reference,
    SyntheticSource,
    emit_csv,
    run_grid,
)
from .spectra import SymmetricMatrix, diagnostics, theory_bracket

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v != ""]
    except ValueError:
        raise UsageError(f"cannot parse {text!r} as a comma list of integers") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v != ""]
    except ValueError:
        raise UsageError(f"cannot parse {text!r} as a comma list of numbers") from None


def _methods(text: str) -> tuple[Method, ...]:
    out = []
    for name in text.split(","):
        name = name.strip()
        try:
            out.append(Method(name))
        except ValueError:
            raise UsageError(
                f"unknown method {name!r}; choose from DP_OLSE, DP_PMTOLSE"
            ) from None
    return tuple(out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmtreg",
        description="DP least squares with public second-moment preconditioning",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="synthetic-data sweep")
    synth.add_argument("--d", type=int, default=10)
    synth.add_argument("--n-priv", default="3000", help="comma list")
    synth.add_argument("--n-pub", default="20", help="comma list")
    synth.add_argument("--rho", default="2", help="comma list")
    synth.add_argument("--eta", type=float, default=0.05)
    synth.add_argument("--trials", type=int, default=300)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--methods", default="DP_OLSE,DP_PMTOLSE")
    synth.add_argument(
        "--reference", choices=["true_beta", "nonprivate_olse"], default="true_beta"
    )
    synth.add_argument("--out", required=True)
    synth.add_argument("--zero-noise", action="store_true", help="test hook")
    synth.add_argument("--mu-scale", type=float, default=2.0)
    synth.add_argument(
        "--psi-spec", default=None, help="comma list of covariance eigenvalues (length d)"
    )

    real = sub.add_parser("real", help="real-dataset sweep")
    real.add_argument("--data", required=True)
    real.add_argument("--delimiter", default=";")
    real.add_argument("--response", default="quality")
    real.add_argument("--n-pub", default="249", help="comma list")
    real.add_argument("--n-priv", default="4649", help="comma list")
    real.add_argument("--rho", default="5", help="comma list")
    real.add_argument("--eta", type=float, default=0.05)
    real.add_argument("--trials", type=int, default=300)
    real.add_argument("--seed", type=int, default=0)
    real.add_argument("--methods", default="DP_OLSE,DP_PMTOLSE")
    real.add_argument("--split", choices=["random", "head"], default="random")
    real.add_argument("--out", required=True)

    diag = sub.add_parser(
        "diagnose", help="print spectral diagnostics and theory bounds as JSON"
    )
    diag.add_argument("--data", default=None)
    diag.add_argument("--delimiter", default=";")
    diag.add_argument("--response", default="quality")
    diag.add_argument("--d", type=int, default=10, help="synthetic dimension")
    diag.add_argument("--mu-scale", type=float, default=2.0)
    diag.add_argument("--eta", type=float, default=0.05)
    diag.add_argument("--n-pub", type=int, default=None)

    return parser


def _cmd_synth(args) -> int:
    spec = default_synthetic(d=args.d, mu_scale=args.mu_scale)
    if args.psi_spec is not None:
        psi = _float_list(args.psi_spec)
        if len(psi) != args.d:
            raise UsageError(f"--psi-spec needs {args.d} values, got {len(psi)}")
        spec = data_mod.SyntheticModelSpec(
            d=args.d,
            mean=np.full(args.d, args.mu_scale),
            covariance=SymmetricMatrix.diag(psi),
            noise_std=spec.noise_std,
        )
    grid = ExperimentGrid(
        methods=_methods(args.methods),
        rho_values=tuple(_float_list(args.rho)),
        n_priv_values=tuple(_int_list(args.n_priv)),
        n_pub_values=tuple(_int_list(args.n_pub)),
        eta=args.eta,
        trials=args.trials,
        seed=args.seed,
        reference=Reference(args.reference),
        zero_noise=args.zero_noise,
    )
    results = run_grid(grid, SyntheticSource(spec))
    emit_csv(results, args.out)
    return EXIT_OK


def _cmd_real(args) -> int:
    path = Path(args.data)
    if not path.is_file():
        raise UsageError(f"data file not found: {path}")
    dataset = ingest_csv(path, delimiter=args.delimiter, response_column=args.response)
    dataset, _ = normalize(dataset)
    grid = ExperimentGrid(
        methods=_methods(args.methods),
        rho_values=tuple(_float_list(args.rho)),
        n_priv_values=tuple(_int_list(args.n_priv)),
        n_pub_values=tuple(_int_list(args.n_pub)),
        eta=args.eta,
        trials=args.trials,
        seed=args.seed,
        reference=Reference.NONPRIVATE_OLSE,
    )
    mode = SplitMode.HEAD_TAIL if args.split == "head" else SplitMode.RANDOM_WITHOUT_REPLACEMENT
    results = run_grid(grid, DatasetSource(dataset, split_mode=mode))
    emit_csv(results, args.out)
    return EXIT_OK


def _cmd_diagnose(args) -> int:
    if args.data is not None:
        path = Path(args.data)
        if not path.is_file():
            raise UsageError(f"data file not found: {path}")
        dataset = ingest_csv(path, delimiter=args.delimiter, response_column=args.response)
        dataset, _ = normalize(dataset)
        x, n = dataset.features, dataset.n
        matrix = SymmetricMatrix(x.T @ x / n)
        d = dataset.d
        n_pub = args.n_pub if args.n_pub is not None else n
    else:
        spec = default_synthetic(d=args.d, mu_scale=args.mu_scale)
        matrix = spec.second_moment()
        d = spec.d
        n_pub = args.n_pub if args.n_pub is not None else 4 * d
    diag = diagnostics(matrix)
    bounds = theory_bracket(d, n_pub, args.eta)
    payload = diag.as_dict()
    payload["L"] = bounds.lower_L
    payload["U"] = bounds.upper_U
    json.dump(payload, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        if args.command == "synth":
            return _cmd_synth(args)
        if args.command == "real":
            return _cmd_real(args)
        return _cmd_diagnose(args)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UnstableInversionError, OSError) as exc:
        print(f"runtime-error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
