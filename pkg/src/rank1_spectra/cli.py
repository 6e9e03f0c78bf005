"""Command-line surface: moment tables, simulations, radius bounds, validation.

Exit codes: 0 success, 2 usage or parse errors, 3 numeric or runtime errors.
All outputs are UTF-8; floats serialize with 17 significant digits.  The
RANK1_SPECTRA_THREADS environment variable caps Monte Carlo parallelism
(0 = one worker per CPU; unset = serial).
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Optional

from .ensemble import EnsembleConfig, _histogram, monte_carlo
from .moments import MomentReport
from .radius_bounds import RadiusBoundsReport
from .reports import DEFAULT_LAMBDA_TOL, moment_table, radius_table
from .serialize import dumps_json, fmt17, histogram_csv, run_manifest
from .sigma_model import NoLimitError, SigmaDomainError, SpecSyntaxError, parse_sigma_spec
from .validation import run_all

USAGE_EXIT = 2
NUMERIC_EXIT = 3


def _moment_rows_payload(report: MomentReport) -> list:
    rows = []
    for r in report.rows:
        upper = r.upper
        rows.append(
            {
                "order": r.order,
                "limit": r.limit,
                "lower": r.lower,
                "upper": None if upper is not None and math.isinf(upper) else upper,
                "empirical_mean": r.empirical_mean,
                "empirical_stderr": r.empirical_stderr,
                "flags": {
                    "lower_vacuous": r.lower_vacuous,
                    "upper_overflow": r.upper_overflow,
                    "formula_gap": r.formula_gap_flagged,
                },
            }
        )
    return rows


def _moment_csv(report: MomentReport) -> str:
    lines = ["order,limit,lower,upper,empirical_mean,empirical_stderr,lower_vacuous,upper_overflow"]
    for r in report.rows:
        def cell(x):
            if x is None:
                return ""
            if isinstance(x, bool):
                return str(x).lower()
            if isinstance(x, float) and math.isinf(x):
                return "inf"
            return fmt17(x) if isinstance(x, float) else str(x)

        lines.append(
            ",".join(
                cell(v)
                for v in (
                    r.order,
                    r.limit,
                    r.lower,
                    r.upper,
                    r.empirical_mean,
                    r.empirical_stderr,
                    r.lower_vacuous,
                    r.upper_overflow,
                )
            )
        )
    return "\n".join(lines) + "\n"


def _radius_payload(report: RadiusBoundsReport) -> dict:
    rows = []
    for row in report.rows:
        rows.append(
            {
                "s": row.s,
                "n": row.n,
                "lower": None if row.lower.vacuous else row.lower.value,
                "lower_vacuous": row.lower.vacuous,
                "upper": None if row.upper.vacuous else row.upper.value,
                "upper_overflow": row.upper.vacuous,
                "upper_companion": row.upper_companion,
            }
        )
    payload = {"orders": rows}
    if report.sdp is not None:
        payload["sdp"] = {
            "s_bar": report.sdp.s_bar,
            "beta": report.sdp.beta,
            "sqrt_beta": report.sdp.sqrt_beta,
            "method_agreement": report.sdp.method_agreement,
            "tol": report.sdp.tol,
            "condition_estimate": report.sdp.condition_estimate,
            "ridge_scale": report.sdp.ridge_scale,
        }
    payload["asymptotic_root"] = report.asymptotic_root
    if report.empirical is not None:
        payload["empirical"] = report.empirical
    payload["notes"] = list(report.notes)
    return payload


def cmd_moments(args: argparse.Namespace, argv: list) -> int:
    spec = parse_sigma_spec(args.sigma)
    s_max = args.max_order // 2
    report = moment_table(spec, s_max, n=args.n, lambda_tol=args.lambda_tol)
    manifest = run_manifest("moments", argv, args.sigma, None)
    out = Path(args.out)
    if args.format == "json":
        payload = {
            "manifest": manifest,
            "moments": _moment_rows_payload(report),
            "notes": list(report.notes),
        }
        out.write_text(dumps_json(payload), encoding="utf-8")
    else:
        out.write_text(_moment_csv(report), encoding="utf-8")
    return 0


def cmd_simulate(args: argparse.Namespace, argv: list) -> int:
    spec = parse_sigma_spec(args.sigma)
    config = EnsembleConfig(
        n=args.n, sigma=spec, distribution=args.dist, K=args.K, seed=args.seed
    )
    mc = monte_carlo(
        config,
        trials=args.trials,
        k_max=args.max_order,
        collect_eigenvalues=True,
        threads=None,
    )
    hist = _histogram(mc.pooled_eigenvalues, args.bins, None)
    manifest = run_manifest("simulate", argv, args.sigma, args.seed)
    moments_payload = []
    for k in range(1, args.max_order + 1):
        moments_payload.append(
            {
                "order": k,
                "empirical_mean": float(mc.moment_means[k - 1]),
                "empirical_stderr": (
                    float(mc.moment_stderrs[k - 1]) if mc.moment_stderrs is not None else None
                ),
            }
        )
    payload = {
        "manifest": manifest,
        "moments": moments_payload,
        "radius": {
            "mean": mc.radius_mean,
            "stderr": mc.radius_stderr,
            "min": mc.radius_min,
            "max": mc.radius_max,
        },
        "trials": args.trials,
        "n": args.n,
        "distribution": args.dist,
    }
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(dumps_json(payload), encoding="utf-8")
    (out_dir / "esd.csv").write_text(
        histogram_csv(hist.bin_edges, hist.counts), encoding="utf-8"
    )
    return 0


def cmd_radius(args: argparse.Namespace, argv: list) -> int:
    spec = parse_sigma_spec(args.sigma)
    orders = [int(tok) for tok in args.orders.split(",") if tok] if args.orders else []
    report = radius_table(
        spec,
        orders=orders,
        n=args.n,
        s_bar=args.sbar,
        lambda_tol=args.lambda_tol,
        sdp_tol=args.tol,
    )
    manifest = run_manifest("radius", argv, args.sigma, None)
    payload = {"manifest": manifest, "radius": _radius_payload(report)}
    Path(args.out).write_text(dumps_json(payload), encoding="utf-8")
    return 0


def cmd_validate(args: argparse.Namespace, argv: list) -> int:
    checks = run_all(deep=args.deep)
    failed = 0
    for name, passed, detail in checks:
        status = "PASS" if passed else "FAIL"
        print(f"{name}: {status} ({detail})")
        if not passed:
            failed += 1
    if failed:
        print(f"{failed} of {len(checks)} checks failed", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rank1-spectra",
        description="Spectral moments and radius bounds for rank-one variance profiles",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_m = sub.add_parser("moments", help="limiting moments and finite-n bounds")
    p_m.add_argument("--sigma", required=True, help="const:<v> | expr:<e> | file:<path>")
    p_m.add_argument("--max-order", type=int, required=True, help="largest even order 2S")
    p_m.add_argument("--n", type=int, default=None, help="dimension for finite-n bounds")
    p_m.add_argument("--out", required=True)
    p_m.add_argument("--format", choices=("json", "csv"), default="json")
    p_m.add_argument("--lambda-tol", type=float, default=DEFAULT_LAMBDA_TOL)

    p_s = sub.add_parser("simulate", help="Monte Carlo campaign")
    p_s.add_argument("--sigma", required=True)
    p_s.add_argument("--n", type=int, required=True)
    p_s.add_argument("--trials", type=int, required=True)
    p_s.add_argument("--dist", choices=("rademacher", "uniform", "truncated_gaussian"),
                     default="rademacher")
    p_s.add_argument("--seed", type=int, default=0)
    p_s.add_argument("--bins", type=int, default=100)
    p_s.add_argument("--max-order", type=int, default=10)
    p_s.add_argument("--K", type=float, default=None)
    p_s.add_argument("--out", required=True, help="output directory")

    p_r = sub.add_parser("radius", help="radius bounds and the Hankel-pencil SDP")
    p_r.add_argument("--sigma", required=True)
    p_r.add_argument("--orders", default="", help="comma-separated s values")
    p_r.add_argument("--n", type=int, default=None)
    p_r.add_argument("--sbar", type=int, default=14)
    p_r.add_argument("--tol", type=float, default=1e-10)
    p_r.add_argument("--out", required=True)
    p_r.add_argument("--lambda-tol", type=float, default=DEFAULT_LAMBDA_TOL)

    p_v = sub.add_parser("validate", help="run the self-validation battery")
    p_v.add_argument("--deep", action="store_true", help="extend enumerations to s=11")

    return parser


def _validate_args(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    if args.command == "moments":
        if args.max_order < 2 or args.max_order % 2:
            parser.error(f"--max-order must be even and >= 2, got {args.max_order}")
        if args.n is not None and args.n < 2:
            parser.error(f"--n must be >= 2, got {args.n}")
        if args.sigma.startswith("file:") and args.n is None:
            parser.error("explicit sigma sequences need --n (no limiting averages exist)")
    elif args.command == "simulate":
        if args.trials < 1:
            parser.error(f"--trials must be >= 1, got {args.trials}")
        if args.n < 1:
            parser.error(f"--n must be >= 1, got {args.n}")
        if args.bins < 1:
            parser.error(f"--bins must be >= 1, got {args.bins}")
        if args.max_order < 1:
            parser.error(f"--max-order must be >= 1, got {args.max_order}")
        if args.seed < 0:
            parser.error(f"--seed must be >= 0, got {args.seed}")
    elif args.command == "radius":
        if args.sbar < 1:
            parser.error(f"--sbar must be >= 1, got {args.sbar}")
        if args.orders:
            try:
                orders = [int(tok) for tok in args.orders.split(",") if tok]
            except ValueError:
                parser.error(f"--orders must be comma-separated integers, got {args.orders!r}")
            if not orders or any(s < 1 for s in orders):
                parser.error(f"--orders entries must be >= 1, got {args.orders!r}")
            if args.n is None:
                parser.error("--orders needs --n for finite-n bounds")


def main(argv: Optional[list] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on usage errors
    _validate_args(parser, args)

    handlers = {
        "moments": cmd_moments,
        "simulate": cmd_simulate,
        "radius": cmd_radius,
        "validate": cmd_validate,
    }
    try:
        return handlers[args.command](args, argv)
    except (SpecSyntaxError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except (SigmaDomainError, NoLimitError, ValueError, ArithmeticError, OverflowError,
            RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return NUMERIC_EXIT


if __name__ == "__main__":
    sys.exit(main())
