#!/usr/bin/env python3
import argparse
import logging
import os
import sys
from typing import List, Optional

from dotenv import load_dotenv

from core.errors import FairVolError, UsageError

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def configure_logging() -> None:
    """Route log records to stderr at FAIRVOL_LOG_LEVEL"""
    level_name = os.getenv("FAIRVOL_LOG_LEVEL", "WARNING").upper()
    level = getattr(logging, level_name, logging.WARNING)
    logging.basicConfig(level=level, format='%(asctime)s - %(levelname)s - %(message)s',
                        stream=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairvol",
        description="Hurst-Holder estimation, fair volatility and MPRE simulation",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    simulate = subparsers.add_parser("simulate", help="Write a simulated path as CSV")
    simulate.add_argument("--process", required=True,
                          choices=["fbm", "fgn", "mpre", "ar1", "iid", "inid", "concat"])
    simulate.add_argument("--n", type=int, default=1024, help="Number of points (default: 1024)")
    simulate.add_argument("--seed", type=int, required=True, help="64-bit unsigned seed")
    simulate.add_argument("--h", type=float, default=0.5, help="Hurst exponent (default: 0.5)")
    simulate.add_argument("--h2", type=float, default=0.5, help="Second-segment Hurst exponent for concat")
    simulate.add_argument("--phi", type=float, default=0.0, help="AR(1) coefficient, |phi| < 1")
    simulate.add_argument("--nu", type=float, default=1.0, help="Constant MPRE scale (default: 1)")
    simulate.add_argument("--hpath", choices=["constant", "fou"], default="constant",
                          help="MPRE exponent path: constant H or an fOU path centred on --h")
    simulate.add_argument("--truncation", type=float, default=10.0,
                          help="MPRE truncation horizon T (default: 10)")
    simulate.add_argument("--substeps", type=int, default=4,
                          help="MPRE fine cells per observation step (default: 4)")
    simulate.add_argument("--output", help="Destination CSV (default: stdout)")

    analyze = subparsers.add_parser("analyze", help="Analyse price CSV files")
    analyze.add_argument("--input", required=True, action="append",
                         help="Price CSV with header date,close (repeatable)")
    analyze.add_argument("--delta", type=int, default=20, help="Rolling window in returns (default: 20)")
    analyze.add_argument("--alpha", type=float, default=0.05, help="Significance level (default: 0.05)")
    analyze.add_argument("--nu-window", type=int, default=120, dest="nu_window",
                         help="Moving-median window for nu (default: 120)")
    analyze.add_argument("--standardize", choices=["none", "two_scale"], default="none",
                         help="Return standardization before estimating H (default: none)")
    analyze.add_argument("--output", default="reports", help="Output directory (default: reports)")
    analyze.add_argument("--plot-data", action="store_true", dest="plot_data",
                         help="Also write the three plot panels")
    analyze.add_argument("--markdown", action="store_true", help="Also write report.md")
    analyze.add_argument("--manifest", help="Dataset manifest CSV to verify inputs against")

    validate = subparsers.add_parser("validate", help="Run a validation suite")
    validate.add_argument("--suite", required=True, choices=["prop1", "estimator", "specfun"])
    validate.add_argument("--paths", type=int, default=None,
                          help="Monte-Carlo paths (default: 500 for prop1, 200 for estimator)")
    validate.add_argument("--seed", type=int, required=True, help="64-bit unsigned seed")

    demo = subparsers.add_parser("demo", help="Write the short-memory and queued-fGn illustrations")
    demo.add_argument("--seed", type=int, default=1)
    demo.add_argument("--n", type=int, default=1000, help="Length of each short-memory sequence")
    demo.add_argument("--output", default="demo", help="Output directory (default: demo)")

    return parser


def dispatch(args: argparse.Namespace) -> int:
    if args.command == "simulate":
        from commands.simulate import run_simulate_command
        return run_simulate_command(args)
    elif args.command == "analyze":
        from commands.analyze import run_analyze_command
        return run_analyze_command(args)
    elif args.command == "validate":
        from commands.validate import run_validate_command
        return run_validate_command(args)
    elif args.command == "demo":
        from commands.demo import run_demo_command
        return run_demo_command(args)
    raise UsageError(f"Unknown command: {args.command}")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging()

    try:
        return dispatch(args)
    except UsageError as e:
        parser.error(str(e))
    except FairVolError as e:
        logger.error(str(e))
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
