"""Command-line entry point: ``scatterbound <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import PROFILES, ConfigError, load_config
from .experiments import EXIT_CONFIG, EXIT_OK, EXIT_VALIDATION, cmd_verify, run_sweep
from .validation import run_validation

SWEEPS = ("bound", "alpha", "localopt", "dual-at-alpha")


def _sweep_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON sweep configuration")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--seed", type=int)
    p.add_argument("--profile", choices=sorted(PROFILES))
    p.add_argument("--threads", type=int, help="worker processes for the cell pool")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scatterbound", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log every cell")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("bound", "alpha_ub, the certified bound at alpha_ub and the local-opt baseline"),
        ("alpha", "alpha_ub and alpha_loc sweeps with restart distributions"),
        ("localopt", "multi-start local optimization of the cross-section"),
        ("dual-at-alpha", "bound -d(alpha) for explicit alphas, alpha_ub or alpha_loc"),
    ):
        p = sub.add_parser(name, help=help_text)
        _sweep_options(p)
        if name == "dual-at-alpha":
            p.add_argument("--alpha-mode", choices=("ub", "loc", "explicit"))
            p.add_argument("--alphas", type=float, nargs="+")
    p = sub.add_parser("validate", help="oracle, duality, convention and gradient checks")
    p.add_argument("--out", help="write validate.json here")
    p.add_argument("--quick", action="store_true", help="skip the finest convergence grid")
    p = sub.add_parser("verify", help="re-check every certificate in a results directory")
    p.add_argument("out", help="results directory containing certs/")
    return parser


def _validate(args) -> int:
    checks = run_validation(quick=args.quick)
    for check in checks:
        print(check.line())
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        report = {c.name: {"ok": c.ok, "details": c.details} for c in checks}
        (out / "validate.json").write_text(json.dumps(report, indent=2, default=float) + "\n")
    return EXIT_OK if all(c.ok for c in checks) else EXIT_VALIDATION


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.command == "validate":
        return _validate(args)
    if args.command == "verify":
        return cmd_verify(args.out)
    extra = {}
    if args.command == "dual-at-alpha":
        extra = {"alpha_mode": args.alpha_mode,
                 "alphas": tuple(args.alphas) if args.alphas else None}
        if args.alphas and args.alpha_mode is None:
            extra["alpha_mode"] = "explicit"
    try:
        config = load_config(args.config, profile=args.profile, out=args.out, seed=args.seed,
                             threads=args.threads, **extra)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    summary = run_sweep(args.command, config)
    print(f"{summary.kind}: {summary.n_rows} rows, {summary.n_failed} failed, "
          f"{summary.seconds:.1f}s -> {summary.out}")
    return summary.exit_code
