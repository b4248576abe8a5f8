"""Run the four sweep subcommands for one configuration file.

    python scripts/run_sweeps.py configs/ci.json --out results/ci

Each subcommand writes into its own subdirectory of ``--out`` and the
certificates of the bound sweep are re-verified at the end.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from scatterbound.config import load_config, with_overrides
from scatterbound.experiments import cmd_verify, run_sweep


@dataclass
class Options:
    config: Path
    out: Path | None = None
    threads: int | None = None
    commands: tuple = ("bound", "alpha", "localopt", "dual-at-alpha")


def parse(argv=None) -> Options:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("config", type=Path)
    p.add_argument("--out", type=Path)
    p.add_argument("--threads", type=int)
    p.add_argument("--only", nargs="+", choices=Options.commands)
    a = p.parse_args(argv)
    return Options(a.config, a.out, a.threads, tuple(a.only) if a.only else Options.commands)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    opts = parse(argv)
    config = with_overrides(load_config(opts.config), threads=opts.threads)
    root = opts.out or Path(config.out)
    worst = 0
    for kind in opts.commands:
        summary = run_sweep(kind, config, root / kind)
        print(f"{kind:14s} {summary.n_rows:4d} rows  {summary.n_failed} failed  "
              f"{summary.seconds:7.1f}s")
        worst = max(worst, summary.exit_code)
    if "bound" in opts.commands:
        worst = max(worst, cmd_verify(root / "bound"))
    return worst


if __name__ == "__main__":
    sys.exit(main())
