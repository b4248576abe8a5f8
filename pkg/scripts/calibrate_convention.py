"""Weak-duality and tightness table for every candidate pairing convention."""

from __future__ import annotations

import argparse
import json
from dataclasses import asdict, dataclass

from scatterbound.dual import calibrate_convention


@dataclass
class Options:
    samples: int = 100
    seed: int = 0
    json: bool = False


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--samples", type=int, default=Options.samples)
    p.add_argument("--seed", type=int, default=Options.seed)
    p.add_argument("--json", action="store_true")
    opts = Options(**vars(p.parse_args(argv)))
    result = calibrate_convention(samples=opts.samples, seed=opts.seed)
    if opts.json:
        print(json.dumps({"options": asdict(opts), "selected": result.selected,
                          "table": result.table}, indent=2, default=float))
        return
    print(f"{'convention':>10}  {'violations':>10}  {'tightness':>9}")
    for name, entry in result.table.items():
        print(f"{name:>10}  {entry['violations']:>10d}  {entry['tightness']:9.4f}")
    print(f"selected: {result.selected}")


if __name__ == "__main__":
    main()
