"""Homogeneous-disc cross-section against the cylinder series over grid refinement."""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass

from scatterbound.mie import mie_cross_section
from scatterbound.validation import disc_cross_section


@dataclass
class Options:
    radius: float = 0.1
    chi: float = 1.0
    divisions: tuple = (25, 50, 100, 200)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--radius", type=float, default=Options.radius)
    p.add_argument("--chi", type=float, default=Options.chi)
    p.add_argument("--divisions", type=int, nargs="+", default=list(Options.divisions))
    a = p.parse_args(argv)
    opts = Options(a.radius, a.chi, tuple(a.divisions))
    print("pol  lambda/dx   sigma/lambda     series      rel.err   seconds")
    for pol in ("TE", "TM"):
        exact = mie_cross_section(opts.radius, opts.chi, 1.0, pol).sigma
        for m in opts.divisions:
            t = time.perf_counter()
            s = disc_cross_section(pol, opts.radius, opts.chi, 1.0 / m)
            dt = time.perf_counter() - t
            print(f"{pol}  {m:9d}  {s:13.8f}  {exact:11.8f}  {abs(s - exact) / exact:9.2e}"
                  f"  {dt:8.2f}")


if __name__ == "__main__":
    main()
