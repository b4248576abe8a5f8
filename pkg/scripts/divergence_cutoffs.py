"""Where alpha_ub stops being finite, per polarization and radius.

Negative contrasts are scanned on the sweep grid; the positive cutoff is
searched on a geometric grid out to large chi0 and then bisected.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass

import numpy as np

from scatterbound import assemble, build_grid
from scatterbound.alpha import alpha_ub, contrast_bounds


@dataclass
class Options:
    radii: tuple = (0.025, 0.05, 0.1)
    chi_max: float = 400.0
    bisections: int = 30


def diverges(G, chi0: float) -> bool:
    return alpha_ub(G, *contrast_bounds(chi0)).divergent


def positive_cutoff(G, opts: Options) -> float:
    grid = np.geomspace(0.25, opts.chi_max, 60)
    flags = [diverges(G, c) for c in grid]
    if not any(flags):
        return float("inf")
    j = flags.index(True)
    lo, hi = (grid[j - 1] if j else 0.0), grid[j]
    for _ in range(opts.bisections):
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if diverges(G, mid) else (mid, hi)
    return hi


def negative_cutoff(G) -> float:
    """Largest sweep contrast <= 0 at which alpha_ub diverges (-inf if none)."""
    bad = [c for c in np.linspace(-4, 0, 17)[:-1] if diverges(G, c)]
    return max(bad) if bad else -float("inf")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--radii", type=float, nargs="+", default=list(Options.radii))
    opts = Options(radii=tuple(p.parse_args(argv).radii))
    print("pol  R       dx      negative side   positive cutoff")
    for pol in ("TE", "TM"):
        for radius in opts.radii:
            dx = min(0.01, radius / 5)
            G = assemble(build_grid(1.0, radius, dx), pol)
            neg = negative_cutoff(G)
            neg_text = "finite" if neg == -np.inf else f"diverges from {neg:g} down"
            print(f"{pol}   {radius:<6g}  {dx:<6g}  {neg_text:14s}  {positive_cutoff(G, opts):.4f}")


if __name__ == "__main__":
    main()
