"""-d(alpha)/lambda against the deviation budget alpha for a 2R = 0.2 disc.

Writes one CSV per polarization with a column per contrast; alpha_ub of each
contrast is written to the header comment so the certified part of each curve
(alpha >= alpha_ub) can be marked when plotting.
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from scatterbound import assemble, build_grid, plane_wave
from scatterbound.alpha import alpha_ub, contrast_bounds
from scatterbound.dual import bound_curve
from scatterbound.forward import reference_field, sigma_over_wavelength


@dataclass
class Options:
    radius: float = 0.1
    spacing: float = 0.02
    contrasts: tuple = (-2.0, -0.5, 0.5, 1.0, 2.0)
    alphas: np.ndarray = field(default_factory=lambda: np.linspace(0.0, 1.5, 16))
    out: Path = Path("results/bound_vs_alpha")


def curves(pol: str, opts: Options):
    grid = build_grid(1.0, opts.radius, opts.spacing)
    G, E_inc = assemble(grid, pol), plane_wave(grid, pol)
    table, ub = {}, {}
    for chi0 in opts.contrasts:
        lower, upper = contrast_bounds(chi0)
        E_ref = reference_field(G, (lower + upper) / 2, E_inc)
        ub[chi0] = alpha_ub(G, lower, upper).value
        certs = bound_curve(G, E_inc, E_ref, lower, upper, opts.alphas)
        table[chi0] = [sigma_over_wavelength(grid, c.bound) for c in certs]
    return table, ub


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--spacing", type=float, default=Options.spacing)
    p.add_argument("--out", type=Path, default=Options.out)
    a = p.parse_args(argv)
    opts = Options(spacing=a.spacing, out=a.out)
    opts.out.mkdir(parents=True, exist_ok=True)
    for pol in ("TE", "TM"):
        table, ub = curves(pol, opts)
        header = "alpha," + ",".join(f"chi0={c:g}" for c in opts.contrasts)
        comment = "# alpha_ub: " + ", ".join(f"{c:g}={ub[c]:.6g}" for c in opts.contrasts)
        rows = np.column_stack([opts.alphas] + [table[c] for c in opts.contrasts])
        path = opts.out / f"bound_vs_alpha_{pol}.csv"
        np.savetxt(path, rows, delimiter=",", header=f"{comment}\n{header}", comments="",
                   fmt="%.10g")
        print(f"{pol}: wrote {path}")


if __name__ == "__main__":
    main()
