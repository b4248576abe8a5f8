"""Field-deviation budget alpha: provable upper bound and local-search estimate.

For any contrast in [chi_-, chi_+] the total field satisfies

    E - E_ref = A (chi - chi_bar) E,   A = (I - chi_bar G)^-1 G,

so ||E - E_ref|| <= a dchi (||E - E_ref|| + ||E_ref||) with a = ||A||, which
rearranges to the closed-form budget computed by :func:`alpha_ub`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .boxopt import multistart, restart_rng
from .forward import VIESystem, operator_norm
from .geometry import FieldArray
from .greens import GreensOperator


@dataclass
class AlphaResult:
    value: float
    divergent: bool = False
    operator_norm: float = float("nan")
    distribution: list = field(default_factory=list)
    chi_maps: list = field(default_factory=list)
    n_failed: int = 0

    def summary(self) -> dict:
        dist = np.asarray(self.distribution, dtype=float)
        if dist.size == 0:
            return {"min": float("nan"), "median": float("nan"), "max": float("nan")}
        return {"min": float(dist.min()), "median": float(np.median(dist)),
                "max": float(dist.max())}


def contrast_bounds(chi0: float) -> tuple[float, float]:
    """Box [min(0, chi0), max(0, chi0)] used by the contrast sweeps."""
    return min(0.0, chi0), max(0.0, chi0)


def alpha_ub(G: GreensOperator, lower: float, upper: float, method: str = "auto",
             **norm_options) -> AlphaResult:
    if lower > upper:
        raise ValueError("lower contrast bound exceeds upper bound")
    chi_bar, dchi = (upper + lower) / 2, abs(upper - lower) / 2
    system = VIESystem(G, np.full(G.grid.n_pixels, chi_bar))
    A = sla.lu_solve(system.lu, G.matrix, check_finite=False)
    a = operator_norm(A, method=method, **norm_options)
    product = dchi * a
    if product >= 1:
        return AlphaResult(float("inf"), True, a)
    return AlphaResult(a * dchi / (1 - product), False, a)


def deviation_objective(G: GreensOperator, E_inc: FieldArray, E_ref: FieldArray):
    """(f, grad) of ||E(chi) - E_ref||^2 as a function of per-pixel contrast."""
    d = G.polarization.ncomp
    area = G.grid.cell_area
    GH = G.adjoint

    def fun_grad(chi):
        system = VIESystem(G, chi)
        e = system.solve(E_inc.values)
        diff = e - E_ref.values
        y = system.solve_adjoint(diff)
        z = GH @ y
        grad = 2 * area * np.real((z.conj() * e).reshape(-1, d).sum(1))
        return area * np.vdot(diff, diff).real, grad

    return fun_grad


def alpha_loc(G: GreensOperator, lower: float, upper: float, E_inc: FieldArray,
              E_ref: FieldArray, restarts: int = 50, seed: int = 0,
              **ascent_options) -> AlphaResult:
    """Largest ||E - E_ref|| / ||E_ref|| found by multi-start projected ascent.

    The squared deviation is maximized (smooth at E = E_ref) and the square
    root taken at the end. Restarts draw chi i.i.d. uniform on the box.
    """
    if restarts < 1:
        raise ValueError("need at least one restart")
    if lower == upper:
        return AlphaResult(0.0, distribution=[0.0] * restarts,
                           chi_maps=[np.full(G.grid.n_pixels, lower)] * restarts)
    n = G.grid.n_pixels
    starts = [restart_rng(seed, i).uniform(lower, upper, n) for i in range(restarts)]
    runs = multistart(deviation_objective(G, E_inc, E_ref), starts, lower, upper,
                      **ascent_options)
    ref_norm2 = G.grid.cell_area * np.vdot(E_ref.values, E_ref.values).real
    dist = [float(np.sqrt(max(v, 0.0) / ref_norm2)) for v in runs.finals]
    value = max(dist) if dist else float("nan")
    return AlphaResult(value, distribution=dist, chi_maps=runs.points,
                       n_failed=len(runs.failed))
