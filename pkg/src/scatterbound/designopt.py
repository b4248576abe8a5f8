"""Adjoint-based multi-start local optimization of the scattering cross-section."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boxopt import multistart, restart_rng
from .forward import VIESystem
from .geometry import ContrastMap, FieldArray
from .greens import GreensOperator


@dataclass
class LocalOptRun:
    best_chi: ContrastMap
    best_value: float            # objective units, 2 Im<E_inc, Phi>
    finals: list = field(default_factory=list)
    iterations: list = field(default_factory=list)
    seed: int = 0
    n_failed: int = 0


def cross_section_objective(G: GreensOperator, E_inc: FieldArray):
    """(sigma, dsigma/dchi) with one forward and one adjoint solve.

    sigma = 2 dA Im[E_inc^H X E] with X = diag(chi), E = (I - G X)^-1 E_inc.
    Differentiating through the solve,

        dsigma/dchi_j = 2 dA Im sum_{c in j} conj(E_inc,c + z_c) E_c,
        z = G^H (I - G X)^-H (X E_inc).
    """
    d = G.polarization.ncomp
    area = G.grid.cell_area
    GH = G.adjoint
    einc = E_inc.values

    def fun_grad(chi):
        system = VIESystem(G, chi)
        e = system.solve(einc)
        weighted = system.chi_full * einc
        sigma = 2 * area * np.vdot(weighted, e).imag
        z = GH @ system.solve_adjoint(weighted)
        grad = 2 * area * np.imag(((einc + z).conj() * e).reshape(-1, d).sum(1))
        return sigma, grad

    return fun_grad


def adjoint_gradient(G: GreensOperator, chi, E_inc: FieldArray) -> np.ndarray:
    chi = chi.values if isinstance(chi, ContrastMap) else np.asarray(chi, dtype=float)
    return cross_section_objective(G, E_inc)(chi)[1]


def initial_contrasts(n_pixels: int, lower: float, upper: float, restarts: int, seed: int):
    """Restart set: chi = upper, chi = midpoint, then i.i.d. uniform draws."""
    starts = []
    for i in range(restarts):
        if i == 0:
            starts.append(np.full(n_pixels, upper))
        elif i == 1:
            starts.append(np.full(n_pixels, (upper + lower) / 2))
        else:
            starts.append(restart_rng(seed, i).uniform(lower, upper, n_pixels))
    return starts


def local_optimize(G: GreensOperator, E_inc: FieldArray, lower: float, upper: float,
                   restarts: int = 50, seed: int = 0, **ascent_options) -> LocalOptRun:
    if restarts < 1:
        raise ValueError("need at least one restart")
    n = G.grid.n_pixels
    starts = initial_contrasts(n, lower, upper, restarts, seed)
    runs = multistart(cross_section_objective(G, E_inc), starts, lower, upper,
                      **ascent_options)
    if not runs.finals:
        return LocalOptRun(ContrastMap.uniform(n, lower, lower, upper), float("nan"),
                           seed=seed, n_failed=len(runs.failed))
    best = runs.best_index
    chi = np.clip(runs.points[best], lower, upper)
    return LocalOptRun(ContrastMap(chi, lower, upper), runs.finals[best], runs.finals,
                       runs.iterations, seed, len(runs.failed))
