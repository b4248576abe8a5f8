"""Self-checks behind the ``validate`` subcommand.

Each check returns a :class:`Check` with a pass flag and the numbers it was
judged on; :func:`run_validation` collects them into one report.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .alpha import alpha_ub, contrast_bounds, deviation_objective
from .designopt import cross_section_objective, local_optimize
from .dual import DEFAULT_CONVENTION, calibrate_convention, solve_dual, weak_duality_sweep
from .forward import reference_field, sigma_over_wavelength, solve_vie
from .geometry import build_grid
from .greens import assemble, plane_wave
from .mie import mie_cross_section, radial_cross_section


@dataclass
class Check:
    name: str
    ok: bool
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}"


def disc_cross_section(polarization: str, radius: float, chi: float, spacing: float,
                       wavelength: float = 1.0) -> float:
    """sigma/lambda0 of a homogeneous disc from the discretized integral equation."""
    grid = build_grid(wavelength, radius, spacing)
    G = assemble(grid, polarization)
    E_inc = plane_wave(grid, polarization)
    sol = solve_vie(G, np.full(grid.n_pixels, chi), E_inc)
    return sigma_over_wavelength(grid, sol.cross_section)


def check_mie(radius: float = 0.1, chi: float = 1.0, spacing: float = 0.01,
              tolerances=(("TE", 0.02), ("TM", 0.03))) -> Check:
    details = {}
    ok = True
    for pol, tol in tolerances:
        series = mie_cross_section(radius, chi, 1.0, pol).sigma
        ode = radial_cross_section(radius, chi, 1.0, pol)
        vie = disc_cross_section(pol, radius, chi, spacing)
        rel = abs(vie - series) / series
        oracle_gap = abs(ode - series) / series
        ok &= rel <= tol and oracle_gap <= 1e-4
        details[pol] = {"vie": vie, "mie": series, "radial_ode": ode,
                        "relative_error": rel, "oracle_gap": oracle_gap}
    return Check("mie_oracle", bool(ok), details)


def check_grid_convergence(radius: float = 0.1, chi: float = 1.0,
                           spacings=(1 / 50, 1 / 100, 1 / 200), min_ratio: float = 1.5,
                           polarizations=("TE", "TM")) -> Check:
    details = {}
    ok = True
    for pol in polarizations:
        values = [disc_cross_section(pol, radius, chi, h) for h in spacings]
        diffs = np.abs(np.diff(values))
        ratios = diffs[:-1] / np.maximum(diffs[1:], 1e-300)
        ok &= bool(np.all(ratios >= min_ratio))
        details[pol] = {"values": values, "differences": diffs.tolist(),
                        "shrink_ratios": ratios.tolist()}
    return Check("grid_convergence", bool(ok), details)


DEFAULT_DUALITY_CASES = (("TE", 0.05, 0.02, 0.5), ("TE", 0.05, 0.02, -2.0),
                         ("TM", 0.05, 0.02, 0.5), ("TM", 0.05, 0.02, -0.5),
                         ("TE", 0.1, 0.02, 2.0))


def check_weak_duality(cases=DEFAULT_DUALITY_CASES, samples: int = 100, seed: int = 0,
                       convention: str = DEFAULT_CONVENTION) -> Check:
    """Bounds at alpha_ub and at half of it, against random feasible structures."""
    details = {}
    ok = True
    for pol, radius, spacing, chi0 in cases:
        G = assemble(build_grid(1.0, radius, spacing), pol)
        E_inc = plane_wave(G.grid, pol)
        lower, upper = contrast_bounds(chi0)
        E_ref = reference_field(G, (lower + upper) / 2, E_inc)
        a = alpha_ub(G, lower, upper)
        if a.divergent:
            continue
        for alpha in (a.value, a.value / 2):
            cert = solve_dual(G, E_inc, E_ref, lower, upper, alpha, convention=convention)
            rep = weak_duality_sweep(cert, G, E_inc, E_ref, samples=samples, seed=seed)
            ok &= rep.ok
            details[f"{pol} R={radius} chi0={chi0} alpha={alpha:.4g}"] = {
                "feasible": rep.n_feasible, "violations": rep.n_violations,
                "max_excess": rep.max_excess}
    return Check("weak_duality", bool(ok), details)


def check_convention(expected: str = DEFAULT_CONVENTION, samples: int = 100) -> Check:
    result = calibrate_convention(samples=samples)
    return Check("pairing_convention", result.selected == expected,
                 {"selected": result.selected, "table": result.table})


def finite_difference_error(fun_grad, x: np.ndarray, step: float = 1e-6) -> float:
    """max |central difference - gradient| / max |gradient| over all coordinates."""
    _, grad = fun_grad(x)
    fd = np.empty_like(grad)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = step
        fd[j] = (fun_grad(x + e)[0] - fun_grad(x - e)[0]) / (2 * step)
    return float(np.abs(fd - grad).max() / max(np.abs(grad).max(), 1e-300))


def check_gradients(points: int = 5, tol: float = 1e-4, seed: int = 0,
                    cases=(("TE", 0.05, 0.02, 1.0), ("TM", 0.05, 0.02, -0.5))) -> Check:
    rng = np.random.default_rng(seed)
    details = {}
    ok = True
    for pol, radius, spacing, chi0 in cases:
        G = assemble(build_grid(1.0, radius, spacing), pol)
        E_inc = plane_wave(G.grid, pol)
        lower, upper = contrast_bounds(chi0)
        E_ref = reference_field(G, (lower + upper) / 2, E_inc)
        for label, fg in (("cross_section", cross_section_objective(G, E_inc)),
                          ("deviation", deviation_objective(G, E_inc, E_ref))):
            errors = [finite_difference_error(fg, rng.uniform(lower, upper, G.grid.n_pixels))
                      for _ in range(points)]
            ok &= max(errors) <= tol
            details[f"{pol} R={radius} chi0={chi0} {label}"] = errors
    return Check("gradients", bool(ok), details)


def check_bound_dominance(radius: float = 0.025, spacing: float = 0.01,
                          contrasts=(0.25, 0.5, 1.0), restarts: int = 8,
                          window=(1.0, 1.3)) -> Check:
    details = {}
    ok = True
    G = assemble(build_grid(1.0, radius, spacing), "TE")
    E_inc = plane_wave(G.grid, "TE")
    for chi0 in contrasts:
        lower, upper = contrast_bounds(chi0)
        E_ref = reference_field(G, (lower + upper) / 2, E_inc)
        a = alpha_ub(G, lower, upper)
        cert = solve_dual(G, E_inc, E_ref, lower, upper, a.value)
        best = local_optimize(G, E_inc, lower, upper, restarts=restarts).best_value
        ratio = cert.bound / best
        ok &= window[0] <= ratio <= window[1]
        details[str(chi0)] = {"bound": cert.bound, "local_best": best, "ratio": ratio}
    return Check("bound_tightness_TE", bool(ok), details)


def run_validation(quick: bool = False, convention: str = DEFAULT_CONVENTION) -> list[Check]:
    """All checks; ``quick`` skips the finest grid of the convergence study."""
    spacings = (1 / 50, 1 / 100) if quick else (1 / 50, 1 / 100, 1 / 200)
    checks = [check_mie(), check_convention(convention), check_weak_duality(convention=convention),
              check_gradients(), check_bound_dominance()]
    if len(spacings) == 3:
        checks.append(check_grid_convergence(spacings=spacings))
    return checks
