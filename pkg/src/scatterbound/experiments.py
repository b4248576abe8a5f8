"""Sweep orchestration over (polarization, R, chi0, alpha) and result persistence.

Every subcommand expands the configuration into cells, evaluates each cell
with a pure worker function (optionally in a process pool) and writes the
rows in cell-index order, so identical configurations give byte-identical
CSV and certificate files. Wall-clock times only go to ``run.json``.
"""

from __future__ import annotations

import csv
import json
import logging
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .alpha import alpha_loc, alpha_ub, contrast_bounds
from .config import SweepConfig
from .designopt import local_optimize
from .dual import DualCertificate, bound_curve, solve_dual, verify_certificate, weak_duality_sweep
from .forward import SingularSystemError, reference_field, sigma_over_wavelength
from .geometry import build_grid
from .greens import assemble, plane_wave

log = logging.getLogger(__name__)

BOUND_COLUMNS = [
    "polarization", "R_over_lambda", "chi0", "alpha_ub", "divergent", "neg_d_over_lambda",
    "localopt_best_over_lambda", "ratio", "cert_path", "status", "dual_converged",
    "cert_verified", "weak_duality_feasible", "weak_duality_violations", "config_hash",
]
ALPHA_COLUMNS = [
    "polarization", "R_over_lambda", "chi0", "alpha_ub", "divergent", "operator_norm",
    "alpha_loc", "alpha_loc_min", "alpha_loc_median", "alpha_loc_max", "n_failed",
    "loc_le_ub", "status", "config_hash",
]
ALPHA_DIST_COLUMNS = ["polarization", "R_over_lambda", "chi0", "restart", "alpha_loc"]
LOCALOPT_COLUMNS = [
    "polarization", "R_over_lambda", "chi0", "best_over_lambda", "min_over_lambda",
    "median_over_lambda", "n_restarts", "n_failed", "mean_iterations", "status", "config_hash",
]
DUAL_ALPHA_COLUMNS = [
    "polarization", "R_over_lambda", "chi0", "alpha", "alpha_source", "alpha_ub",
    "is_certified_bound", "neg_d_over_lambda", "localopt_best_over_lambda", "exceeds_bound",
    "dual_converged", "cert_path", "status", "config_hash",
]

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2, 3
FAILED_STATUSES = ("singular", "error")
EXCEED_RTOL = 1e-9  # ties at alpha_loc are roundoff, not an excess
# When alpha_ub diverges the box can hold a resonant structure and the ascent
# climbs toward a pole for its whole budget; the capped value is still a valid
# lower estimate of the supremum.
DIVERGENT_MAX_ITER = 200


def _ascent_options(a) -> dict:
    return {"max_iter": DIVERGENT_MAX_ITER} if a.divergent else {}


@dataclass(frozen=True)
class Cell:
    index: int
    polarization: str
    radius: float
    chi0: float


@dataclass
class CellOutput:
    rows: list
    certs: dict = field(default_factory=dict)      # relative path -> certificate json
    extra_rows: list = field(default_factory=list)
    seconds: float = 0.0


def expand_cells(config: SweepConfig) -> list[Cell]:
    out = []
    for pol in config.polarizations:
        for radius in config.radii:
            for chi0 in config.contrasts:
                out.append(Cell(len(out), pol, float(radius), float(chi0)))
    return out


@lru_cache(maxsize=8)
def _operator(polarization: str, wavelength: float, radius: float, spacing: float):
    grid = build_grid(wavelength, radius, spacing)
    G = assemble(grid, polarization)
    return G, plane_wave(grid, polarization)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        if np.isnan(x):
            return "nan"
        if np.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(float(x) + 0.0, ".12g")  # no negative zero
    return str(x)


def _base_row(config: SweepConfig, cell: Cell) -> dict:
    return {"polarization": cell.polarization,
            "R_over_lambda": cell.radius / config.wavelength,
            "chi0": cell.chi0, "config_hash": config.hash()}


def _problem_block(config: SweepConfig, cell: Cell, G) -> dict:
    return {"polarization": cell.polarization, "wavelength": config.wavelength,
            "radius": cell.radius, "spacing": config.spacing, "offset": G.grid.offset,
            "chi0": cell.chi0}


def _cert_name(kind: str, cell: Cell, j: int | None = None) -> str:
    suffix = "" if j is None else f"_a{j:03d}"
    return f"certs/{kind}_{cell.polarization}_{cell.index:04d}{suffix}.json"


def _setup(config: SweepConfig, cell: Cell):
    G, E_inc = _operator(cell.polarization, config.wavelength, cell.radius, config.spacing)
    lower, upper = contrast_bounds(cell.chi0)
    E_ref = reference_field(G, (lower + upper) / 2, E_inc)
    return G, E_inc, E_ref, lower, upper


def _certify(config, cell, G, E_inc, E_ref, lower, upper, alpha):
    cert = solve_dual(G, E_inc, E_ref, lower, upper, alpha, convention=config.convention)
    cert.problem = _problem_block(config, cell, G)
    return cert


def bound_cell(config: SweepConfig, cell: Cell) -> CellOutput:
    """alpha_ub, the dual bound at alpha_ub and the local-optimization baseline."""
    row = _base_row(config, cell)
    certs = {}
    try:
        G, E_inc, E_ref, lower, upper = _setup(config, cell)
        a = alpha_ub(G, lower, upper)
        row.update(alpha_ub=a.value, divergent=a.divergent, status="ok")
        if a.divergent:
            # no bound to compare against; the baseline lives in the localopt sweep
            row["status"] = "divergent"
        else:
            run = local_optimize(G, E_inc, lower, upper, restarts=config.restarts,
                                 seed=config.seed)
            local = sigma_over_wavelength(G.grid, run.best_value)
            row["localopt_best_over_lambda"] = local
            cert = _certify(config, cell, G, E_inc, E_ref, lower, upper, a.value)
            ok, _ = verify_certificate(cert, G, E_inc, E_ref)
            bound = sigma_over_wavelength(G.grid, cert.bound)
            path = _cert_name("bound", cell)
            certs[path] = cert.to_json()
            row.update(neg_d_over_lambda=bound, cert_path=path,
                       dual_converged=cert.converged, cert_verified=ok)
            if local > 0:
                row["ratio"] = bound / local
            if config.weak_duality_samples:
                rep = weak_duality_sweep(cert, G, E_inc, E_ref,
                                         samples=config.weak_duality_samples,
                                         seed=config.seed + cell.index)
                row.update(weak_duality_feasible=rep.n_feasible,
                           weak_duality_violations=rep.n_violations)
    except SingularSystemError as exc:
        log.warning("cell %d singular: %s", cell.index, exc)
        row["status"] = "singular"
    return CellOutput([row], certs)


def alpha_cell(config: SweepConfig, cell: Cell) -> CellOutput:
    row = _base_row(config, cell)
    extra = []
    try:
        G, E_inc, E_ref, lower, upper = _setup(config, cell)
        a = alpha_ub(G, lower, upper)
        loc = alpha_loc(G, lower, upper, E_inc, E_ref, restarts=config.restarts,
                        seed=config.seed, **_ascent_options(a))
        summary = loc.summary()
        row.update(alpha_ub=a.value, divergent=a.divergent, operator_norm=a.operator_norm,
                   alpha_loc=loc.value, alpha_loc_min=summary["min"],
                   alpha_loc_median=summary["median"], alpha_loc_max=summary["max"],
                   n_failed=loc.n_failed, loc_le_ub=loc.value <= a.value,
                   status="divergent" if a.divergent else "ok")
        for j, value in enumerate(loc.distribution):
            extra.append({**_base_row(config, cell), "restart": j, "alpha_loc": value})
    except SingularSystemError as exc:
        log.warning("cell %d singular: %s", cell.index, exc)
        row["status"] = "singular"
    return CellOutput([row], extra_rows=extra)


def localopt_cell(config: SweepConfig, cell: Cell) -> CellOutput:
    row = _base_row(config, cell)
    try:
        G, E_inc = _operator(cell.polarization, config.wavelength, cell.radius, config.spacing)
        lower, upper = contrast_bounds(cell.chi0)
        run = local_optimize(G, E_inc, lower, upper, restarts=config.restarts, seed=config.seed)
        finals = [sigma_over_wavelength(G.grid, v) for v in run.finals]
        row.update(best_over_lambda=max(finals), min_over_lambda=min(finals),
                   median_over_lambda=float(np.median(finals)), n_restarts=config.restarts,
                   n_failed=run.n_failed, mean_iterations=float(np.mean(run.iterations)),
                   status="ok")
    except (SingularSystemError, ValueError) as exc:
        log.warning("cell %d failed: %s", cell.index, exc)
        row["status"] = "singular" if isinstance(exc, SingularSystemError) else "error"
    return CellOutput([row])


def dual_alpha_cell(config: SweepConfig, cell: Cell) -> CellOutput:
    """The bound -d(alpha) for each requested alpha, chained by :func:`bound_curve`.

    Bounds at alpha < alpha_ub (for instance alpha_loc) are marked as not certified.
    """
    certs = {}
    rows = []
    base = _base_row(config, cell)
    try:
        G, E_inc, E_ref, lower, upper = _setup(config, cell)
        a = alpha_ub(G, lower, upper)
        local = None
        if config.alpha_mode == "explicit":
            alphas, source = list(config.alphas), "explicit"
        elif config.alpha_mode == "ub":
            alphas, source = [a.value], "alpha_ub"
        else:
            loc = alpha_loc(G, lower, upper, E_inc, E_ref, restarts=config.restarts,
                            seed=config.seed, **_ascent_options(a))
            alphas, source = [loc.value], "alpha_loc"
            run = local_optimize(G, E_inc, lower, upper, restarts=config.restarts,
                                 seed=config.seed, **_ascent_options(a))
            local = sigma_over_wavelength(G.grid, run.best_value)
        finite = [j for j, alpha in enumerate(alphas) if np.isfinite(alpha)]
        certs_found = bound_curve(G, E_inc, E_ref, lower, upper, [alphas[j] for j in finite],
                                  convention=config.convention)
        results = dict(zip(finite, certs_found))
        for cert in certs_found:
            cert.problem = _problem_block(config, cell, G)
        for j, alpha in enumerate(alphas):
            row = {**base, "alpha": alpha, "alpha_source": source, "alpha_ub": a.value,
                   "is_certified_bound": (not a.divergent) and alpha >= a.value,
                   "localopt_best_over_lambda": local}
            if j in results:
                cert = results[j]
                bound = sigma_over_wavelength(G.grid, cert.bound)
                path = _cert_name("dual", cell, j)
                certs[path] = cert.to_json()
                row.update(neg_d_over_lambda=bound, dual_converged=cert.converged,
                           cert_path=path, status="ok")
                if local is not None:
                    row["exceeds_bound"] = local > bound + EXCEED_RTOL * abs(bound)
            else:
                row["status"] = "divergent"
            rows.append(row)
    except SingularSystemError as exc:
        log.warning("cell %d singular: %s", cell.index, exc)
        alphas = config.alphas if config.alpha_mode == "explicit" else [None]
        rows = [{**base, "alpha": alpha, "status": "singular"} for alpha in alphas]
    return CellOutput(rows, certs)


COMMANDS = {
    "bound": (bound_cell, "bound.csv", BOUND_COLUMNS),
    "alpha": (alpha_cell, "alpha.csv", ALPHA_COLUMNS),
    "localopt": (localopt_cell, "localopt.csv", LOCALOPT_COLUMNS),
    "dual-at-alpha": (dual_alpha_cell, "dual_alpha.csv", DUAL_ALPHA_COLUMNS),
}


def _run_cell(args) -> CellOutput:
    kind, config, cell = args
    start = time.perf_counter()
    out = COMMANDS[kind][0](config, cell)
    out.seconds = time.perf_counter() - start
    log.info("%s cell %d (%s R=%g chi0=%g) done in %.2fs", kind, cell.index,
             cell.polarization, cell.radius, cell.chi0, out.seconds)
    return out


def _write_csv(path: Path, columns: list, rows: list) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c)) for c in columns])


@dataclass
class RunSummary:
    kind: str
    out: Path
    n_rows: int
    n_failed: int
    seconds: float

    @property
    def exit_code(self) -> int:
        return EXIT_PARTIAL if self.n_failed else EXIT_OK


def run_sweep(kind: str, config: SweepConfig, out=None) -> RunSummary:
    """Evaluate every cell of ``config`` for subcommand ``kind`` and write results."""
    func, csv_name, columns = COMMANDS[kind]
    out = Path(out or config.out)
    out.mkdir(parents=True, exist_ok=True)
    cells = expand_cells(config)
    start = time.perf_counter()
    jobs = [(kind, config, cell) for cell in cells]
    if config.threads > 1:
        with ProcessPoolExecutor(max_workers=config.threads) as pool:
            outputs = list(pool.map(_run_cell, jobs))
    else:
        outputs = [_run_cell(job) for job in jobs]
    total = time.perf_counter() - start

    rows = [row for o in outputs for row in o.rows]
    _write_csv(out / csv_name, columns, rows)
    if kind == "alpha":
        _write_csv(out / "alpha_distribution.csv", ALPHA_DIST_COLUMNS,
                   [r for o in outputs for r in o.extra_rows])
    certs = {path: data for o in outputs for path, data in o.certs.items()}
    if certs:
        (out / "certs").mkdir(exist_ok=True)
    for path, data in certs.items():
        (out / path).write_text(json.dumps(data, indent=1))
    n_failed = sum(row.get("status") in FAILED_STATUSES for row in rows)
    (out / "config.json").write_text(json.dumps(config.to_dict(), indent=2) + "\n")
    meta = {
        "command": kind,
        "version": __version__,
        "seed": config.seed,
        "config_hash": config.hash(),
        "convention": config.convention,
        "sigma_units": "cross-section over wavelength, sigma = (k/2) * 2 Im<E_inc, Phi>",
        "n_cells": len(cells),
        "n_rows": len(rows),
        "n_failed": n_failed,
        "timings": {"total_seconds": total,
                    "cell_seconds": [round(o.seconds, 4) for o in outputs]},
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }
    (out / "run.json").write_text(json.dumps(meta, indent=2) + "\n")
    return RunSummary(kind, out, len(rows), n_failed, total)


def cmd_bound(config: SweepConfig, out=None) -> RunSummary:
    return run_sweep("bound", config, out)


def cmd_alpha(config: SweepConfig, out=None) -> RunSummary:
    return run_sweep("alpha", config, out)


def cmd_localopt(config: SweepConfig, out=None) -> RunSummary:
    return run_sweep("localopt", config, out)


def cmd_dual_at_alpha(config: SweepConfig, out=None) -> RunSummary:
    return run_sweep("dual-at-alpha", config, out)


def verify_directory(out) -> tuple[int, list]:
    """Re-verify every certificate under ``out/certs``; returns (n_bad, report)."""
    report = []
    n_bad = 0
    for path in sorted(Path(out).glob("certs/*.json")):
        entry = {"path": str(path)}
        try:
            cert = DualCertificate.load(path)
            p = cert.problem
            G, E_inc = _operator(p["polarization"], p["wavelength"], p["radius"], p["spacing"])
            if G.grid.offset != p["offset"]:
                raise ValueError("lattice offset differs from the certificate")
            E_ref = reference_field(G, (cert.lower + cert.upper) / 2, E_inc)
            ok, res = verify_certificate(cert, G, E_inc, E_ref)
            entry.update(ok=ok, **{k: v for k, v in res.items() if k != "recomputed_value"})
        except (KeyError, ValueError, TypeError, OSError) as exc:
            ok = False
            entry.update(ok=False, error=str(exc))
        n_bad += not ok
        report.append(entry)
    return n_bad, report


def cmd_verify(out) -> int:
    n_bad, report = verify_directory(out)
    for entry in report:
        print(("PASS " if entry["ok"] else "FAIL ") + entry["path"])
    if not report:
        print(f"no certificates found under {out}")
        return EXIT_VALIDATION
    print(f"{len(report) - n_bad}/{len(report)} certificates verified")
    return EXIT_OK if n_bad == 0 else EXIT_VALIDATION
