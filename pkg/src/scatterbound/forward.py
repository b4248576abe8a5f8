"""Volume integral equation solves, cross-sections and operator norms."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import aslinearoperator

from .geometry import ContrastMap, FieldArray, inner, norm
from .greens import GreensOperator

RCOND_MIN = 1e-14
SVD_LIMIT = 3000


class SingularSystemError(RuntimeError):
    """The integral equation is resonant or numerically singular."""


class PowerIterationError(RuntimeError):
    def __init__(self, message, last_vector, gap):
        super().__init__(message)
        self.last_vector = last_vector
        self.gap = gap


@dataclass(frozen=True, eq=False)
class ScatterSolution:
    field: FieldArray
    current: FieldArray
    cross_section: float  # objective units, 2 Im<E_inc, Phi>
    residual: float


def _contrast_values(chi, n_pixels: int) -> np.ndarray:
    values = chi.values if isinstance(chi, ContrastMap) else np.asarray(chi, dtype=float)
    values = np.broadcast_to(values, (n_pixels,)) if values.ndim == 0 else values
    if values.shape != (n_pixels,):
        raise ValueError(f"expected {n_pixels} contrast values, got {values.shape}")
    return values


class VIESystem:
    """LU factorization of (I - G diag(chi)), reused for forward and adjoint solves."""

    def __init__(self, G: GreensOperator, chi):
        self.G = G
        self.chi = _contrast_values(chi, G.grid.n_pixels)
        self.chi_full = np.repeat(self.chi, G.polarization.ncomp)
        self.matrix = np.eye(G.size) - G.matrix * self.chi_full[None, :]
        with warnings.catch_warnings():
            # singularity is judged below from the condition estimate
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            self.lu = sla.lu_factor(self.matrix, check_finite=False)
        anorm = np.abs(self.matrix).sum(axis=0).max()
        gecon = sla.get_lapack_funcs("gecon", (self.matrix,))
        rcond, _ = gecon(self.lu[0], anorm, norm="1")
        self.rcond = float(rcond)
        if not np.isfinite(self.rcond) or self.rcond < RCOND_MIN:
            raise SingularSystemError(
                f"resonant/singular integral equation (rcond={self.rcond:.3e})")

    def solve(self, rhs: np.ndarray, refine: bool = True) -> np.ndarray:
        x = sla.lu_solve(self.lu, rhs, check_finite=False)
        if refine:
            x = x + sla.lu_solve(self.lu, rhs - self.matrix @ x, check_finite=False)
        return x

    def solve_adjoint(self, rhs: np.ndarray) -> np.ndarray:
        return sla.lu_solve(self.lu, rhs, trans=2, check_finite=False)


def solve_vie(G: GreensOperator, chi, E_inc: FieldArray) -> ScatterSolution:
    """Solve E = E_inc + G (chi E) for the total field inside the design region."""
    system = VIESystem(G, chi)
    return _solution_from_system(system, E_inc)


def _solution_from_system(system: VIESystem, E_inc: FieldArray) -> ScatterSolution:
    e = system.solve(E_inc.values)
    residual = np.linalg.norm(system.matrix @ e - E_inc.values) / np.linalg.norm(E_inc.values)
    field = E_inc.like(e)
    current = E_inc.like(system.chi_full * e)
    return ScatterSolution(field, current, cross_section(E_inc, current), float(residual))


def cross_section(E_inc: FieldArray, current: FieldArray) -> float:
    """2 Im<E_inc, Phi>, the negative of the cross-section objective.

    For a unit-amplitude incident wave the physical 2D cross-section (a
    length) is ``k/2`` times this value; see :func:`sigma_over_wavelength`.
    """
    return 2.0 * inner(E_inc, current).imag


def sigma_scale(grid) -> float:
    """Factor converting objective units into a physical cross-section."""
    return grid.k / 2


def sigma_over_wavelength(grid, value: float) -> float:
    return value * sigma_scale(grid) / grid.wavelength


def reference_field(G: GreensOperator, chi_bar: float, E_inc: FieldArray) -> FieldArray:
    """Field for the uniform contrast ``chi_bar``: (I - chi_bar G)^-1 E_inc."""
    return solve_vie(G, np.full(G.grid.n_pixels, float(chi_bar)), E_inc).field


def relative_deviation(E: FieldArray, E_ref: FieldArray) -> float:
    return norm(E - E_ref) / norm(E_ref)


def operator_norm(M, tol: float = 1e-10, max_iter: int = 20000, seed: int = 0,
                  method: str = "power") -> float:
    """Largest singular value of ``M``.

    ``method="power"`` runs power iteration on M^H M from a random start and
    stops when the estimate changes by less than ``tol`` relative; ``M`` may
    be a dense array or anything :func:`scipy.sparse.linalg.aslinearoperator`
    accepts (it needs ``rmatvec``). ``method="svd"`` takes the top singular
    value of a dense matrix from LAPACK. ``method="auto"`` uses the SVD for
    dense matrices up to :data:`SVD_LIMIT` rows and power iteration otherwise.
    Power iteration approaches the norm from below and is slow when the top
    singular values cluster, which is the case for the TM operators.
    """
    if method == "auto":
        dense = isinstance(M, np.ndarray) and M.shape[0] <= SVD_LIMIT
        method = "svd" if dense else "power"
    if method == "svd":
        M = np.asarray(M)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("operator must be square")
        return float(sla.svdvals(M, check_finite=False)[0])
    if method != "power":
        raise ValueError(f"unknown method {method!r}")
    op = aslinearoperator(M)
    n, m = op.shape
    if n != m:
        raise ValueError("operator must be square")
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n) + 1j * rng.normal(size=n)
    x /= np.linalg.norm(x)
    sigma = 0.0
    gap = np.inf
    for _ in range(max_iter):
        y = op.matvec(x)
        new_sigma = np.linalg.norm(y)
        if new_sigma == 0.0:
            return 0.0
        z = op.rmatvec(y)
        x = z / np.linalg.norm(z)
        gap = abs(new_sigma - sigma) / new_sigma
        sigma = new_sigma
        if gap <= tol:
            # ||M^H M x|| >= ||M x||^2 for unit x; the last product is the better estimate
            return float(max(sigma, np.sqrt(np.linalg.norm(z))))
    raise PowerIterationError(
        f"power iteration did not converge in {max_iter} steps (last gap {gap:.2e})",
        x, gap)
