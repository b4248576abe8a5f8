"""Pulse-basis / point-matching discretization of the 2D vacuum Green's operator.

Conventions: time dependence exp(-i w t), scalar kernel g(r) = (i/4) H0(kr)
solving (lap + k^2) g = -delta. The operator includes the k^2 factor, so that
the field equation reads E = E_inc + G (chi E) with chi the dimensionless
contrast.

Each source cell is replaced by the disc of equal area (radius a = dx/sqrt(pi)).
For an observation point outside that disc the addition theorem gives the
exact integral

    int_disc H0(k|x - x'|) dA' = (2 pi a / k) J1(ka) H0(k r),

so off-diagonal entries are the point kernel times (2 pi a / k) J1(ka).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import hankel1, jv

from .geometry import FieldArray, PixelGrid, Polarization


@dataclass(frozen=True, eq=False)
class GreensOperator:
    grid: PixelGrid
    polarization: Polarization
    matrix: np.ndarray

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def adjoint(self) -> np.ndarray:
        # uniform cell weights: the weighted adjoint is the conjugate transpose
        return self.matrix.conj().T

    def apply(self, field: FieldArray) -> FieldArray:
        return field.like(self.matrix @ field.values)


def equivalent_radius(spacing: float) -> float:
    return spacing / np.sqrt(np.pi)


def te_self_term(k: float, spacing: float) -> complex:
    """k^2 * int_{disc a} (i/4) H0(k rho) dA, evaluated at the disc center."""
    a = equivalent_radius(spacing)
    return 1j * np.pi * k * a / 2 * hankel1(1, k * a) - 1.0


def _pair_geometry(grid: PixelGrid):
    diff = grid.centers[:, None, :] - grid.centers[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    np.fill_diagonal(dist, 1.0)  # placeholder, diagonal is overwritten
    return diff, dist


def assemble_te(grid: PixelGrid) -> GreensOperator:
    k, a = grid.k, equivalent_radius(grid.spacing)
    _, dist = _pair_geometry(grid)
    prefactor = 1j * np.pi * k * a / 2 * jv(1, k * a)
    mat = prefactor * hankel1(0, k * dist)
    np.fill_diagonal(mat, te_self_term(k, grid.spacing))
    return GreensOperator(grid, Polarization.TE, mat)


def assemble_tm(grid: PixelGrid) -> GreensOperator:
    """Dyadic operator (k^2 I + grad grad) g for in-plane fields.

    Off-diagonal 2x2 blocks:
        (i pi k a / 2) J1(ka) [(H0 - H1/x) I - (H0 - 2 H1/x) r r^T]
    with x = k r and r the unit separation vector. The self block is (k^2 S_te - 1)/2 * I: the principal-value
    part k^2 S_te / 2 plus the -1/2 depolarization of a circular exclusion.
    """
    k, a = grid.k, equivalent_radius(grid.spacing)
    n = grid.n_pixels
    diff, dist = _pair_geometry(grid)
    x = k * dist
    h0, h1 = hankel1(0, x), hankel1(1, x)
    rhat = diff / dist[..., None]
    prefactor = 1j * np.pi * k * a / 2 * jv(1, k * a)
    iso = prefactor * (h0 - h1 / x)
    aniso = prefactor * (h0 - 2 * h1 / x)
    blocks = np.empty((n, n, 2, 2), dtype=complex)
    for p in range(2):
        for q in range(2):
            blocks[..., p, q] = (p == q) * iso - aniso * rhat[..., p] * rhat[..., q]
    diag = 0.5 * (te_self_term(k, grid.spacing) - 1.0)
    idx = np.arange(n)
    blocks[idx, idx] = diag * np.eye(2)
    mat = blocks.transpose(0, 2, 1, 3).reshape(2 * n, 2 * n)
    return GreensOperator(grid, Polarization.TM, mat)


def assemble(grid: PixelGrid, polarization) -> GreensOperator:
    pol = Polarization(polarization)
    return assemble_te(grid) if pol is Polarization.TE else assemble_tm(grid)


def plane_wave(grid: PixelGrid, polarization, direction=(1.0, 0.0)) -> FieldArray:
    """Unit-amplitude plane wave exp(i k d.x); TM carries the in-plane vector
    obtained by rotating ``d`` by +90 degrees."""
    pol = Polarization(polarization)
    d = np.asarray(direction, dtype=float)
    length = np.linalg.norm(d)
    if length == 0:
        raise ValueError("propagation direction must be nonzero")
    if abs(length - 1) > 1e-12:
        raise ValueError("propagation direction must be a unit vector")
    phase = np.exp(1j * grid.k * (grid.centers @ d))
    if pol is Polarization.TE:
        return FieldArray(grid, pol, phase)
    pvec = np.array([-d[1], d[0]])
    return FieldArray(grid, pol, (phase[:, None] * pvec[None, :]).ravel())
