"""Pixel discretization of a circular design region and the fields living on it."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class EmptyRegionError(ValueError):
    """Raised when no lattice cell center falls inside the design disc."""


class Polarization(str, Enum):
    TE = "TE"  # E along z: one complex component per pixel
    TM = "TM"  # E in the xy-plane: two components per pixel

    @property
    def ncomp(self) -> int:
        return 1 if self is Polarization.TE else 2


@dataclass(frozen=True, eq=False)
class PixelGrid:
    """Square-lattice cells whose centers lie inside a disc of radius ``radius``.

    Background is vacuum, so the wavenumber is ``2*pi/wavelength``.
    ``offset`` is the lattice shift in units of ``spacing``: 0.5 puts cell
    centers at half-integers (no center can sit exactly on the circle when
    ``radius/spacing`` is an integer), 0 puts a cell at the origin.
    """

    wavelength: float
    spacing: float
    radius: float
    centers: np.ndarray
    offset: float = 0.5

    def __post_init__(self):
        if self.spacing <= 0 or self.radius <= 0 or self.wavelength <= 0:
            raise ValueError("wavelength, spacing and radius must be positive")
        centers = np.array(self.centers, dtype=float).reshape(-1, 2)
        if len(centers) == 0:
            raise EmptyRegionError("empty region: no pixel centers inside the disc")
        if np.any(np.hypot(centers[:, 0], centers[:, 1]) >= self.radius):
            raise ValueError("pixel centers must lie strictly inside the disc")
        centers.setflags(write=False)
        object.__setattr__(self, "centers", centers)

    @property
    def k(self) -> float:
        return 2 * np.pi / self.wavelength

    @property
    def cell_area(self) -> float:
        return self.spacing**2

    @property
    def n_pixels(self) -> int:
        return len(self.centers)

    def subset(self, indices) -> PixelGrid:
        """Grid made of a subset of this grid's pixels (order follows ``indices``)."""
        return PixelGrid(self.wavelength, self.spacing, self.radius,
                         self.centers[np.asarray(indices)], self.offset)

    def same_as(self, other: PixelGrid) -> bool:
        if self is other:
            return True
        return (self.spacing == other.spacing and self.wavelength == other.wavelength
                and self.centers.shape == other.centers.shape
                and np.array_equal(self.centers, other.centers))

    def describe(self) -> dict:
        return {"wavelength": self.wavelength, "spacing": self.spacing,
                "radius": self.radius, "offset": self.offset,
                "n_pixels": self.n_pixels}


def build_grid(wavelength: float, radius: float, spacing: float,
               offset: float = 0.5) -> PixelGrid:
    """Discretize the disc ``|x| < radius`` into square cells of side ``spacing``.

    Pixels are ordered row-major: by y, then by x.
    """
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    if radius < spacing / 2:
        raise ValueError("radius must be at least half the grid spacing")
    n = int(np.ceil(radius / spacing)) + 1
    ticks = (np.arange(-n, n + 1) + offset) * spacing
    xx, yy = np.meshgrid(ticks, ticks)  # rows vary in y, columns in x
    inside = xx**2 + yy**2 < radius**2
    if not inside.any():
        raise EmptyRegionError(
            f"empty region: no cell centers within radius {radius} at spacing {spacing}")
    centers = np.column_stack([xx[inside], yy[inside]])
    return PixelGrid(wavelength, spacing, radius, centers, offset)


@dataclass(frozen=True, eq=False)
class FieldArray:
    """Complex field sampled on a grid, components interleaved per pixel.

    For TM the layout is ``(x1, y1, x2, y2, ...)``.
    """

    grid: PixelGrid
    polarization: Polarization
    values: np.ndarray

    def __post_init__(self):
        pol = Polarization(self.polarization)
        values = np.asarray(self.values, dtype=complex).ravel()
        if values.size != self.grid.n_pixels * pol.ncomp:
            raise ValueError(f"expected {self.grid.n_pixels * pol.ncomp} values, "
                             f"got {values.size}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "polarization", pol)
        object.__setattr__(self, "values", values)

    def per_pixel(self) -> np.ndarray:
        return self.values.reshape(self.grid.n_pixels, self.polarization.ncomp)

    def like(self, values) -> FieldArray:
        return FieldArray(self.grid, self.polarization, values)

    def __add__(self, other: FieldArray) -> FieldArray:
        _check_compatible(self, other)
        return self.like(self.values + other.values)

    def __sub__(self, other: FieldArray) -> FieldArray:
        _check_compatible(self, other)
        return self.like(self.values - other.values)

    def __mul__(self, scalar) -> FieldArray:
        return self.like(self.values * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class ContrastMap:
    """Real per-pixel permittivity contrast confined to ``[lower, upper]``."""

    values: np.ndarray
    lower: float
    upper: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        if self.lower > self.upper:
            raise ValueError("lower bound exceeds upper bound")
        if np.any(values < self.lower) or np.any(values > self.upper):
            raise ValueError("contrast outside its bounds")
        object.__setattr__(self, "values", values)

    @property
    def center(self) -> float:
        return (self.upper + self.lower) / 2

    @property
    def half_width(self) -> float:
        return abs(self.upper - self.lower) / 2

    @classmethod
    def uniform(cls, n_pixels: int, value: float, lower: float | None = None,
                upper: float | None = None) -> ContrastMap:
        lower = value if lower is None else lower
        upper = value if upper is None else upper
        return cls(np.full(n_pixels, float(value)), lower, upper)


def _check_compatible(u: FieldArray, v: FieldArray):
    if u.polarization is not v.polarization:
        raise ValueError("fields have different polarizations")
    if not u.grid.same_as(v.grid):
        raise ValueError("fields live on different grids")


def inner(u: FieldArray, v: FieldArray) -> complex:
    """Area-weighted inner product, conjugate-linear in ``u``."""
    _check_compatible(u, v)
    return complex(u.grid.cell_area * np.vdot(u.values, v.values))


def norm(u: FieldArray) -> float:
    return float(np.sqrt(u.grid.cell_area) * np.linalg.norm(u.values))
