"""Cylindrical-wave series for plane-wave scattering by a homogeneous circular cylinder.

The incident wave exp(ikx) is expanded as sum_n i^n J_n(kr) e^{in theta}; the
scattered field as sum_n i^n b_n H_n(kr) e^{in theta}. TE (E along the axis)
matches E and dE/dr at the surface; TM (H along the axis) matches H and
(1/eps) dH/dr. In both cases

    sigma = (4/k) sum_n |b_n|^2        (a length in 2D)

and for lossless material |b_n|^2 = -Re b_n, which gives the optical-theorem
form sigma = -(4/k) sum_n Re b_n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import h1vp, hankel1, jv, jvp

from .geometry import Polarization


class MieConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class MieResult:
    sigma: float
    n_harmonics: int
    coefficients: np.ndarray  # b_0, b_1, ..., b_nmax (b_-n = b_n)
    truncation: float
    wavenumber: float

    @property
    def sigma_optical_theorem(self) -> float:
        b = self.coefficients
        total = b[0].real + 2 * b[1:].real.sum()
        return -4.0 / self.wavenumber * total


def _check_contrast(chi: float):
    if chi <= -1:
        raise ValueError("series requires positive permittivity (chi > -1)")


def _coefficient(n: int, x: float, m: float, pol: Polarization) -> complex:
    jn, djn = jv(n, x), jvp(n, x)
    jm, djm = jv(n, m * x), jvp(n, m * x)
    hn, dhn = hankel1(n, x), h1vp(n, x)
    if pol is Polarization.TE:
        return (m * jn * djm - djn * jm) / (jm * dhn - m * djm * hn)
    return (jn * djm - m * jm * djn) / (m * jm * dhn - djm * hn)


def mie_cross_section(radius: float, chi: float, wavelength: float, polarization,
                      tol: float = 1e-12, max_order: int = 200) -> MieResult:
    """Scattering cross-section of a cylinder of radius ``radius`` and contrast ``chi``."""
    _check_contrast(chi)
    pol = Polarization(polarization)
    k = 2 * np.pi / wavelength
    x, m = k * radius, np.sqrt(1.0 + chi)
    coeffs = []
    total = 0.0
    last = np.inf
    for n in range(max_order + 1):
        b = _coefficient(n, x, m, pol)
        coeffs.append(b)
        weight = abs(b) ** 2 * (1 if n == 0 else 2)
        total += weight
        last = weight
        if n >= max(2, int(np.ceil(m * x)) + 2) and weight <= tol * total:
            break
    else:
        raise MieConvergenceError(
            f"series not converged after {max_order} orders (size parameter {x:.3g}, "
            f"last term {last:.3e})")
    return MieResult(4.0 / k * total, len(coeffs), np.array(coeffs),
                     last / total if total else 0.0, k)


def far_field_cross_section(radius: float, chi: float, wavelength: float, polarization,
                            incidence_angle: float = 0.0, n_angles: int = 512) -> float:
    """Cross-section by integrating |f(theta)|^2 of the series far field.

    The incident direction enters through the phases e^{in(theta - theta_inc)};
    for a cylinder the result must not depend on it.
    """
    res = mie_cross_section(radius, chi, wavelength, polarization)
    k = 2 * np.pi / wavelength
    b = res.coefficients
    orders = np.arange(-(len(b) - 1), len(b))
    coef = b[np.abs(orders)]
    theta = np.linspace(0, 2 * np.pi, n_angles, endpoint=False)
    amp = (coef[None, :] * np.exp(1j * orders[None, :] * (theta[:, None] - incidence_angle))).sum(1)
    # H_n(kr) ~ sqrt(2/(pi k r)) e^{i(kr - n pi/2 - pi/4)}: |f|^2 = 2/(pi k) |sum b_n e^{in theta}|^2
    return float(2 / (np.pi * k) * np.mean(np.abs(amp) ** 2) * 2 * np.pi)


def radial_cross_section(radius: float, chi: float, wavelength: float, polarization,
                         n_orders: int | None = None, rtol: float = 1e-12) -> float:
    """Same cross-section from a numerical radial solve inside the cylinder.

    For each order the log-derivative y = u'/u of the regular interior
    solution obeys the Riccati equation
        y' = -y^2 - y/r - (k^2 eps - n^2/r^2),
    integrated outward from near the axis; the exterior coefficient then
    follows from matching y at the surface. Interior Bessel functions are
    never evaluated.
    """
    _check_contrast(chi)
    pol = Polarization(polarization)
    k = 2 * np.pi / wavelength
    eps = 1.0 + chi
    x = k * radius
    if n_orders is None:
        n_orders = mie_cross_section(radius, chi, wavelength, pol).n_harmonics
    kin2 = k**2 * eps
    total = 0.0
    for n in range(n_orders):
        r0 = radius * 1e-4
        y0 = n / r0 - kin2 * r0 / (2 * (n + 1))

        def rhs(r, y, n=n):
            return -y**2 - y / r - (kin2 - n**2 / r**2)

        sol = solve_ivp(rhs, (r0, radius), [y0], method="DOP853", rtol=rtol, atol=1e-14)
        if not sol.success:
            # a radial node of the interior solution makes y singular
            raise MieConvergenceError(f"radial integration failed at order {n}: {sol.message}")
        y_in = sol.y[0, -1]
        y_out = y_in if pol is Polarization.TE else y_in / eps
        jn, djn = jv(n, x), k * jvp(n, x)
        hn, dhn = hankel1(n, x), k * h1vp(n, x)
        b = (djn - y_out * jn) / (y_out * hn - dhn)
        total += abs(b) ** 2 * (1 if n == 0 else 2)
    return 4.0 / k * total
