"""Certified upper bounds on 2D scattering cross-sections of bounded-contrast scatterers."""

__version__ = "0.1.0"

from .geometry import ContrastMap, FieldArray, PixelGrid, Polarization, build_grid  # noqa: E402
from .greens import GreensOperator, assemble, plane_wave  # noqa: E402
from .forward import solve_vie, operator_norm  # noqa: E402
from .alpha import alpha_loc, alpha_ub  # noqa: E402
from .dual import DualCertificate, dual_objective, solve_dual  # noqa: E402
from .designopt import local_optimize  # noqa: E402
from .mie import mie_cross_section  # noqa: E402

__all__ = [
    "ContrastMap", "DualCertificate", "FieldArray", "GreensOperator", "PixelGrid",
    "Polarization", "alpha_loc", "alpha_ub", "assemble", "build_grid", "dual_objective",
    "local_optimize", "mie_cross_section", "operator_norm", "plane_wave", "solve_dual",
    "solve_vie",
]
