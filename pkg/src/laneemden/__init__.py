"""Numerical laboratory for the planar Lane-Emden problem -Δu = |u|^{p-1} u.

The package solves the Dirichlet problem on the unit disk, annuli,
rectangles, and disk sectors, tracks solution families to very large
exponents p, and measures the concentration phenomena that emerge there:
bubble profiles, quantized energy levels, Morse indices, and the Green's
function limit of the rescaled solutions.
"""

from .geometry import (DomainSpec, RadialMesh, PlanarGrid, build_radial_mesh,
                       build_planar_grid, unit_disk, unit_square, annulus,
                       rectangle, disk_sector)
from .profiles import (SingularProfileParams, singular_params, regular_bubble,
                       singular_bubble, regular_mass, singular_mass,
                       liouville_residual, bubble_tower)
from .radial import (RadialSolution, Trajectory, SolverError, shoot,
                     solve_radial, radial_energy, predicted_scale)
from .spectrum import (SpectrumReport, morse_index_radial, quadratic_form,
                       first_eigenvalue, morse_index_planar)
from .asymptotics import (RescaledProfile, BubbleFit, ConcentrationReport,
                          scale_from_value, scale_of, locate_extrema, rescale,
                          fit_bubble, extract_concentration_points,
                          energy_report, nodal_metrics, limit_function_check)
from .green import (GreenEval, green_disk, green_gradient, green_eval,
                    robin_disk, robin_gradient, check_balance,
                    check_green_limit)
from .planar import (PlanarField, operators, nehari_project,
                     nodal_nehari_project, solve_positive, solve_nodal,
                     continue_in_p)

__version__ = "0.1.0"

__all__ = [
    "DomainSpec", "RadialMesh", "PlanarGrid", "build_radial_mesh",
    "build_planar_grid", "unit_disk", "unit_square", "annulus", "rectangle",
    "disk_sector",
    "SingularProfileParams", "singular_params", "regular_bubble",
    "singular_bubble", "regular_mass", "singular_mass", "liouville_residual",
    "bubble_tower",
    "RadialSolution", "Trajectory", "SolverError", "shoot", "solve_radial",
    "radial_energy", "predicted_scale",
    "SpectrumReport", "morse_index_radial", "quadratic_form",
    "first_eigenvalue", "morse_index_planar",
    "RescaledProfile", "BubbleFit", "ConcentrationReport", "scale_from_value",
    "scale_of", "locate_extrema", "rescale", "fit_bubble",
    "extract_concentration_points", "energy_report", "nodal_metrics",
    "limit_function_check",
    "GreenEval", "green_disk", "green_gradient", "green_eval", "robin_disk",
    "robin_gradient", "check_balance", "check_green_limit",
    "PlanarField", "operators", "nehari_project", "nodal_nehari_project",
    "solve_positive", "solve_nodal", "continue_in_p",
    "__version__",
]
