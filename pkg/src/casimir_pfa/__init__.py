"""Casimir interaction of spheres in the plane-wave basis and its proximity force limit.

Modules
-------
materials     dielectric models and Fresnel coefficients at imaginary frequency
mie           Mie amplitudes at imaginary frequency, including xi -> 0
wkb           specular-reflection (WKB) asymptotics of the Mie amplitudes
polarization  TE/TM to scattering-plane basis change and reciprocity
roundtrip     numerical round-trip traces tr M^r
saddle        saddle-point matrix, eigenvalues and Hessian products
pfa           PFA free energy, force, thermal correction, effective area
cli           command line front end
"""

from .errors import BudgetExceeded, ConvergenceError
from .geometry import Geometry
from .logscaled import LogScaled
from .materials import Dielectric, Drude, PerfectReflector, Plasma, fresnel, parse_material, permittivity
from .pfa import ThermalSpec, force, free_energy, free_energy_zero_T, thermal_correction, tr_m_r_pfa
from .roundtrip import QuadratureSpec, trace_m_r, trace_m_r_plane_sphere

__all__ = [
    "BudgetExceeded",
    "ConvergenceError",
    "Geometry",
    "LogScaled",
    "PerfectReflector",
    "Plasma",
    "Drude",
    "Dielectric",
    "fresnel",
    "permittivity",
    "parse_material",
    "ThermalSpec",
    "free_energy",
    "free_energy_zero_T",
    "force",
    "thermal_correction",
    "tr_m_r_pfa",
    "QuadratureSpec",
    "trace_m_r",
    "trace_m_r_plane_sphere",
]

__version__ = "0.1.0"
