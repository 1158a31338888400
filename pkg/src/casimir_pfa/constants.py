"""Physical constants (CODATA, via scipy.constants) used throughout the package."""

import math

from scipy.constants import Boltzmann as K_B
from scipy.constants import c as C
from scipy.constants import hbar as HBAR

__all__ = ["HBAR", "C", "K_B", "thermal_wavelength", "matsubara"]


def thermal_wavelength(T):
    """Thermal wavelength hbar*c/(k_B*T) in metres (``inf`` at T = 0)."""
    if T < 0:
        raise ValueError("temperature must be non-negative")
    if T == 0:
        return float("inf")
    return HBAR * C / (K_B * T)


def matsubara(n, T):
    """Matsubara frequency xi_n = 2*pi*n*k_B*T/hbar in rad/s."""
    return 2 * math.pi * n * K_B * T / HBAR
