"""Two-sphere geometry; a plane is a sphere of infinite radius."""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["Geometry"]


@dataclass(frozen=True)
class Geometry:
    """Spheres of radii R1, R2 at surface-to-surface distance L (SI units).

    ``R2 = math.inf`` describes the plane-sphere setup.
    """

    R1: float
    R2: float
    L: float

    def __post_init__(self):
        if not (self.R1 > 0 and math.isfinite(self.R1)):
            raise ValueError("R1 must be positive and finite")
        if not self.R2 > 0:
            raise ValueError("R2 must be positive (math.inf for a plane)")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise ValueError("L must be positive and finite")

    @property
    def is_plane_sphere(self) -> bool:
        return math.isinf(self.R2)

    @property
    def script_L(self) -> float:
        """Centre-to-centre distance R1 + R2 + L (infinite for a plane)."""
        return self.R1 + self.R2 + self.L

    @property
    def R_eff(self) -> float:
        if self.is_plane_sphere:
            return self.R1
        return self.R1 * self.R2 / (self.R1 + self.R2)

    @property
    def mu(self) -> float:
        """R_small/(R1+R2) in [0, 1/2]; zero for the plane."""
        if self.is_plane_sphere:
            return 0.0
        return min(self.R1, self.R2) / (self.R1 + self.R2)

    def swapped(self) -> "Geometry":
        if self.is_plane_sphere:
            raise ValueError("cannot swap a plane into the first slot")
        return Geometry(self.R2, self.R1, self.L)
