"""Dielectric response on the imaginary frequency axis and Fresnel coefficients.

All models are non-magnetic. Frequencies are imaginary frequencies xi in
rad/s, wave numbers are in 1/m. The Fresnel coefficients are written in terms
of the axial decay rate ``kappa = sqrt(xi**2/c**2 + k**2)`` so that the
imaginary incidence angle (cos(theta) = c*kappa/xi >= 1) never appears
explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .constants import C

__all__ = [
    "PerfectReflector",
    "Plasma",
    "Drude",
    "Dielectric",
    "DielectricModel",
    "FresnelPair",
    "permittivity",
    "fresnel",
    "fresnel_zero_freq",
    "parse_material",
    "material_label",
]


@dataclass(frozen=True)
class PerfectReflector:
    """Ideal mirror, eps = infinity at every frequency."""


@dataclass(frozen=True)
class Plasma:
    """Plasma model eps(i xi) = 1 + omega_p**2/xi**2."""

    plasma_frequency: float

    def __post_init__(self):
        if not self.plasma_frequency > 0:
            raise ValueError("plasma_frequency must be positive")


@dataclass(frozen=True)
class Drude:
    """Drude model eps(i xi) = 1 + omega_p**2/(xi*(xi + gamma))."""

    plasma_frequency: float
    relaxation_rate: float

    def __post_init__(self):
        if not self.plasma_frequency > 0:
            raise ValueError("plasma_frequency must be positive")
        if not self.relaxation_rate > 0:
            raise ValueError("relaxation_rate must be positive")


@dataclass(frozen=True)
class Dielectric:
    """Non-dispersive dielectric with constant permittivity eps0 >= 1."""

    eps0: float

    def __post_init__(self):
        if not self.eps0 >= 1:
            raise ValueError("eps0 must be >= 1")


DielectricModel = Union[PerfectReflector, Plasma, Drude, Dielectric]


class FresnelPair(NamedTuple):
    r_te: np.ndarray | float
    r_tm: np.ndarray | float


def _check_xi(xi):
    xi = np.asarray(xi, dtype=float)
    if np.any(xi <= 0):
        raise ValueError("xi must be positive; use fresnel_zero_freq for xi = 0")
    return xi


def permittivity(model: DielectricModel, xi):
    """Permittivity eps(i xi).

    Returns ``math.inf`` for a perfect reflector. Accepts scalars or arrays.
    """
    xi = _check_xi(xi)
    if isinstance(model, PerfectReflector):
        out = np.full_like(xi, math.inf)
    elif isinstance(model, Plasma):
        out = 1 + (model.plasma_frequency / xi) ** 2
    elif isinstance(model, Drude):
        out = 1 + model.plasma_frequency**2 / (xi * (xi + model.relaxation_rate))
    elif isinstance(model, Dielectric):
        out = np.full_like(xi, model.eps0)
    else:
        raise TypeError(f"unknown dielectric model {model!r}")
    return out[()] if out.ndim == 0 else out


def _susceptibility_q2(model, xi):
    # (eps - 1) * xi**2 / c**2, finite as xi -> 0 for the metallic models
    if isinstance(model, Plasma):
        return np.broadcast_to((model.plasma_frequency / C) ** 2, np.shape(xi)).astype(float)
    if isinstance(model, Drude):
        return model.plasma_frequency**2 * xi / ((xi + model.relaxation_rate) * C**2)
    if isinstance(model, Dielectric):
        return (model.eps0 - 1) * (xi / C) ** 2
    raise TypeError(f"unknown dielectric model {model!r}")


def fresnel(model: DielectricModel, xi, kappa) -> FresnelPair:
    """Fresnel coefficients (r_TE, r_TM) at imaginary frequency.

    Parameters
    ----------
    model : DielectricModel
    xi : float or ndarray
        imaginary frequency in rad/s. ``xi == 0`` entries are routed to
        :func:`fresnel_zero_freq`.
    kappa : float or ndarray
        axial decay rate in 1/m, ``kappa >= xi/c``.

    Returns
    -------
    FresnelPair
        with -1 <= r_TE <= 0 <= r_TM <= 1 for eps >= 1.
    """
    xi, kappa = np.broadcast_arrays(np.asarray(xi, float), np.asarray(kappa, float))
    if np.any(xi < 0):
        raise ValueError("xi must be non-negative")
    q = xi / C
    if np.any(kappa < q * (1 - 1e-12)):
        raise ValueError("kappa must satisfy kappa >= xi/c")

    if isinstance(model, PerfectReflector):
        return FresnelPair(np.full(xi.shape, -1.0)[()], np.full(xi.shape, 1.0)[()])

    zero = xi == 0
    r_te = np.empty(xi.shape)
    r_tm = np.empty(xi.shape)
    if np.any(zero):
        z = fresnel_zero_freq(model, kappa[zero])
        r_te[zero], r_tm[zero] = z.r_te, z.r_tm
    pos = ~zero
    if np.any(pos):
        x, k = xi[pos], kappa[pos]
        chi = _susceptibility_q2(model, x)
        root = np.sqrt(k * k + chi)
        # kappa - root written without cancellation
        r_te[pos] = -chi / (k + root) ** 2
        with np.errstate(over="ignore"):
            eps = permittivity(model, x)
        # divide through by eps so that eps -> inf (tiny xi) stays finite
        g = root / eps
        r_tm[pos] = (k - g) / (k + g)
    return FresnelPair(r_te[()], r_tm[()])


def fresnel_zero_freq(model: DielectricModel, kappa) -> FresnelPair:
    """Zero-frequency limit of the Fresnel coefficients at decay rate kappa > 0."""
    kappa = np.asarray(kappa, dtype=float)
    if np.any(kappa <= 0):
        raise ValueError("kappa must be positive")
    ones = np.ones(kappa.shape)
    if isinstance(model, PerfectReflector):
        return FresnelPair((-ones)[()], ones[()])
    if isinstance(model, Drude):
        return FresnelPair((0 * ones)[()], ones[()])
    if isinstance(model, Plasma):
        kp = model.plasma_frequency / C
        root = np.sqrt(kappa**2 + kp**2)
        return FresnelPair((-(kp**2) / (kappa + root) ** 2)[()], ones[()])
    if isinstance(model, Dielectric):
        e = model.eps0
        return FresnelPair((0 * ones)[()], ((e - 1) / (e + 1) * ones)[()])
    raise TypeError(f"unknown dielectric model {model!r}")


def parse_material(spec: str) -> DielectricModel:
    """Parse ``perfect``, ``plasma:<omega_p>``, ``drude:<omega_p>:<gamma>`` or
    ``dielectric:<eps0>`` (SI units, rad/s)."""
    parts = spec.strip().lower().split(":")
    name, args = parts[0], parts[1:]
    try:
        values = [float(a) for a in args]
    except ValueError:
        raise ValueError(f"invalid number in material spec {spec!r}") from None
    expected = {"perfect": 0, "plasma": 1, "drude": 2, "dielectric": 1}
    if name not in expected:
        raise ValueError(f"unknown material {name!r} in {spec!r}")
    if len(values) != expected[name]:
        raise ValueError(f"material {name!r} takes {expected[name]} parameter(s), got {len(values)}")
    if name == "perfect":
        return PerfectReflector()
    if name == "plasma":
        return Plasma(*values)
    if name == "drude":
        return Drude(*values)
    return Dielectric(*values)


def material_label(model: DielectricModel) -> str:
    """Inverse of :func:`parse_material`."""
    if isinstance(model, PerfectReflector):
        return "perfect"
    if isinstance(model, Plasma):
        return f"plasma:{model.plasma_frequency:.17g}"
    if isinstance(model, Drude):
        return f"drude:{model.plasma_frequency:.17g}:{model.relaxation_rate:.17g}"
    return f"dielectric:{model.eps0:.17g}"
