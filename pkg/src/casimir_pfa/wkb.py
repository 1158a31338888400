"""Specular-reflection (WKB) asymptotics of Mie scattering at imaginary frequency.

For large size parameters the direct-reflection term of the Mie amplitudes is

    S_p ~ (x/2) r_p e^{2 x sin(Theta/2)},

with the Fresnel coefficient taken at the incidence angle (pi - Theta)/2 on
the local tangent plane, i.e. at ``cos(theta) = sin(Theta/2)``. In wave
number form the Fresnel coefficient is simply evaluated at the decay rate
``kappa_eff = sin(Theta/2) xi/c``, which stays finite at xi = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import C
from .logscaled import LogScaled
from .materials import Dielectric, DielectricModel, PerfectReflector, fresnel
from .mie import ScatteringKinematics, scattering_angle
from .polarization import TE, TM, PlaneWaveMode, abcd

__all__ = ["ReflectionElements", "WkbReflection", "amplitude", "amplitude_zero_freq", "reflection_element"]


def _polarization(p):
    if p in (1, TE):
        return TE
    if p in (2, TM):
        return TM
    raise ValueError("polarization must be 'TE'/1 or 'TM'/2")


def _fresnel_at(model, xi, kappa_eff, p):
    rte, rtm = fresnel(model, xi, kappa_eff)
    return rte if p == TE else rtm


def amplitude(p, kin: ScatteringKinematics, x: float, model: DielectricModel, radius: float | None = None):
    """WKB amplitude S_p as a LogScaled value.

    ``radius`` is needed for dispersive materials (xi = x c / radius).
    """
    p = _polarization(p)
    if x < 0:
        raise ValueError("x must be non-negative")
    s = np.asarray(kin.sin_half_theta, dtype=float)
    if x == 0:
        return LogScaled.zero(s.shape)
    if isinstance(model, (PerfectReflector, Dielectric)):
        # Fresnel coefficient depends on kappa/q = sin(Theta/2) only
        r = _fresnel_at(model, C, s, p)
    else:
        if radius is None:
            raise ValueError("dispersive materials need the sphere radius")
        xi = x * C / radius
        r = _fresnel_at(model, xi, s * xi / C, p)
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        log = math.log(x / 2) + np.log(np.abs(r)) + 2 * x * s
    return LogScaled(np.sign(r)[()], np.where(r == 0, -np.inf, log)[()])


def amplitude_zero_freq(p, kin: ScatteringKinematics, R: float, model: DielectricModel):
    """xi -> 0 limit of S_p / x: ``(1/2) r_p(0) exp(2 R kappa_eff)``."""
    p = _polarization(p)
    keff = np.asarray(kin.kappa_eff, dtype=float)
    r = np.asarray(_fresnel_at(model, np.zeros_like(keff), keff, p), dtype=float)
    with np.errstate(divide="ignore"):
        log = np.log(np.abs(r) / 2) + 2 * R * keff
    return LogScaled(np.sign(r)[()], np.where(r == 0, -np.inf, log)[()])


@dataclass(frozen=True)
class ReflectionElements:
    """Sphere reflection matrix elements <k_j p_j|R|k_i p_i> = prefactor * e^exponent * rho[p_j, p_i].

    ``exponent = 2 (xi R/c) sin(Theta/2) = 2 R kappa_eff`` is kept apart so
    callers can cancel it against translation factors before exponentiating.
    ``prefactor = pi R/kappa_j``, so that rho tends to the Fresnel
    combination of the tangent plane in the specular limit.
    """

    rho: dict
    exponent: np.ndarray | float
    prefactor: np.ndarray | float

    def element(self, p_out, p_in) -> LogScaled:
        r = np.asarray(self.rho[(_polarization(p_out), _polarization(p_in))], dtype=float)
        with np.errstate(divide="ignore"):
            log = np.log(np.abs(r)) + np.log(self.prefactor) + self.exponent
        return LogScaled(np.sign(r)[()], np.where(r == 0, -np.inf, log)[()])


WkbReflection = ReflectionElements


def _check_reflection_pair(mode_in, mode_out):
    if not np.allclose(mode_in.xi, mode_out.xi, rtol=1e-14, atol=0):
        raise ValueError("modes must share the same frequency")
    if np.any(np.asarray(mode_in.s) * np.asarray(mode_out.s) != -1):
        raise ValueError("a reflection reverses the propagation sign")


def reflection_element(mode_in: PlaneWaveMode, mode_out: PlaneWaveMode, R: float, model: DielectricModel) -> WkbReflection:
    """WKB reflection matrix elements for all four polarization pairs."""
    _check_reflection_pair(mode_in, mode_out)
    kin = scattering_angle(
        mode_in.k, mode_out.k, np.asarray(mode_out.phi) - np.asarray(mode_in.phi),
        mode_in.kappa, mode_out.kappa, mode_in.xi,
    )
    a, b, c, d = abcd(mode_in, mode_out)
    rte, rtm = fresnel(model, mode_in.xi, kin.kappa_eff)
    rho = {
        (TM, TM): a * rtm + b * rte,
        (TE, TE): a * rte + b * rtm,
        (TM, TE): -c * rte - d * rtm,
        (TE, TM): c * rtm + d * rte,
    }
    return WkbReflection(rho, 2 * R * np.asarray(kin.kappa_eff), np.pi * R / np.asarray(mode_out.kappa))
