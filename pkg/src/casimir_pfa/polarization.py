"""Change of polarization basis between the TE/TM basis and the scattering plane.

A plane wave at imaginary frequency is labelled by its transverse wave vector
(k, phi), polarization p and propagation sign ``s = +1/-1`` along the z axis
(upward/downward; written as a second ``phi`` in much of the literature).
The coefficients A, B, C, D relate the reflection matrix elements in the
TE/TM basis to the Mie amplitudes S1, S2 defined in the scattering plane.

All functions broadcast over numpy arrays in the mode fields.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .constants import C
from .logscaled import LogScaled

__all__ = [
    "TE",
    "TM",
    "PlaneWaveMode",
    "AbcdCoefficients",
    "SingularityError",
    "abcd",
    "abcd_from_wavenumbers",
    "basis_dot_products",
    "abcd_from_dot_products",
    "check_reciprocity",
]

TE = "TE"
TM = "TM"

# relative distance of |cos(Theta)| from 1 below which the denominator is treated as zero
DEGENERACY_TOL = 1e-12


class SingularityError(ArithmeticError):
    """The basis change is undefined (exact backscattering off the axis)."""


@dataclass(frozen=True)
class PlaneWaveMode:
    """Plane wave |xi, k, phi, s, p> with ``kappa = sqrt(xi**2/c**2 + k**2)``."""

    xi: float | np.ndarray
    k: float | np.ndarray
    phi: float | np.ndarray = 0.0
    s: int | np.ndarray = 1
    p: str = TM

    def __post_init__(self):
        if np.any(np.asarray(self.xi) < 0) or np.any(np.asarray(self.k) < 0):
            raise ValueError("xi and k must be non-negative")
        if not np.all(np.isin(np.asarray(self.s), (-1, 1))):
            raise ValueError("propagation sign s must be +1 or -1")
        if self.p not in (TE, TM):
            raise ValueError("polarization must be 'TE' or 'TM'")

    @property
    def kappa(self):
        return np.sqrt((np.asarray(self.xi) / C) ** 2 + np.asarray(self.k) ** 2)[()]

    def reversed(self):
        """The mode -K: transverse vector and propagation direction flipped."""
        return replace(self, phi=np.asarray(self.phi) + np.pi, s=-np.asarray(self.s))

    def with_polarization(self, p):
        return replace(self, p=p)


class AbcdCoefficients(NamedTuple):
    a: np.ndarray | float
    b: np.ndarray | float
    c: np.ndarray | float
    d: np.ndarray | float


def abcd_from_wavenumbers(q, k_i, k_j, dphi, kappa_i, kappa_j, s_i, s_j) -> AbcdCoefficients:
    """A, B, C, D with all frequencies expressed as wave numbers (q = xi/c).

    ``dphi = phi_j - phi_i``. Degenerate denominators are replaced by the
    analytic limits q -> 0 (A = -s_i s_j) and dphi -> 0 (A = 1); any other
    degeneracy raises :class:`SingularityError`.
    """
    q, k_i, k_j, dphi, ka_i, ka_j, s_i, s_j = np.broadcast_arrays(
        *[np.asarray(v, dtype=float) for v in (q, k_i, k_j, dphi, kappa_i, kappa_j, s_i, s_j)]
    )
    cphi, sphi = np.cos(dphi), np.sin(dphi)
    ss = s_i * s_j
    kk = k_i * k_j
    q2 = q * q
    # E = kappa_i kappa_j - q^2 written without cancellation. The denominator
    # q^4 - u^2 with u = kk cos - ss kappa_i kappa_j, and the numerator of A,
    # are expanded in E so that nothing of order q^4 cancels near the axis.
    e = (q2 * (k_i**2 + k_j**2) + kk**2) / (ka_i * ka_j + q2)
    flip = ss < 0
    small = np.where(flip, kk * cphi + e, kk * cphi - e)
    large = np.where(flip, 2 * q2 + e + kk * cphi, 2 * q2 + e - kk * cphi)
    den = np.where(flip, -small * large, small * large)
    common = (q2 + e) * kk * (1 + cphi**2)
    odd = (2 * q2 * e + e * e + kk * kk) * cphi
    a_num = np.where(flip, -(common + odd), common - odd)
    degenerate = np.abs(small) <= DEGENERACY_TOL * (np.abs(kk) + e)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = a_num / den
        b = -q2 * kk * sphi**2 / den
        c = q * sphi * (kk * s_i * ka_i * cphi - k_i**2 * s_j * ka_j) / den
        d = q * sphi * (kk * s_j * ka_j * cphi - k_j**2 * s_i * ka_i) / den

    static = q == 0
    aligned = degenerate & ~static & ((kk == 0) | (np.abs(sphi) < 1e-12) & (cphi > 0))
    bad = degenerate & ~static & ~aligned
    if np.any(bad):
        raise SingularityError("basis change undefined for exact backscattering with dphi != 0")
    a = np.where(static, -ss, np.where(aligned, np.where(kk == 0, cphi, 1.0), a))
    zero = static | aligned
    b = np.where(zero, 0.0, b)
    c = np.where(zero, 0.0, c)
    d = np.where(zero, 0.0, d)
    return AbcdCoefficients(a[()], b[()], c[()], d[()])


def abcd(mode_i: PlaneWaveMode, mode_j: PlaneWaveMode) -> AbcdCoefficients:
    """Basis-change coefficients for scattering mode_i (incoming) into mode_j."""
    if not np.allclose(mode_i.xi, mode_j.xi, rtol=1e-14, atol=0):
        raise ValueError("modes must share the same frequency")
    return abcd_from_wavenumbers(
        np.asarray(mode_i.xi) / C,
        mode_i.k,
        mode_j.k,
        np.asarray(mode_j.phi) - np.asarray(mode_i.phi),
        mode_i.kappa,
        mode_j.kappa,
        mode_i.s,
        mode_j.s,
    )


def basis_dot_products(mode_i: PlaneWaveMode, mode_j: PlaneWaveMode):
    """Scalar products (TE.TE, TM.TM, TE_i.TM_j, TM_i.TE_j) of the polarization vectors.

    Only defined for xi > 0.
    """
    q = np.asarray(mode_i.xi, dtype=float) / C
    if np.any(q <= 0):
        raise ValueError("dot products are defined for xi > 0 only")
    phi = np.asarray(mode_j.phi) - np.asarray(mode_i.phi)
    si, sj = np.asarray(mode_i.s), np.asarray(mode_j.s)
    ki, kj, kai, kaj = mode_i.k, mode_j.k, mode_i.kappa, mode_j.kappa
    te_te = np.cos(phi)
    tm_tm = -(ki * kj - si * sj * kai * kaj * np.cos(phi)) / q**2
    te_tm = -sj * kaj / q * np.sin(phi)
    tm_te = si * kai / q * np.sin(phi)
    return te_te[()], np.asarray(tm_tm)[()], np.asarray(te_tm)[()], np.asarray(tm_te)[()]


def abcd_from_dot_products(mode_i: PlaneWaveMode, mode_j: PlaneWaveMode) -> AbcdCoefficients:
    """Solve the linear relations between dot products and A, B, C, D.

    TE.TE = A + B cos(Theta), TM.TM = A cos(Theta) + B,
    TE_i.TM_j = -C - D cos(Theta), TM_i.TE_j = C cos(Theta) + D.
    Independent of :func:`abcd`; used to check it.
    """
    q = np.asarray(mode_i.xi, dtype=float) / C
    phi = np.asarray(mode_j.phi) - np.asarray(mode_i.phi)
    ss = np.asarray(mode_i.s) * np.asarray(mode_j.s)
    # scattering angle between K_i and K_j: cos = (k_i.k_j + s_i s_j K_zi K_zj)/|K|^2, K_z = i kappa
    cos_t = (mode_i.k * mode_j.k * np.cos(phi) - ss * mode_i.kappa * mode_j.kappa) / (-(q**2))
    te_te, tm_tm, te_tm, tm_te = basis_dot_products(mode_i, mode_j)
    det = 1 - cos_t**2
    a = (te_te - cos_t * tm_tm) / det
    b = (tm_tm - cos_t * te_te) / det
    # -C - D c = te_tm ; C c + D = tm_te
    c = -(te_tm + cos_t * tm_te) / det
    d = (tm_te + cos_t * te_tm) / det
    return AbcdCoefficients(a[()], b[()], c[()], d[()])


def check_reciprocity(mode_i: PlaneWaveMode, mode_j: PlaneWaveMode, element, tol=1e-10):
    """Check kappa_i <K_i,p_i|R|K_j,p_j> = kappa_j (-1)^(p_i+p_j) <-K_j,p_j|R|-K_i,p_i>.

    ``element(mode_in, mode_out)`` must return the matrix element (a float,
    array or LogScaled) for the polarizations carried by the modes. All four
    polarization combinations are checked; violations are measured relative
    to the largest of the four elements of each mode pair.

    Returns
    -------
    (bool, float)
        whether the largest relative violation is below ``tol``, and that
        violation.
    """
    pairs = []
    for p_i in (TE, TM):
        for p_j in (TE, TM):
            mi, mj = mode_i.with_polarization(p_i), mode_j.with_polarization(p_j)
            lhs = element(mj, mi)
            rhs = element(mi.reversed(), mj.reversed())
            sign = 1.0 if p_i == p_j else -1.0
            pairs.append((_as_logscaled(lhs), _as_logscaled(rhs), sign))
    scale = np.max([np.maximum(l.log_magnitude, r.log_magnitude) for l, r, _ in pairs], axis=0)
    scale = np.where(np.isfinite(scale), scale, 0.0)
    lvs = [mode_i.kappa * l.scaled(scale) for l, _, _ in pairs]
    rvs = [sign * mode_j.kappa * r.scaled(scale) for _, r, sign in pairs]
    norm = np.max([np.maximum(np.abs(lv), np.abs(rv)) for lv, rv in zip(lvs, rvs)], axis=0)
    residual = 0.0
    for lv, rv in zip(lvs, rvs):
        with np.errstate(invalid="ignore", divide="ignore"):
            rel = np.where(norm > 0, np.abs(lv - rv) / norm, 0.0)
        residual = max(residual, float(np.max(rel)))
    return residual < tol, residual


def _as_logscaled(value):
    return value if isinstance(value, LogScaled) else LogScaled.from_value(value)
