r"""Mie scattering at imaginary frequency.

Conventions
-----------
The size parameter is ``x = xi*R/c``. The Mie coefficients are the standard
(Bohren-Huffman) coefficients continued to imaginary frequency, x -> i x,
which makes them real. In terms of the modified spherical Bessel functions
:math:`i_\ell` and :math:`k_\ell` (scipy normalisation) and the refractive
index ``n = sqrt(eps(i xi))``

.. math::

    a_\ell = (-1)^{\ell+1} \frac{\pi}{2}\frac{i_\ell(x)}{k_\ell(x)}
             \frac{n D_\psi(x) - D_\psi(nx)}{n D_\chi(x) - D_\psi(nx)},\qquad
    b_\ell = (-1)^{\ell+1} \frac{\pi}{2}\frac{i_\ell(x)}{k_\ell(x)}
             \frac{D_\psi(x) - n D_\psi(nx)}{D_\chi(x) - n D_\psi(nx)}

with the logarithmic derivatives :math:`D_\psi = (x i_\ell)'/(x i_\ell)` and
:math:`D_\chi = (x k_\ell)'/(x k_\ell)`. For small x this gives
``a_1 = -(2/3) x**3`` for a perfect reflector.

Bessel functions are never evaluated directly at large order. Ratios
``I_{nu+1}/I_nu`` come from a backward recurrence, ratios ``K_{nu+1}/K_nu``
from the (stable) forward recurrence, and the logarithms of the functions
follow by cumulative summation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .constants import C
from .errors import ConvergenceError
from .logscaled import LogScaled
from .materials import (
    Dielectric,
    DielectricModel,
    Drude,
    PerfectReflector,
    Plasma,
    permittivity,
)

__all__ = [
    "ScatteringKinematics",
    "ConvergenceError",
    "scattering_angle",
    "angular_functions",
    "mie_coefficients",
    "scattering_amplitudes",
    "scattering_amplitudes_zero_freq",
    "DEFAULT_TOL",
    "MAX_TERMS",
]

DEFAULT_TOL = 1e-9
MAX_TERMS = 10_000_000


@dataclass(frozen=True)
class ScatteringKinematics:
    """Scattering geometry at imaginary frequency.

    ``kappa_eff = sin(Theta/2) * xi/c`` stays finite for xi -> 0 and is what
    the zero-frequency amplitudes and the WKB exponent depend on. It is
    ``None`` when the kinematics were built from an angle alone.
    """

    cos_theta: np.ndarray | float
    sin_half_theta: np.ndarray | float
    kappa_eff: np.ndarray | float | None = None

    @classmethod
    def from_cos_theta(cls, cos_theta, xi=None):
        cos_theta = np.asarray(cos_theta, dtype=float)
        if np.any(cos_theta > -1 + 1e-12):
            raise ValueError(
                "only backward scattering channels (cos(Theta) <= -1) occur at imaginary frequency"
            )
        s = np.sqrt((1 - cos_theta) / 2)
        keff = None if xi is None else s * xi / C
        return cls(cos_theta[()], s[()], None if keff is None else np.asarray(keff)[()])


def scattering_angle(k_i, k_j, delta_phi, kappa_i, kappa_j, xi) -> ScatteringKinematics:
    """Kinematics for scattering a plane wave (k_i, kappa_i) into (k_j, kappa_j).

    ``cos(Theta) = -(c/xi)**2 (k_i k_j cos(delta_phi) + kappa_i kappa_j)``.
    At ``xi == 0`` the angle itself diverges; ``cos_theta`` is then ``-inf``
    and only ``kappa_eff`` is meaningful.
    """
    k_i, k_j, dphi, ka_i, ka_j, xi = np.broadcast_arrays(
        *[np.asarray(v, dtype=float) for v in (k_i, k_j, delta_phi, kappa_i, kappa_j, xi)]
    )
    q = xi / C
    for k, ka in ((k_i, ka_i), (k_j, ka_j)):
        if np.any(np.abs(ka * ka - q * q - k * k) > 1e-9 * (ka * ka + 1e-300)):
            raise ValueError("inconsistent (k, kappa, xi): kappa**2 must equal xi**2/c**2 + k**2")
    keff = np.sqrt(np.maximum(q * q + ka_i * ka_j + k_i * k_j * np.cos(dphi), 0.0) / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(q > 0, keff / q, np.inf)
        cos_theta = np.where(q > 0, 1 - 2 * s * s, -np.inf)
    return ScatteringKinematics(cos_theta[()], s[()], keff[()])


def angular_functions(ell: int, z):
    """Angular functions (pi_ell(z), tau_ell(z)) with pi_ell = P_ell'.

    Plain upward recurrence; values overflow to inf for very large
    ``ell * arccosh|z|`` (the amplitude sums use a log-scaled variant).
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    z = np.asarray(z, dtype=float)
    p_prev, p = np.zeros_like(z), np.ones_like(z)
    for l in range(2, ell + 1):
        p_prev, p = p, ((2 * l - 1) * z * p - l * p_prev) / (l - 1)
    tau = ell * z * p - (ell + 1) * p_prev
    return p[()], tau[()]


# --------------------------------------------------------------------------
# Bessel function ratios and logarithms


def _log_i_half(x):
    # log I_{1/2}(x) = log(sqrt(2/(pi x)) sinh x)
    if x > 20:
        return x + math.log1p(-math.exp(-2 * x)) - math.log(2) + 0.5 * math.log(2 / (math.pi * x))
    return math.log(math.sinh(x)) + 0.5 * math.log(2 / (math.pi * x))


@lru_cache(maxsize=256)
def _bessel_tables(x: float, lmax: int):
    """Tables for ell = 0..lmax.

    Returns ``(rho, log_i, sigma, log_k)`` with ``rho[l] = I_{l+3/2}/I_{l+1/2}``,
    ``sigma[l] = K_{l+3/2}/K_{l+1/2}`` and the logarithms of
    ``I_{l+1/2}(x)``, ``K_{l+1/2}(x)``.
    """
    top = lmax + 30 + int(2 * math.sqrt(lmax + x))
    nu = top + 1.5
    r = x / (nu + math.sqrt(nu * nu + x * x))
    rho = np.empty(lmax + 1)
    for l in range(top - 1, -1, -1):
        r = x / ((2 * l + 3) + x * r)
        if l <= lmax:
            rho[l] = r
    sigma = np.empty(lmax + 1)
    s = 1 + 1 / x
    for l in range(lmax + 1):
        sigma[l] = s
        s = 1 / s + (2 * l + 3) / x
    log_i = np.empty(lmax + 1)
    log_i[0] = _log_i_half(x)
    log_i[1:] = log_i[0] + np.cumsum(np.log(rho[:-1]))
    log_k = np.empty(lmax + 1)
    log_k[0] = 0.5 * math.log(math.pi / (2 * x)) - x
    log_k[1:] = log_k[0] + np.cumsum(np.log(sigma[:-1]))
    return rho, log_i, sigma, log_k


def _refractive_index(model, xi):
    if isinstance(model, PerfectReflector):
        return math.inf
    return math.sqrt(float(permittivity(model, xi)))


def _needs_frequency(model):
    return isinstance(model, (Plasma, Drude))


@lru_cache(maxsize=256)
def _mie_tables(x: float, n: float, lmax: int):
    """Arrays over ell = 1..lmax: (sign_a, log_a, sign_b, log_b)."""
    ell = np.arange(1, lmax + 1)
    _, log_i, sigma, log_k = _bessel_tables(x, lmax)
    rho_x = _bessel_tables(x, lmax)[0][1:]
    log_base = math.log(math.pi / 2) + log_i[1:] - log_k[1:]
    parity = np.where(ell % 2 == 1, 1.0, -1.0)  # (-1)**(ell+1)
    dpsi_x = (ell + 1) / x + rho_x
    dchi_x = (ell + 1) / x - sigma[1:]
    if math.isinf(n):
        fa = dpsi_x / dchi_x
        fb = np.ones(lmax)
    else:
        nx = n * x
        rho_nx = _bessel_tables(nx, lmax)[0][1:]
        dpsi_nx = (ell + 1) / nx + rho_nx
        fa = (n * dpsi_x - dpsi_nx) / (n * dchi_x - dpsi_nx)
        fb = (dpsi_x - n * dpsi_nx) / (dchi_x - n * dpsi_nx)
    with np.errstate(divide="ignore"):
        log_a = log_base + np.log(np.abs(fa))
        log_b = log_base + np.log(np.abs(fb))
    return parity * np.sign(fa), log_a, parity * np.sign(fb), log_b


def _frequency(model, x, radius):
    if _needs_frequency(model):
        if radius is None:
            raise ValueError("dispersive materials need the sphere radius to recover xi from x")
        return x * C / radius
    return x * C / radius if radius is not None else 1.0


def mie_coefficients(ell: int, x: float, model: DielectricModel, radius: float | None = None):
    """Mie coefficients (a_ell, b_ell) as LogScaled values.

    ``radius`` (m) is required for frequency-dependent materials, where the
    imaginary frequency is recovered as ``xi = x*c/radius``.
    """
    if ell < 1:
        raise ValueError("ell must be >= 1")
    if not x > 0:
        raise ValueError("x must be positive; use scattering_amplitudes_zero_freq at xi = 0")
    n = _refractive_index(model, _frequency(model, x, radius))
    sa, la, sb, lb = _mie_tables(float(x), n, ell)
    return LogScaled(sa[-1], la[-1]), LogScaled(sb[-1], lb[-1])


# --------------------------------------------------------------------------
# partial wave sums


class _Accumulator:
    """Running sum of sign*exp(log) terms, stored relative to a per-node scale."""

    def __init__(self, shape):
        self.val = np.zeros(shape)
        self.log = np.full(shape, -np.inf)

    def add(self, t, log_t):
        # true term = t * exp(log_t); returns |term| / |running sum| estimate
        nz = t != 0
        up = nz & (log_t > self.log)
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            self.val = np.where(up, self.val * np.exp(self.log - log_t), self.val)
            self.log = np.where(up, log_t, self.log)
            contrib = np.where(nz, t * np.exp(log_t - self.log), 0.0)
        self.val = self.val + contrib
        big = np.abs(self.val) > 1e100
        if np.any(big):
            self.log = np.where(big, self.log + np.log(np.abs(self.val)), self.log)
            self.val = np.where(big, np.sign(self.val), self.val)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.val != 0, np.abs(contrib / self.val), np.where(nz, np.inf, 0.0))

    def result(self):
        with np.errstate(divide="ignore"):
            lm = np.where(self.val != 0, self.log + np.log(np.abs(self.val)), -np.inf)
        return LogScaled(np.sign(self.val)[()], lm[()])


def _partial_wave_sums(z, x, n, tol, lmin=1):
    z = np.atleast_1d(np.asarray(z, dtype=float))
    s_half = np.sqrt((1 - z) / 2)
    lmax = int(math.ceil(x * np.max(s_half)) + 10 * x ** (1 / 3) + 20)
    block = max(16, lmax // 8)
    acc1 = _Accumulator(z.shape)
    acc2 = _Accumulator(z.shape)
    p_prev = np.zeros_like(z)
    p = np.ones_like(z)
    scale = np.zeros_like(z)  # log scale of (p_prev, p)
    sa, la, sb, lb = _mie_tables(float(x), n, lmax)
    block_max = np.zeros_like(z)
    l = 1
    while True:
        if l > lmax:
            if lmax >= MAX_TERMS:
                raise ConvergenceError("partial wave sum did not converge within the term cap")
            lmax = min(2 * lmax, MAX_TERMS)
            sa, la, sb, lb = _mie_tables(float(x), n, lmax)
        if l > 1:
            p_prev, p = p, ((2 * l - 1) * z * p - l * p_prev) / (l - 1)
            big = np.abs(p) > 1e200
            if np.any(big):
                f = np.where(big, np.abs(p), 1.0)
                p, p_prev = p / f, p_prev / f
                scale = scale + np.log(f)
        tau = l * z * p - (l + 1) * p_prev
        m = max(la[l - 1], lb[l - 1])
        if not np.isfinite(m):
            l += 1
            continue
        ea = sa[l - 1] * math.exp(la[l - 1] - m)
        eb = sb[l - 1] * math.exp(lb[l - 1] - m)
        w = (2 * l + 1) / (l * (l + 1))
        log_t = m + scale
        r1 = acc1.add(w * (ea * p + eb * tau), log_t)
        r2 = acc2.add(w * (ea * tau + eb * p), log_t)
        block_max = np.maximum(block_max, np.maximum(r1, r2))
        if l % block == 0:
            past_peak = l >= x * np.max(s_half) + 10
            if past_peak and np.all(block_max < tol):
                break
            block_max[:] = 0.0
        l += 1
    return acc1.result(), acc2.result()


def scattering_amplitudes(
    kin: ScatteringKinematics,
    x: float,
    model: DielectricModel,
    radius: float | None = None,
    tol: float = DEFAULT_TOL,
):
    """Exact Mie amplitudes (S1, S2) for backward channels at imaginary frequency.

    Parameters
    ----------
    kin : ScatteringKinematics
        ``cos_theta`` may be an array; all entries must satisfy cos(Theta) <= -1.
    x : float
        size parameter xi*R/c > 0.
    model : DielectricModel
    radius : float, optional
        sphere radius in m, needed for dispersive materials.
    tol : float
        relative truncation tolerance of the partial wave series.

    Returns
    -------
    (LogScaled, LogScaled)
    """
    if not x > 0:
        raise ValueError("x must be positive; use scattering_amplitudes_zero_freq at xi = 0")
    z = np.asarray(kin.cos_theta, dtype=float)
    if np.any(z > -1 + 1e-12):
        raise ValueError("forward-type kinematics (cos(Theta) > -1) are outside the valid domain")
    n = _refractive_index(model, _frequency(model, x, radius))
    if n == 1.0:
        return LogScaled.zero(z.shape), LogScaled.zero(z.shape)
    s1, s2 = _partial_wave_sums(z, float(x), n, tol)
    if z.ndim == 0:
        s1 = LogScaled(s1.sign[0], s1.log_magnitude[0])
        s2 = LogScaled(s2.sign[0], s2.log_magnitude[0])
    return s1, s2


# --------------------------------------------------------------------------
# zero frequency


def _log_sinh(u):
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(
            u > 20, u - math.log(2) + np.log1p(-np.exp(-2 * np.minimum(u, 1e300))), np.log(np.sinh(np.minimum(u, 20.0)))
        )


def _log_cosh_minus_one(y):
    # cosh y - 1 = 2 sinh(y/2)**2
    return math.log(2) + 2 * _log_sinh(np.asarray(y) / 2)


def _perfect_te_series(y):
    """log of sum_{l>=1} l/(l+1) y^(2l)/(2l)!  (positive)."""
    y = np.asarray(y, dtype=float)
    out = np.empty(y.shape)
    small = y < 4
    if np.any(small):
        ys = y[small]
        total = np.zeros(ys.shape)
        term = np.ones(ys.shape)
        for l in range(1, 40):
            term = term * ys * ys / ((2 * l - 1) * (2 * l))
            total = total + l / (l + 1) * term
        with np.errstate(divide="ignore"):
            out[small] = np.log(total)
    big = ~small
    if np.any(big):
        yb = y[big]
        e2 = np.exp(-2 * yb)
        bracket = (1 + e2) - 2 / yb * (1 - e2) + 2 / yb**2 * (1 - np.exp(-yb)) ** 2
        out[big] = yb - math.log(2) + np.log(bracket)
    return out


def _log_series(y, log_coef, width=12.0, chunk=256):
    """log of sum_{l>=1} c_l y^(2l)/(2l)! for positive coefficients c_l.

    ``log_coef(l)`` maps an integer array to log(c_l). Only a window of
    orders around the peak 2l ~ y is summed.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.full(y.shape, -np.inf)
    pos = y > 0
    idx = np.flatnonzero(pos)
    for start in range(0, idx.size, chunk):
        sel = idx[start : start + chunk]
        yy = y[sel]
        half_w = width * np.sqrt(yy) + 30
        lo = np.maximum(1, np.floor(yy / 2 - half_w)).astype(int)
        span = int(np.max(np.ceil(yy / 2 + half_w).astype(int) - lo)) + 1
        ells = lo[:, None] + np.arange(span)[None, :]
        terms = log_coef(ells) + 2 * ells * np.log(yy)[:, None] - gammaln(2 * ells + 1)
        mx = np.max(terms, axis=1)
        out[sel] = mx + np.log(np.sum(np.exp(terms - mx[:, None]), axis=1))
    return out


@lru_cache(maxsize=64)
def _plasma_te_factors(w: float, lmax: int):
    """E_l = I_{l+3/2}(w)/I_{l-1/2}(w) for l = 0..lmax (index by l)."""
    rho, *_ = _bessel_tables(w, lmax + 1)
    # rho[l] = I_{l+3/2}/I_{l+1/2}; I_{l+3/2}/I_{l-1/2} = rho[l] * rho[l-1]
    out = np.empty(lmax + 1)
    out[0] = np.nan
    out[1:] = rho[1 : lmax + 1] * rho[0:lmax]
    return out


def scattering_amplitudes_zero_freq(kin: ScatteringKinematics, R: float, model: DielectricModel):
    r"""Zero-frequency limit of the amplitudes divided by the size parameter.

    Returns LogScaled ``(S1/x, S2/x)`` in the limit xi -> 0 at fixed
    ``y = 2 R kappa_eff``; the 1/xi pole of the reflection matrix elements
    cancels against this factor of x. From the low-frequency Mie
    coefficients,

    .. math::

        S_2/x = \sum_\ell E_\ell \frac{y^{2\ell}}{(2\ell)!},\qquad
        S_1/x = -\sum_\ell \frac{\ell}{\ell+1} E^{TE}_\ell \frac{y^{2\ell}}{(2\ell)!}

    with E_ell = 1 for metals and (eps-1)/(eps+(ell+1)/ell) for dielectrics.
    ``E^TE`` is 1 for a perfect reflector, I_{l+3/2}(w)/I_{l-1/2}(w) with
    w = omega_p R/c for the plasma model and 0 otherwise. For a perfect
    reflector both series have closed forms, cosh(y) - 1 and
    cosh y - 2 sinh(y)/y + 2 (cosh(y) - 1)/y**2.
    """
    if kin.kappa_eff is None:
        raise ValueError("zero-frequency amplitudes need kappa_eff")
    y = 2 * R * np.asarray(kin.kappa_eff, dtype=float)
    shape = y.shape
    y1 = np.atleast_1d(y)

    if isinstance(model, Dielectric):
        e = model.eps0
        if e == 1:
            z = LogScaled.zero(shape)
            return z, z
        s2 = _log_series(y1, lambda l: np.log((e - 1) * l / ((e + 1) * l + 1)))
        s1 = LogScaled.zero(shape)
        return s1, LogScaled(np.where(np.isfinite(s2), 1.0, 0.0).reshape(shape)[()], s2.reshape(shape)[()])

    with np.errstate(divide="ignore"):
        s2 = _log_cosh_minus_one(y1)
    s2_ls = LogScaled(np.where(np.isfinite(s2), 1.0, 0.0).reshape(shape)[()], s2.reshape(shape)[()])
    if isinstance(model, PerfectReflector):
        s1 = _perfect_te_series(y1)
    elif isinstance(model, Plasma):
        w = model.plasma_frequency * R / C
        lmax = int(np.max(y1) / 2 + 12 * math.sqrt(np.max(y1) + 1) + 40)
        table = _plasma_te_factors(float(w), lmax)
        s1 = _log_series(y1, lambda l: np.log(l / (l + 1)) + np.log(table[l]))
    elif isinstance(model, Drude):
        return LogScaled.zero(shape), s2_ls
    else:
        raise TypeError(f"unknown dielectric model {model!r}")
    s1_ls = LogScaled(np.where(np.isfinite(s1), -1.0, 0.0).reshape(shape)[()], s1.reshape(shape)[()])
    return s1_ls, s2_ls
