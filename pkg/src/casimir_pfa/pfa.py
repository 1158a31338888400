"""Proximity force approximation in closed form.

The saddle-point evaluation of the round-trip traces reduces the free energy
of two spheres to an integral over the axial decay rate kappa of the
parallel-plate (Lifshitz) integrand, weighted with the effective radius
R_eff = R1 R2/(R1 + R2):

    tr M_p^r       = (R_eff/2r) int_{xi/c}^inf dkappa [r1_p r2_p e^{-2 kappa L}]^r
    F_free         = -(k_B T R_eff/4) sum_n sum_p int dkappa Li2(r1_p r2_p e^{-2 kappa L})
    force          = 2 pi R_eff F_PP,   F_PP = (k_B T/2) sum_n sum_p int dkappa/(2 pi) kappa log(1 - r1 r2 e^{-2 kappa L})

Matsubara sums run over all integers n; the terms are even in n so the
code sums n >= 0 with n = 0 weighted by 1/2 (times 2). Zero temperature
replaces ``k_B T sum_n`` by ``(hbar/2 pi) int dxi``.

All kappa integrals are computed after the substitution
``t = exp(-2 m (kappa - xi/c) L)`` followed by a polynomial smoothstep map
of t onto [0, 1], which removes the logarithmic endpoint singularities of
Li2 and log(1 - t) near t = 1 and of kappa ~ -log t near t = 0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import integrate
from scipy.special import roots_legendre, zeta

from .constants import C, HBAR, K_B, matsubara, thermal_wavelength
from .errors import ConvergenceError
from .geometry import Geometry
from .materials import Drude, fresnel, material_label

__all__ = [
    "ThermalSpec",
    "EffectiveAreaEstimate",
    "PfaResult",
    "ThermalCorrection",
    "dilog",
    "tr_m_r_pfa",
    "free_energy",
    "free_energy_zero_T",
    "force",
    "force_zero_T",
    "free_energy_result",
    "force_result",
    "plate_integrand",
    "thermal_correction",
    "effective_area",
    "csv_header",
    "csv_row",
]

DEFAULT_NODES = 80
DEFAULT_RTOL = 1e-10
MAX_MATSUBARA = 2_000_000


@dataclass(frozen=True)
class ThermalSpec:
    """Temperature in kelvin; T = 0 selects the zero-temperature formulas."""

    T: float

    def __post_init__(self):
        if not self.T >= 0:
            raise ValueError("temperature must be non-negative")

    @property
    def lambda_T(self) -> float:
        return thermal_wavelength(self.T)

    def matsubara(self, n):
        """xi_n = 2 pi n k_B T/hbar (array aware)."""
        return matsubara(np.asarray(n), self.T)[()]


@dataclass(frozen=True)
class EffectiveAreaEstimate:
    """Order-of-magnitude scales of the region that dominates the PFA.

    All order-one coefficients are set to exactly 1.
    """

    delta_k: float
    theta_cap: float
    cap_diameter: float
    area: float
    area_thermal: float


class PfaResult(NamedTuple):
    value: float
    n_max_used: int
    est_error: float


class ThermalCorrection(NamedTuple):
    value: float
    m_max_used: int
    est_error: float
    terms: np.ndarray


# ---------------------------------------------------------------- dilogarithm

_SERIES_TERMS = 64


def _li2_series(x):
    k = np.arange(1, _SERIES_TERMS + 1)
    # Horner evaluation of sum x^k/k^2
    out = np.zeros_like(x)
    for kk in k[::-1]:
        out = x * (1.0 / kk**2 + out)
    return out


def dilog(x):
    """Dilogarithm Li2(x) for real x in [-1, 1].

    Power series for |x| <= 1/2, the reflection formula
    ``Li2(x) = pi^2/6 - log(x) log(1-x) - Li2(1-x)`` for x > 1/2 and
    Landen's identity ``Li2(x) = -Li2(x/(x-1)) - log(1-x)^2/2`` for x < -1/2.
    """
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1) or np.any(np.isnan(x)):
        raise ValueError("dilog is implemented for -1 <= x <= 1")
    out = np.empty_like(x)
    small = np.abs(x) <= 0.5
    out[small] = _li2_series(x[small])
    hi = x > 0.5
    if np.any(hi):
        xh = x[hi]
        with np.errstate(divide="ignore", invalid="ignore"):
            cross = np.where(xh == 1, 0.0, np.log(xh) * np.log1p(-xh))
        out[hi] = math.pi**2 / 6 - cross - _li2_series(1 - xh)
    lo = x < -0.5
    if np.any(lo):
        xl = x[lo]
        out[lo] = -_li2_series(xl / (xl - 1)) - 0.5 * np.log1p(-xl) ** 2
    return out[()]


# ---------------------------------------------------------------- quadrature


@lru_cache(maxsize=None)
def _unit_rule(n):
    """Gauss-Legendre in y with t = y^3 (10 - 15 y + 6 y^2) on (0, 1)."""
    x, w = roots_legendre(n)
    y = (x + 1) / 2
    t = y**3 * (10 - 15 * y + 6 * y * y)
    dt = 30 * y * y * (1 - y) ** 2
    t.flags.writeable = False
    wt = w / 2 * dt
    wt.flags.writeable = False
    return t, wt


def _kappa_rule(q, L, scale, n):
    """Nodes kappa >= q and weights for int_q^inf dkappa f(kappa).

    ``q`` may be an array; results broadcast as q[..., None] x nodes.
    """
    t, w = _unit_rule(n)
    q = np.asarray(q, dtype=float)[..., None]
    a = 2 * scale * L
    kappa = q - np.log(t) / a
    return kappa, np.broadcast_to(w / (a * t), kappa.shape)


def _as_pair(models):
    if isinstance(models, (tuple, list)):
        if len(models) != 2:
            raise ValueError("models must be a single model or a pair")
        return tuple(models)
    return (models, models)


def _rr(models, xi, kappa):
    """Products r1_p r2_p for p = TE, TM."""
    m1, m2 = _as_pair(models)
    xi = np.broadcast_to(np.asarray(xi, dtype=float), np.shape(kappa))
    te1, tm1 = fresnel(m1, xi, kappa)
    if m2 == m1:
        te2, tm2 = te1, tm1
    else:
        te2, tm2 = fresnel(m2, xi, kappa)
    return np.asarray(te1 * te2), np.asarray(tm1 * tm2)


def _pair_label(models):
    m1, m2 = _as_pair(models)
    return material_label(m1), material_label(m2)


# ---------------------------------------------------------------- traces


def tr_m_r_pfa(r, xi, L, R_eff, models, n_nodes=DEFAULT_NODES, per_polarization=False):
    """Saddle-point round-trip trace ``sum_p tr M_p^r`` at imaginary frequency xi.

    Parameters
    ----------
    r : int
        round-trip number, r >= 1.
    xi : float
        imaginary frequency (rad/s), xi >= 0.
    L, R_eff : float
        gap and effective radius in metres.
    models : material or pair of materials
    per_polarization : bool
        return ``(tr_TE, tr_TM)`` instead of the sum.
    """
    if int(r) != r or r < 1:
        raise ValueError("r must be an integer >= 1")
    if not L > 0:
        raise ValueError("L must be positive")
    if xi < 0:
        raise ValueError("xi must be non-negative")
    q = xi / C
    kappa, w = _kappa_rule(q, L, r, n_nodes)
    rte, rtm = _rr(models, xi, kappa)
    decay = np.exp(-2 * kappa * L)
    tr = [R_eff / (2 * r) * float(np.sum(w * (rp * decay) ** r)) for rp in (rte, rtm)]
    return tuple(tr) if per_polarization else tr[0] + tr[1]


# ---------------------------------------------------------------- plate integrands


def _li2_integral(models, xi, L, n):
    """sum_p int_{xi/c}^inf dkappa Li2(r1 r2 e^{-2 kappa L}), array over xi."""
    xi = np.asarray(xi, dtype=float)
    kappa, w = _kappa_rule(xi / C, L, 1, n)
    rte, rtm = _rr(models, xi[..., None], kappa)
    decay = np.exp(-2 * kappa * L)
    return np.sum(w * (dilog(rte * decay) + dilog(rtm * decay)), axis=-1)


def plate_integrand(models, xi, L, n=DEFAULT_NODES):
    """h(xi) = sum_p int_{xi/c}^inf dkappa kappa log(1 - r1 r2 e^{-2 kappa L}).

    Parallel-plate free energy per area is ``k_B T sum'_n h(xi_n)/2pi`` and the
    PFA force is ``R_eff`` times the same Matsubara sum.
    """
    xi = np.asarray(xi, dtype=float)
    kappa, w = _kappa_rule(xi / C, L, 1, n)
    rte, rtm = _rr(models, xi[..., None], kappa)
    decay = np.exp(-2 * kappa * L)
    f = kappa * (np.log1p(-rte * decay) + np.log1p(-rtm * decay))
    return np.sum(w * f, axis=-1)[()]


def _matsubara_sum(func, thermal, L, rtol, chunk=64):
    """k_B T sum_{n in Z} func(xi_n) for an even summand, as (value, n_max, err)."""
    total = 0.0
    comp = 0.0
    n0 = 0
    xi_min = 10 * C / (2 * L)
    while True:
        n = np.arange(n0, n0 + chunk)
        vals = np.asarray(func(thermal.matsubara(n)), dtype=float)
        weights = np.where(n == 0, 1.0, 2.0)
        for ni, term in zip(n, weights * vals):
            # Kahan summation in ascending n
            y = term - comp
            t = total + y
            comp = (t - total) - y
            total = t
            if abs(term) <= rtol * abs(total) and thermal.matsubara(ni) > xi_min:
                return K_B * thermal.T * total, int(ni), abs(K_B * thermal.T * term)
        n0 += chunk
        if n0 > MAX_MATSUBARA:
            raise ConvergenceError("Matsubara sum did not converge")


def _check_thermal(thermal, want_zero):
    if not isinstance(thermal, ThermalSpec):
        thermal = ThermalSpec(float(thermal))
    if want_zero is False and thermal.T == 0:
        raise ValueError("T must be positive here; use the zero-temperature function")
    return thermal


GATE_RTOL = 1e-8


def _gated(fn, n_nodes):
    """Evaluate fn(n) and fn(2n); the difference is the error estimate."""
    a = fn(n_nodes)
    b = fn(2 * n_nodes)
    err = abs(b[0] - a[0])
    if err > GATE_RTOL * abs(b[0]):
        raise ConvergenceError(f"kappa quadrature not converged (relative change {err / abs(b[0]):.2e})")
    return b[0], b[1], max(err, b[2])


def free_energy_result(geom: Geometry, models, thermal, n_nodes=DEFAULT_NODES, rtol=DEFAULT_RTOL) -> PfaResult:
    """PFA free energy with Matsubara cutoff and error estimate; T = 0 dispatches."""
    thermal = _check_thermal(thermal, None)
    if thermal.T == 0:
        value, err = _zero_T(lambda n: _zero_T_li2(geom, models, n), n_nodes)
        return PfaResult(-HBAR * C * geom.R_eff / (4 * math.pi) * value, 0, HBAR * C * geom.R_eff / (4 * math.pi) * err)

    def at(n):
        s, nmax, err = _matsubara_sum(lambda xi: _li2_integral(models, xi, geom.L, n), thermal, geom.L, rtol)
        return s, nmax, err

    value, nmax, err = _gated(at, n_nodes)
    return PfaResult(-geom.R_eff / 4 * value, nmax, geom.R_eff / 4 * err)


def free_energy(geom: Geometry, models, thermal, n_nodes=DEFAULT_NODES, rtol=DEFAULT_RTOL) -> float:
    """PFA Casimir free energy (J) at temperature T > 0."""
    thermal = _check_thermal(thermal, False)
    return free_energy_result(geom, models, thermal, n_nodes, rtol).value


def force_result(geom: Geometry, models, thermal, n_nodes=DEFAULT_NODES, rtol=DEFAULT_RTOL) -> PfaResult:
    thermal = _check_thermal(thermal, None)
    if thermal.T == 0:
        value, err = _zero_T(lambda n: _zero_T_log(geom, models, n), n_nodes)
        pre = HBAR * C * geom.R_eff / (2 * math.pi)
        return PfaResult(pre * value, 0, pre * err)

    def at(n):
        return _matsubara_sum(lambda xi: plate_integrand(models, xi, geom.L, n) / 2, thermal, geom.L, rtol)

    value, nmax, err = _gated(at, n_nodes)
    return PfaResult(geom.R_eff * value, nmax, geom.R_eff * err)


def force(geom: Geometry, models, thermal, n_nodes=DEFAULT_NODES, rtol=DEFAULT_RTOL) -> float:
    """PFA Casimir force (N, negative = attractive); T = 0 dispatches to the integral."""
    return force_result(geom, models, thermal, n_nodes, rtol).value


# ---------------------------------------------------------------- zero temperature


def _zero_T(fn, n):
    a, b = fn(n), fn(2 * n)
    err = abs(b - a)
    if err > GATE_RTOL * abs(b):
        raise ConvergenceError(f"zero-temperature quadrature not converged ({err / abs(b):.2e})")
    return b, err


@lru_cache(maxsize=None)
def _s_rule(n):
    """Gauss-Legendre on decade panels of (0, 1).

    Dispersive models vary on the scale xi ~ relaxation rate, which can sit
    far below c/L; decades resolve such features at any depth.
    """
    x, w = roots_legendre(max(8, n // 4))
    edges = np.concatenate([[0.0], 10.0 ** np.arange(-10, 1)])
    a, b = edges[:-1, None], edges[1:, None]
    s = ((b - a) / 2 * x + (a + b) / 2).ravel()
    ws = ((b - a) / 2 * w).ravel()
    s.flags.writeable = False
    ws.flags.writeable = False
    return s, ws


def _xi_kappa_grid(L, n):
    # xi = c kappa s with s in (0, 1): int_0^inf dxi int_{xi/c} dkappa = c int dkappa kappa int ds
    kappa, w = _kappa_rule(0.0, L, 1, n)
    s, ws = _s_rule(n)
    K = kappa[:, None] * np.ones_like(s)
    XI = C * kappa[:, None] * s
    W = (w * kappa)[:, None] * ws
    return XI, K, W


def _zero_T_li2(geom, models, n):
    XI, K, W = _xi_kappa_grid(geom.L, n)
    rte, rtm = _rr(models, XI, K)
    decay = np.exp(-2 * K * geom.L)
    return float(np.sum(W * (dilog(rte * decay) + dilog(rtm * decay))))


def _zero_T_log(geom, models, n):
    XI, K, W = _xi_kappa_grid(geom.L, n)
    rte, rtm = _rr(models, XI, K)
    decay = np.exp(-2 * K * geom.L)
    return float(np.sum(W * K * (np.log1p(-rte * decay) + np.log1p(-rtm * decay))))


def free_energy_zero_T(geom: Geometry, models, n_nodes=DEFAULT_NODES) -> float:
    """PFA free energy at T = 0 (J): -(hbar R_eff/4 pi) int_0^inf dxi sum_p int dkappa Li2."""
    return free_energy_result(geom, models, ThermalSpec(0.0), n_nodes).value


def force_zero_T(geom: Geometry, models, n_nodes=DEFAULT_NODES) -> float:
    return force_result(geom, models, ThermalSpec(0.0), n_nodes).value


# ---------------------------------------------------------------- thermal correction


def thermal_correction(
    geom: Geometry,
    models,
    thermal,
    n_nodes=DEFAULT_NODES,
    rtol=1e-7,
    m_min=10,
    m_max=60,
    tail_powers=(3, 4, 5, 6),
    epsabs_rel=1e-14,
) -> ThermalCorrection:
    """Thermal correction to the PFA force, F(L, T) - F(L, 0), by Poisson summation.

    ``dF = (hbar R_eff/pi) sum_{m>=1} int_0^inf dxi cos(m lambda_T xi/c) h(xi)``
    with h from :func:`plate_integrand`. Each Fourier integral is computed
    with QUADPACK's QAWF (cycle-by-cycle integration with epsilon-algorithm
    extrapolation). The remainder of the m-sum is estimated by fitting the
    last terms to ``sum_j c_j m^-p_j`` and summing with Hurwitz zeta values;
    terms are added until two fits on shifted windows agree to ``rtol`` of
    the total. The error estimate is that difference plus the error bounds
    reported by QUADPACK for the individual terms.

    For Drude models no tolerance is guaranteed. The sum stops at ``m_max``
    without raising, and ``est_error`` includes the discrepancy with the
    direct Matsubara difference ``force(T) - force_zero_T``.
    """
    thermal = _check_thermal(thermal, False)
    L = geom.L
    # dimensionless frequency u = xi L/c and integrand h L^2
    scale = C / L

    def h(u):
        return float(plate_integrand(models, np.array([u * scale]), L, n_nodes)[0]) * L * L

    # absolute tolerance relative to the size of int h du
    epsabs = epsabs_rel * abs(h(0.0))
    omega = thermal.lambda_T / L
    drude = any(isinstance(mdl, Drude) for mdl in models)
    if drude and 2 not in tail_powers:
        # r_TE vanishes linearly at xi = 0: the terms fall like m^-2
        tail_powers = (2,) + tuple(tail_powers[:-1])
    terms = []
    quad_err = 0.0
    m = 0
    while True:
        m += 1
        # QAWF warns when single cycles miss epsabs; its error bound is kept instead
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(h, 0, np.inf, weight="cos", wvar=m * omega, epsabs=epsabs, limlst=200)
        terms.append(val)
        quad_err += err
        if m >= m_min:
            arr = np.array(terms)
            tail, tail_err = _zeta_tail(arr, tail_powers)
            total = math.fsum(terms) + tail
            if tail_err <= rtol * abs(total) or abs(total) == 0:
                break
            if m >= m_max:
                if drude:
                    break
                raise ConvergenceError(f"thermal correction m-sum not converged after {m} terms")
    terms = np.array(terms)
    pre = HBAR * geom.R_eff / math.pi * scale / (L * L)
    value = pre * total
    est = abs(pre) * (tail_err + quad_err)
    if drude:
        # h has structure on the scale u ~ gamma c kappa^2/omega_p^2 and the
        # m-sum is far from its asymptotic form; measure against the direct route
        direct = force(geom, models, thermal, n_nodes) - force_zero_T(geom, models, n_nodes)
        est = max(est, abs(value - direct))
    return ThermalCorrection(value, m, est, pre * terms)


def _zeta_tail(terms, powers):
    """Remainder sum_{m > M} of terms ~ sum_j c_j m^-p_j, fitted to the last terms."""
    M = len(terms)
    k = len(powers)
    if M < k + 2:
        return 0.0, abs(terms[-1]) * M
    estimates = []
    for shift in (0, 1):
        idx = np.arange(M - k - shift, M - shift)
        mm = idx + 1.0
        A = np.array([mm ** (-p) for p in powers]).T
        coef = np.linalg.solve(A, terms[idx])
        estimates.append(sum(c * zeta(p, M + 1) for c, p in zip(coef, powers)))
    return float(estimates[0]), float(abs(estimates[0] - estimates[1]))


# ---------------------------------------------------------------- effective area


def effective_area(geom: Geometry, thermal=None) -> EffectiveAreaEstimate:
    """Scales of the sphere cap that dominates the PFA (order-one factors set to 1).

    delta_k ~ (L R1)^-1/2, theta ~ (L/R1)^1/2, d ~ (R1 L)^1/2, A ~ R1 L and,
    at temperature T, A_T ~ R1 lambda_T (infinite at T = 0).
    """
    R1, L = geom.R1, geom.L
    lam = math.inf if thermal is None else _check_thermal(thermal, None).lambda_T
    return EffectiveAreaEstimate(
        delta_k=1 / math.sqrt(L * R1),
        theta_cap=math.sqrt(L / R1),
        cap_diameter=math.sqrt(R1 * L),
        area=R1 * L,
        area_thermal=R1 * lam,
    )


# ---------------------------------------------------------------- export

_CSV_COLUMNS = ("L", "T", "R1", "R2", "material1", "material2", "free_energy_J", "force_N", "n_max_used", "est_error")


def csv_header():
    return list(_CSV_COLUMNS)


def csv_row(geom: Geometry, models, thermal, n_nodes=DEFAULT_NODES):
    """One export row; ``est_error`` is the larger relative error estimate of energy and force."""
    thermal = _check_thermal(thermal, None)
    fe = free_energy_result(geom, models, thermal, n_nodes)
    fo = force_result(geom, models, thermal, n_nodes)
    m1, m2 = _pair_label(models)
    rel = max(fe.est_error / abs(fe.value) if fe.value else 0.0, fo.est_error / abs(fo.value) if fo.value else 0.0)
    return [geom.L, thermal.T, geom.R1, geom.R2, m1, m2, fe.value, fo.value, max(fe.n_max_used, fo.n_max_used), rel]
