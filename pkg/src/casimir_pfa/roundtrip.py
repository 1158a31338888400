"""Round-trip traces tr M^r in the plane-wave basis by direct quadrature.

A round trip between sphere 1 (at the origin) and sphere 2 (centre at
``script_L = R1 + R2 + L`` along z) visits 2r plane waves K_1, ..., K_2r.
Odd modes travel up (s = +1) towards sphere 2, even modes down.
Sphere 2 maps mode 2i-1 onto mode 2i and sphere 1 maps mode 2i onto 2i+1
(cyclically). With every translation factor exp(-kappa script_L) split
evenly between the two reflections adjacent to it, the exponents combine to

    - L sum_i kappa_i - sum_i R_(sphere i) eta_i,
    eta_i = kappa_i + kappa_{i+1} - 2 kappa_eff,i >= 0,

so every exponential is evaluated at a non-positive argument. ``eta``
vanishes only on the saddle manifold k_1 = ... = k_2r, phi_1 = ... = phi_2r,
where the integrand forms a narrow ridge of width ~ sqrt(kappa/R).

A plane (R2 = inf) reflects diagonally, <k'|R|k> = (2 pi)^2 delta(k' - k)
r_p, which removes half of the integrations: the sphere at the origin then
maps r downward modes K_i onto upward modes K_{i+1}, each of which the plane
turns back into a downward one. Here the plane sits at z = R1 + L.

The integrals use the measure d^2k/(2 pi)^2 per mode. Rotational symmetry
fixes phi_1 = 0 (factor 2 pi). The remaining coordinates are k_1 on a
composite Gauss-Legendre rule with geometrically growing panels (resolving
both the gap scale 1/L and the sphere scale 1/R), and the offsets
d_i = k_{i+1} - k_i, psi_i = phi_{i+1} - phi_i on Gauss-Legendre windows of
``window`` Gaussian widths around the ridge.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.special import roots_legendre

from .constants import C, HBAR, K_B, matsubara
from .errors import BudgetExceeded, ConvergenceError
from .geometry import Geometry
from .logscaled import LogScaled
from .materials import Dielectric, fresnel
from .mie import DEFAULT_TOL, scattering_amplitudes, scattering_amplitudes_zero_freq, scattering_angle
from .polarization import TE, TM, PlaneWaveMode, abcd_from_wavenumbers
from .wkb import ReflectionElements, _check_reflection_pair

__all__ = [
    "Geometry",
    "QuadratureSpec",
    "TraceResult",
    "FreeEnergyResult",
    "eta",
    "reflection_element_exact",
    "sphere_reflection",
    "trace_m_r",
    "trace_m_r_plane_sphere",
    "free_energy_from_traces",
    "zero_T_frequency_rule",
    "write_trace_table",
]

DEFAULT_BUDGET = 4_000_000
EXACT, WKB = "exact", "wkb"
_POL = (TE, TM)


@dataclass(frozen=True)
class QuadratureSpec:
    """Node counts of the ridge-adapted quadrature.

    n_k : Gauss-Legendre nodes per radial offset window.
    n_phi : Gauss-Legendre nodes per azimuthal offset window.
    n_panel : nodes per panel of the composite rule for k_1.
    window : half width of the offset windows in Gaussian widths.
    map : name of the transform used for the semi-infinite k_1 domain.
    """

    n_k: int = 24
    n_phi: int = 24
    n_panel: int = 12
    window: float = 7.0
    map: str = "geometric-panels"

    def __post_init__(self):
        if self.n_k < 8 or self.n_phi < 8 or self.n_panel < 4:
            raise ValueError("n_k and n_phi must be >= 8 and n_panel >= 4")
        if self.map != "geometric-panels":
            raise ValueError(f"unknown k map {self.map!r}")

    def doubled(self):
        return replace(self, n_k=2 * self.n_k, n_phi=2 * self.n_phi, n_panel=2 * self.n_panel)


class TraceResult(NamedTuple):
    trace: float
    est_error: float
    n_nodes: int


class FreeEnergyResult(NamedTuple):
    value: float
    est_error: float
    converged: bool


# ---------------------------------------------------------------- exponents


def eta(mode_i: PlaneWaveMode, mode_j: PlaneWaveMode):
    """eta = kappa_i + kappa_j - 2 kappa_eff for a reflection mode_i -> mode_j.

    Evaluated as |k_i - k_j|^2 / (kappa_i + kappa_j + 2 kappa_eff), which has
    no cancellation near the saddle manifold.
    """
    if not np.allclose(mode_i.xi, mode_j.xi, rtol=1e-14, atol=0):
        raise ValueError("modes must share the same frequency")
    q = np.asarray(mode_i.xi, dtype=float) / C
    return _eta(q, mode_i.k, mode_j.k, np.asarray(mode_j.phi) - np.asarray(mode_i.phi), mode_i.kappa, mode_j.kappa)[0]


def _eta(q, k_i, k_j, dphi, ka_i, ka_j):
    keff = np.sqrt(np.maximum(q * q + ka_i * ka_j + k_i * k_j * np.cos(dphi), 0.0) / 2)
    dk2 = (k_i - k_j) ** 2 + 4 * k_i * k_j * np.sin(dphi / 2) ** 2
    den = ka_i + ka_j + 2 * keff
    # q = k_i = k_j = 0 is a point of the manifold
    with np.errstate(invalid="ignore"):
        e = np.where(den > 0, dk2 / np.where(den > 0, den, 1.0), 0.0)
    return e[()], keff[()]


# ---------------------------------------------------------------- sphere elements


def _combine(a, b, c, d, rho_te, rho_tm):
    return {
        (TM, TM): a * rho_tm + b * rho_te,
        (TE, TE): a * rho_te + b * rho_tm,
        (TM, TE): -(c * rho_te + d * rho_tm),
        (TE, TM): c * rho_tm + d * rho_te,
    }


def _sphere_rho(kind, xi, k_in, k_out, dphi, ka_in, ka_out, s_in, s_out, R, model, tol=DEFAULT_TOL):
    """Bounded reflection amplitudes rho[p_out, p_in] and the exponent 2 R kappa_eff."""
    q = xi / C
    coeff = abcd_from_wavenumbers(q, k_in, k_out, dphi, ka_in, ka_out, s_in, s_out)
    kin = scattering_angle(k_in, k_out, dphi, ka_in, ka_out, xi)
    keff = np.asarray(kin.kappa_eff, dtype=float)
    exponent = 2 * R * keff
    if isinstance(model, Dielectric) and model.eps0 == 1:
        zero = np.zeros_like(keff)
        return {key: zero for key in ((TM, TM), (TE, TE), (TM, TE), (TE, TM))}, exponent
    if kind == WKB:
        rte, rtm = fresnel(model, np.full_like(keff, xi), np.maximum(keff, 1e-300))
    elif kind == EXACT:
        if xi == 0:
            s1, s2 = scattering_amplitudes_zero_freq(kin, R, model)
            rte, rtm = 2 * s1.scaled(exponent), 2 * s2.scaled(exponent)
        else:
            x = xi * R / C
            s1, s2 = scattering_amplitudes(kin, x, model, radius=R, tol=tol)
            # S e^{-2 x sin(Theta/2)} with 2 x sin(Theta/2) = 2 R kappa_eff
            rte, rtm = 2 / x * s1.scaled(exponent), 2 / x * s2.scaled(exponent)
    else:
        raise ValueError(f"amplitude_kind must be {EXACT!r} or {WKB!r}")
    return _combine(*coeff, np.asarray(rte), np.asarray(rtm)), exponent


def sphere_reflection(mode_in: PlaneWaveMode, mode_out: PlaneWaveMode, R: float, model, kind=EXACT) -> ReflectionElements:
    """All four sphere reflection elements, exact or in the WKB approximation."""
    _check_reflection_pair(mode_in, mode_out)
    xi = float(np.max(mode_in.xi))
    rho, exponent = _sphere_rho(
        kind,
        xi,
        np.asarray(mode_in.k, float),
        np.asarray(mode_out.k, float),
        np.asarray(mode_out.phi) - np.asarray(mode_in.phi),
        np.asarray(mode_in.kappa, float),
        np.asarray(mode_out.kappa, float),
        np.asarray(mode_in.s),
        np.asarray(mode_out.s),
        R,
        model,
    )
    return ReflectionElements(rho, exponent, np.pi * R / np.asarray(mode_out.kappa))


def reflection_element_exact(mode_in: PlaneWaveMode, mode_out: PlaneWaveMode, R: float, model) -> dict:
    """Exact sphere reflection elements <k_out p_out|R|k_in p_in> as LogScaled values.

    Returns a dict keyed by ``(p_out, p_in)``. The modes must share one
    frequency (scalar xi) and have opposite propagation signs.
    """
    if np.ndim(mode_in.xi) or np.ndim(mode_out.xi):
        raise ValueError("xi must be a scalar")
    el = sphere_reflection(mode_in, mode_out, R, model, EXACT)
    return {key: el.element(*key) for key in el.rho}


# ---------------------------------------------------------------- quadrature rules


@lru_cache(maxsize=None)
def _gauss(n):
    x, w = roots_legendre(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def _base_rule(q, L, r, R_min, n_panel):
    """Composite rule for int_q^inf dkappa over u = 2 r L (kappa - q) in [0, 60]."""
    u_first = 0.05 * min(1.0, 2 * r * L / R_min)
    edges = [0.0, u_first]
    while edges[-1] < 60.0:
        edges.append(min(2 * edges[-1], 60.0))
    x, w = _gauss(n_panel)
    a, b = np.array(edges[:-1]), np.array(edges[1:])
    u = ((b - a)[:, None] * (x + 1) / 2 + a[:, None]).ravel()
    wu = ((b - a)[:, None] / 2 * w).ravel()
    scale = 2 * r * L
    return q + u / scale, wu / scale


def _windows(center, half, lo, hi, n):
    """Gauss-Legendre nodes on [max(center-half, lo), min(center+half, hi)] per row."""
    x, w = _gauss(n)
    a = np.maximum(center - half, lo)
    b = np.minimum(center + half, hi)
    nodes = (b - a)[:, None] * (x + 1) / 2 + a[:, None]
    weights = (b - a)[:, None] / 2 * w
    return nodes, weights


class _Nodes:
    """Tensor-product-like node set built one offset at a time."""

    def __init__(self, k, w, q):
        self.q = q
        self.k = [k]
        self.phi = [np.zeros_like(k)]
        self.w = w

    @property
    def size(self):
        return self.w.size

    def add_offset(self, R, quad):
        k_i, phi_i = self.k[-1], self.phi[-1]
        ka_i = np.sqrt(self.q * self.q + k_i * k_i)
        sig_d = np.sqrt(2 * ka_i / R)
        # far from the ridge eta grows linearly in |d|; cover that tail as well
        half_d = np.maximum(quad.window * sig_d, quad.window**2 / (2 * R))
        d, wd = _windows(np.zeros_like(k_i), half_d, -k_i, np.inf, quad.n_k)
        k_j = k_i[:, None] + d  # (N, n_k)
        ka_j = np.sqrt(self.q * self.q + k_j * k_j)
        with np.errstate(divide="ignore"):
            sig_p = np.sqrt((ka_i[:, None] + ka_j) / (R * k_i[:, None] * k_j))
        half = np.minimum(quad.window * sig_p, np.pi)
        flat_half = half.ravel()
        psi, wp = _windows(np.zeros_like(flat_half), flat_half, -np.pi, np.pi, quad.n_phi)
        n_k, n_p = quad.n_k, quad.n_phi
        rep = n_k * n_p

        def expand(a):
            return np.repeat(a, rep)

        self.k = [expand(a) for a in self.k] + [np.repeat(k_j.ravel(), n_p)]
        self.phi = [expand(a) for a in self.phi] + [np.repeat(phi_i, rep) + psi.ravel()]
        self.w = expand(self.w) * np.repeat(wd.ravel(), n_p) * wp.ravel()


def _estimate_size(quad, n_base, n_offsets):
    return n_base * (quad.n_k * quad.n_phi) ** n_offsets


# ---------------------------------------------------------------- traces


def _check_common(r, xi, kind):
    if int(r) != r or r < 1:
        raise ValueError("r must be an integer >= 1")
    if xi < 0:
        raise ValueError("xi must be non-negative")
    if kind not in (EXACT, WKB):
        raise ValueError(f"amplitude_kind must be {EXACT!r} or {WKB!r}")


def _pair(models):
    if isinstance(models, (tuple, list)):
        if len(models) != 2:
            raise ValueError("models must be a single model or a pair")
        return tuple(models)
    return (models, models)


def _assert_exponent(expo):
    # combined exponents are non-positive up to rounding
    if np.any(expo > 1e-9 * (1 + np.abs(expo))):
        raise AssertionError(f"positive combined exponent {float(np.max(expo)):.3e}")


def _matmul_step(T, rho, mixing=True):
    """T <- rho @ T with rho given as a dict of arrays and T of shape (N, 2, 2)."""
    g = np.zeros(T.shape)
    for a, pa in enumerate(_POL):
        for b, pb in enumerate(_POL):
            if mixing or a == b:
                g[:, a, b] = rho[(pa, pb)]
    return np.einsum("nab,nbc->nac", g, T)


def _trace_plane_sphere_once(r, xi, geom, models, quad, kind, budget, mixing=True):
    m_sphere, m_plane = _pair(models)
    q = xi / C
    R, L = geom.R1, geom.L
    k1, w1 = _base_rule(q, L, r, R, quad.n_panel)
    k1 = np.sqrt(np.maximum(k1 * k1 - q * q, 0.0))
    # dkappa -> k dk / kappa is the polar measure; keep kappa dkappa = k dk
    size = _estimate_size(quad, k1.size, r - 1)
    if size > budget:
        raise BudgetExceeded(f"{size} nodes needed, budget {budget}")
    nodes = _Nodes(k1, w1 * np.sqrt(q * q + k1 * k1), q)
    for _ in range(r - 1):
        nodes.add_offset(R, quad)
    ks, phis = nodes.k, nodes.phi
    kas = [np.sqrt(q * q + k * k) for k in ks]
    n = nodes.size
    T = np.broadcast_to(np.eye(2), (n, 2, 2)).copy()
    expo = np.zeros(n)
    for i in range(r):
        j = (i + 1) % r
        rho, _ = _sphere_rho(kind, xi, ks[i], ks[j], phis[j] - phis[i], kas[i], kas[j], -1, 1, R, m_sphere)
        e, _ = _eta(q, ks[i], ks[j], phis[j] - phis[i], kas[i], kas[j])
        expo -= R * e + 2 * L * kas[j]
        # sphere element prefactor pi R / kappa_out, then the plane at k_j
        for key in rho:
            rho[key] = rho[key] * (np.pi * R / kas[j])
        T = _matmul_step(T, rho, mixing)
        rte, rtm = fresnel(m_plane, np.full(n, xi), kas[j])
        T = T * np.stack([rte, rtm], axis=-1)[:, :, None]
    _assert_exponent(expo)
    integrand = (T[:, 0, 0] + T[:, 1, 1]) * np.exp(expo)
    # measure: 2 pi (rotation) prod_i k_i dk_i dphi_i / (2 pi)^2
    measure = 2 * np.pi / (2 * np.pi) ** (2 * r) * np.prod(ks[1:], axis=0) if r > 1 else 2 * np.pi / (2 * np.pi) ** 2
    return float(np.sum(nodes.w * measure * integrand)), n


def _trace_sphere_sphere_once(r, xi, geom, models, quad, kind, budget, mixing=True):
    m1, m2 = _pair(models)
    q = xi / C
    R1, R2, L = geom.R1, geom.R2, geom.L
    radii = [R2 if i % 2 == 0 else R1 for i in range(2 * r)]  # reflection i maps mode i -> i+1
    mats = [m2 if i % 2 == 0 else m1 for i in range(2 * r)]
    k1, w1 = _base_rule(q, L, r, min(R1, R2), quad.n_panel)
    k1 = np.sqrt(np.maximum(k1 * k1 - q * q, 0.0))
    size = _estimate_size(quad, k1.size, 2 * r - 1)
    if size > budget:
        raise BudgetExceeded(f"{size} nodes needed, budget {budget}")
    nodes = _Nodes(k1, w1 * np.sqrt(q * q + k1 * k1), q)
    for i in range(2 * r - 1):
        # for r = 1 both reflections share eta and the ridge width is set by R1 + R2
        nodes.add_offset(R1 + R2 if r == 1 else radii[i], quad)
    ks, phis = nodes.k, nodes.phi
    kas = [np.sqrt(q * q + k * k) for k in ks]
    n = nodes.size
    T = np.broadcast_to(np.eye(2), (n, 2, 2)).copy()
    expo = np.zeros(n)
    for i in range(2 * r):
        j = (i + 1) % (2 * r)
        s_in = 1 if i % 2 == 0 else -1
        rho, _ = _sphere_rho(kind, xi, ks[i], ks[j], phis[j] - phis[i], kas[i], kas[j], s_in, -s_in, radii[i], mats[i])
        e, _ = _eta(q, ks[i], ks[j], phis[j] - phis[i], kas[i], kas[j])
        expo -= radii[i] * e + L * kas[j]
        for key in rho:
            rho[key] = rho[key] * (np.pi * radii[i] / kas[j])
        T = _matmul_step(T, rho, mixing)
    _assert_exponent(expo)
    integrand = (T[:, 0, 0] + T[:, 1, 1]) * np.exp(expo)
    measure = 2 * np.pi / (2 * np.pi) ** (4 * r) * np.prod(ks[1:], axis=0)
    return float(np.sum(nodes.w * measure * integrand)), n


def _gated(fn, quad, rtol):
    a, _ = fn(quad)
    b, n = fn(quad.doubled())
    err = abs(b - a)
    if err > rtol * abs(b) and err > 0:
        raise ConvergenceError(f"trace changed by {err / abs(b):.2e} (relative) on doubling the nodes")
    return TraceResult(b, err, n)


def trace_m_r_plane_sphere(
    r,
    xi,
    geom: Geometry,
    models,
    quad: QuadratureSpec | None = None,
    amplitude_kind=EXACT,
    rtol=1e-3,
    budget=DEFAULT_BUDGET,
    polarization_mixing=True,
) -> TraceResult:
    """tr M^r for a sphere (radius geom.R1, material models[0]) facing a plane (models[1]).

    The plane reflection is diagonal in (k, phi, p), leaving a
    (2r-1)-dimensional integral after the rotation is factored out.
    The result is computed with ``quad`` and with all node counts doubled;
    a relative change above ``rtol`` raises :class:`ConvergenceError`.
    ``polarization_mixing=False`` drops the TE <-> TM elements, which
    isolates the cross-polarization contribution by difference.
    """
    _check_common(r, xi, amplitude_kind)
    if not geom.is_plane_sphere:
        raise ValueError("geometry must have R2 = inf")
    quad = quad or QuadratureSpec()
    return _gated(
        lambda qs: _trace_plane_sphere_once(r, xi, geom, models, qs, amplitude_kind, budget, polarization_mixing), quad, rtol
    )


def trace_m_r(
    r,
    xi,
    geom: Geometry,
    models,
    quad: QuadratureSpec | None = None,
    amplitude_kind=EXACT,
    rtol=1e-3,
    budget=DEFAULT_BUDGET,
    polarization_mixing=True,
) -> TraceResult:
    """tr M^r for two spheres (4r-dimensional integral, 4r-1 after rotation).

    ``models`` is ``(material of sphere 1, material of sphere 2)``. A plane
    (R2 = inf) is dispatched to :func:`trace_m_r_plane_sphere`.
    """
    _check_common(r, xi, amplitude_kind)
    if geom.is_plane_sphere:
        return trace_m_r_plane_sphere(r, xi, geom, models, quad, amplitude_kind, rtol, budget, polarization_mixing)
    quad = quad or QuadratureSpec()
    return _gated(
        lambda qs: _trace_sphere_sphere_once(r, xi, geom, models, qs, amplitude_kind, budget, polarization_mixing), quad, rtol
    )


# ---------------------------------------------------------------- free energy


def zero_T_frequency_rule(L, n=40):
    """Nodes and weights for int_0^inf dxi with the decay scale c/(2L)."""
    x, w = _gauss(n)
    y = (x + 1) / 2
    t = y**3 * (10 - 15 * y + 6 * y * y)
    dt = 30 * y * y * (1 - y) ** 2
    a = 2 * L / C
    return -np.log(t) / a, w / 2 * dt / (a * t)


def free_energy_from_traces(table, T, r_max, n_max, xi_weights=None, gate=1e-3) -> FreeEnergyResult:
    """Free energy -(k_B T/2) sum_{n in Z} sum_r tr M^r(|xi_n|)/r from tabulated traces.

    Parameters
    ----------
    table : mapping
        ``table[(n, r)]`` = trace for n = 0..n_max and r = 1..r_max. At
        T = 0, n indexes frequency nodes instead of Matsubara frequencies.
    T : float
        temperature; ``T = 0`` replaces ``k_B T sum_n`` by
        ``(hbar/2 pi) int dxi`` using ``xi_weights[n]`` (see
        :func:`zero_T_frequency_rule`).
    gate : float
        convergence requires the last r term to be at most ``gate`` times the total.

    Returns
    -------
    FreeEnergyResult
        value in J, the ratio |last r term|/|total| as error estimate, and
        whether it passes ``gate``.
    """
    missing = [(n, r) for n in range(n_max + 1) for r in range(1, r_max + 1) if (n, r) not in table]
    if missing:
        raise KeyError(f"missing trace table entries, e.g. {missing[0]}")
    if T < 0:
        raise ValueError("T must be non-negative")
    if T == 0:
        if xi_weights is None or len(xi_weights) < n_max + 1:
            raise ValueError("zero temperature needs xi_weights for every frequency node")
        weight = [HBAR / (2 * math.pi) * 2 * xi_weights[n] for n in range(n_max + 1)]
    else:
        weight = [K_B * T * (1.0 if n == 0 else 2.0) for n in range(n_max + 1)]
    by_r = [math.fsum(weight[n] * table[(n, r)] / r for n in range(n_max + 1)) for r in range(1, r_max + 1)]
    total = -0.5 * math.fsum(by_r)
    last = -0.5 * by_r[-1]
    err = abs(last / total) if total else 0.0
    return FreeEnergyResult(total, err, err <= gate)


def matsubara_frequencies(T, n_max):
    return matsubara(np.arange(n_max + 1), T)


def write_trace_table(path_or_file, rows):
    """Write rows of (n, r, trace, est_error) as CSV."""
    own = isinstance(path_or_file, str)
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        writer = csv.writer(fh)
        writer.writerow(["n", "r", "trace", "est_error"])
        for row in sorted(rows, key=lambda t: (t[0], t[1])):
            writer.writerow([row[0], row[1], repr(float(row[2])), repr(float(row[3]))])
    finally:
        if own:
            fh.close()
