import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import spence, zeta

from casimir_pfa import pfa
from casimir_pfa.constants import C, HBAR, K_B
from casimir_pfa.geometry import Geometry
from casimir_pfa.materials import Dielectric, Drude, PerfectReflector, Plasma

PR = (PerfectReflector(), PerfectReflector())
GOLD_WP = 1.37e16
GOLD_GAMMA = 5.32e13


def test_dilog_special_values():
    assert pfa.dilog(0.0) == 0.0
    assert pfa.dilog(1.0) == pytest.approx(math.pi**2 / 6, abs=1e-14)
    assert pfa.dilog(-1.0) == pytest.approx(-math.pi**2 / 12, abs=1e-14)
    assert pfa.dilog(0.5) == pytest.approx(math.pi**2 / 12 - math.log(2) ** 2 / 2, abs=1e-14)


@settings(max_examples=300, deadline=None)
@given(st.floats(-1.0, 1.0))
def test_dilog_matches_scipy(x):
    # scipy's spence(z) is Li2(1 - z)
    assert abs(pfa.dilog(x) - float(spence(1 - x))) < 1e-14


def test_dilog_vectorised_and_domain():
    x = np.linspace(-1, 1, 11)
    np.testing.assert_allclose(pfa.dilog(x), spence(1 - x), atol=1e-14)
    with pytest.raises(ValueError):
        pfa.dilog(1.5)


def test_thermal_spec():
    t = pfa.ThermalSpec(300.0)
    assert t.matsubara(0) == 0
    assert t.matsubara(2) == pytest.approx(4 * math.pi * K_B * 300 / HBAR)
    assert t.lambda_T == pytest.approx(7.63e-6, rel=1e-3)
    assert pfa.ThermalSpec(0.0).lambda_T == math.inf
    with pytest.raises(ValueError):
        pfa.ThermalSpec(-1.0)


@pytest.mark.parametrize("r", [1, 2, 5])
def test_trace_perfect_reflector_static(r):
    L, R = 1e-6, 1e-4
    per = pfa.tr_m_r_pfa(r, 0.0, L, R, PR, per_polarization=True)
    for v in per:
        assert v == pytest.approx(R / (4 * L * r * r), rel=1e-12)
    assert pfa.tr_m_r_pfa(r, 0.0, L, R, PR) == pytest.approx(R / (2 * L * r * r), rel=1e-12)


def test_trace_vacuum_and_drude():
    L, R = 1e-6, 1e-4
    vac = (Dielectric(1.0), Dielectric(1.0))
    assert pfa.tr_m_r_pfa(1, 1e14, L, R, vac) == 0
    drude = (Drude(GOLD_WP, GOLD_GAMMA),) * 2
    assert pfa.tr_m_r_pfa(1, 0.0, L, R, drude) == pytest.approx(R / (4 * L), rel=1e-12)


def test_trace_domain():
    with pytest.raises(ValueError):
        pfa.tr_m_r_pfa(0, 0.0, 1e-6, 1e-4, PR)
    with pytest.raises(ValueError):
        pfa.tr_m_r_pfa(1, 0.0, -1e-6, 1e-4, PR)


def test_high_temperature_limits():
    L, R = 1e-4, 1e-2
    thermal = pfa.ThermalSpec(300.0)
    assert thermal.lambda_T / L < 0.1
    geom = Geometry(R, math.inf, L)
    ref = -K_B * 300 * R * zeta(3) / (4 * L)
    assert pfa.free_energy(geom, PR, thermal) == pytest.approx(ref, rel=1e-10)
    drude = (Drude(GOLD_WP, GOLD_GAMMA),) * 2
    assert pfa.free_energy(geom, drude, thermal) == pytest.approx(ref / 2, rel=1e-6)
    assert pfa.force(geom, PR, thermal) == pytest.approx(-K_B * 300 * R * zeta(3) / (4 * L * L), rel=1e-10)


@pytest.mark.parametrize("L", [1e-7, 1e-6, 1e-5])
def test_zero_temperature_perfect_reflector(L):
    R = 1e-4
    geom = Geometry(R, math.inf, L)
    assert pfa.force_zero_T(geom, PR) == pytest.approx(-(math.pi**3) * HBAR * C * R / (360 * L**3), rel=1e-9)
    assert pfa.free_energy_zero_T(geom, PR) == pytest.approx(-(math.pi**3) * HBAR * C * R / (720 * L**2), rel=1e-9)
    assert pfa.force(geom, PR, pfa.ThermalSpec(0.0)) == pfa.force_zero_T(geom, PR)


def test_zero_temperature_dielectric_bounded():
    geom = Geometry(1e-4, math.inf, 1e-6)
    d = pfa.free_energy_zero_T(geom, (Dielectric(4.0),) * 2)
    assert pfa.free_energy_zero_T(geom, PR) < d < 0
    assert pfa.free_energy_zero_T(geom, (Dielectric(1.0),) * 2) == 0


def test_free_energy_rejects_zero_temperature():
    with pytest.raises(ValueError):
        pfa.free_energy(Geometry(1e-4, math.inf, 1e-6), PR, pfa.ThermalSpec(0.0))


def test_mercator_series_equals_dilogarithm():
    # sum over round trips of tr M^r / r reproduces the Li2 integral
    L, R = 2e-6, 1e-4
    thermal = pfa.ThermalSpec(300.0)
    models = (Dielectric(3.0), Plasma(GOLD_WP))
    geom = Geometry(R, math.inf, L)
    total = 0.0
    for n in range(60):
        xi = thermal.matsubara(n)
        weight = 0.5 if n == 0 else 1.0
        for r in range(1, 80):
            total += weight * pfa.tr_m_r_pfa(r, xi, L, R, models) / r
    mercator = -K_B * thermal.T * total
    assert mercator == pytest.approx(pfa.free_energy(geom, models, thermal), rel=1e-8)


def test_force_is_minus_energy_derivative():
    R, L = 1e-4, 1e-6
    thermal = pfa.ThermalSpec(300.0)
    models = (Plasma(GOLD_WP),) * 2
    h = 1e-4 * L
    e_plus = pfa.free_energy(Geometry(R, math.inf, L + h), models, thermal, rtol=1e-15)
    e_minus = pfa.free_energy(Geometry(R, math.inf, L - h), models, thermal, rtol=1e-15)
    f = pfa.force(Geometry(R, math.inf, L), models, thermal, rtol=1e-15)
    assert f == pytest.approx(-(e_plus - e_minus) / (2 * h), rel=1e-6)


def test_monotonic_in_gap():
    thermal = pfa.ThermalSpec(300.0)
    models = (Plasma(GOLD_WP),) * 2
    gaps = np.geomspace(1e-7, 1e-5, 6)
    forces = [abs(pfa.force(Geometry(1e-4, math.inf, L), models, thermal)) for L in gaps]
    energies = [abs(pfa.free_energy(Geometry(1e-4, math.inf, L), models, thermal)) for L in gaps]
    assert all(b < a for a, b in zip(forces, forces[1:]))
    assert all(b < a for a, b in zip(energies, energies[1:]))


def test_plane_sphere_continuity():
    thermal = pfa.ThermalSpec(300.0)
    models = (Plasma(GOLD_WP),) * 2
    R, L = 1e-4, 1e-6
    plane = pfa.force(Geometry(R, math.inf, L), models, thermal)
    big = pfa.force(Geometry(R, 1e6 * R, L), models, thermal)
    assert big == pytest.approx(plane, rel=1e-5)


def test_sphere_sphere_uses_effective_radius():
    thermal = pfa.ThermalSpec(300.0)
    models = (Plasma(GOLD_WP),) * 2
    L = 1e-6
    a = pfa.force(Geometry(2e-4, 2e-4, L), models, thermal)
    b = pfa.force(Geometry(1e-4, math.inf, L), models, thermal)
    assert a == pytest.approx(b, rel=1e-12)


@pytest.mark.parametrize("T", [0.0, 300.0])
def test_material_ordering(T):
    geom = Geometry(1e-4, math.inf, 1e-6)
    thermal = pfa.ThermalSpec(T)
    drude = abs(pfa.force(geom, (Drude(GOLD_WP, GOLD_GAMMA),) * 2, thermal))
    plasma = abs(pfa.force(geom, (Plasma(GOLD_WP),) * 2, thermal))
    perfect = abs(pfa.force(geom, PR, thermal))
    assert drude <= plasma <= perfect


def test_thermal_correction_matches_matsubara_difference():
    L, R = 1e-6, 1e-4
    models = (Plasma(GOLD_WP),) * 2
    thermal = pfa.ThermalSpec(HBAR * C / (K_B * 50 * L))
    geom = Geometry(R, math.inf, L)
    corr = pfa.thermal_correction(geom, models, thermal)
    diff = pfa.force(geom, models, thermal, rtol=1e-16) - pfa.force_zero_T(geom, models)
    assert corr.value == pytest.approx(diff, rel=1e-4)
    assert corr.est_error < 1e-4 * abs(corr.value)


def test_thermal_correction_vanishes_at_low_temperature():
    L, R = 1e-6, 1e-4
    geom = Geometry(R, math.inf, L)
    # the m-terms fall like (m lambda_T/L)^-3; at very low T the oscillatory
    # quadrature limits the attainable relative accuracy, hence rtol
    values = [abs(pfa.thermal_correction(geom, PR, pfa.ThermalSpec(T), rtol=1e-5).value) for T in (300.0, 30.0, 3.0)]
    assert values[0] > values[1] > values[2]
    assert values[2] < 1e-6 * abs(pfa.force_zero_T(geom, PR))


def test_thermal_correction_leading_term():
    # m-th term of the Poisson sum -> -pi/(m lambda_T/L)^3 in units of hbar c R/(pi L^3)
    L, R = 1e-6, 1e-4
    thermal = pfa.ThermalSpec(30.0)
    corr = pfa.thermal_correction(Geometry(R, math.inf, L), PR, thermal)
    omega = thermal.lambda_T / L
    pre = HBAR * C * R / (math.pi * L**3)
    m = np.arange(1, len(corr.terms) + 1)
    scaled = corr.terms / pre * (m * omega) ** 3
    assert np.all(np.diff(np.abs(math.pi + scaled)) < 0)
    assert scaled[-1] == pytest.approx(-math.pi, rel=2e-3)


def test_effective_area():
    est = pfa.effective_area(Geometry(1e-4, math.inf, 1e-6), pfa.ThermalSpec(300.0))
    assert est.cap_diameter == pytest.approx(1e-5, rel=1e-12)
    assert est.area == pytest.approx(1e-10, rel=1e-12)
    assert est.area_thermal == pytest.approx(1e-4 * pfa.ThermalSpec(300.0).lambda_T, rel=1e-12)
    assert est.theta_cap == pytest.approx(0.1)
    assert est.delta_k == pytest.approx(1e5)
    lens = pfa.effective_area(Geometry(0.156, math.inf, 1e-6), pfa.ThermalSpec(300.0))
    assert 0.5e-3 < math.sqrt(lens.area_thermal) < 2e-3


def test_csv_row():
    geom = Geometry(1e-4, math.inf, 1e-6)
    row = pfa.csv_row(geom, PR, pfa.ThermalSpec(0.0))
    assert len(row) == len(pfa.csv_header())
    header = pfa.csv_header()
    d = dict(zip(header, row))
    assert d["material1"] == "perfect"
    assert d["force_N"] == pytest.approx(-(math.pi**3) * HBAR * C * 1e-4 / (360e-18), rel=1e-9)


def test_thermal_correction_drude_reports_its_error():
    # no tolerance is guaranteed for Drude; the estimate must cover the true error
    L, R = 1e-6, 1e-4
    geom = Geometry(R, math.inf, L)
    models = (Drude(GOLD_WP, GOLD_GAMMA),) * 2
    thermal = pfa.ThermalSpec(HBAR * C / (K_B * 50 * L))
    corr = pfa.thermal_correction(geom, models, thermal)
    direct = pfa.force(geom, models, thermal) - pfa.force_zero_T(geom, models)
    assert corr.est_error >= abs(corr.value - direct)
    assert math.copysign(1, corr.value) == math.copysign(1, direct)
