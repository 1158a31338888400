import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casimir_pfa import roundtrip, wkb
from casimir_pfa.constants import C
from casimir_pfa.materials import Dielectric, Drude, PerfectReflector, Plasma, fresnel
from casimir_pfa.mie import ScatteringKinematics
from casimir_pfa.polarization import TE, TM, PlaneWaveMode, check_reciprocity

GOLD = Plasma(1.37e16)


@pytest.mark.parametrize("x", [1.0, 30.0, 400.0])
def test_backscattering_amplitude_of_perfect_reflector(x):
    kin = ScatteringKinematics.from_cos_theta(-1.0)
    s = wkb.amplitude(TE, kin, x, PerfectReflector())
    assert s.sign == -1
    assert s.log_magnitude == pytest.approx(math.log(x / 2) + 2 * x, rel=1e-14)
    assert wkb.amplitude(TM, kin, x, PerfectReflector()).sign == 1


def test_amplitude_uses_fresnel_at_tangent_plane():
    z = -3.0
    kin = ScatteringKinematics.from_cos_theta(z)
    s_half = math.sqrt((1 - z) / 2)
    eps = 5.0
    x = 10.0
    # cos(theta_inc) = sin(Theta/2) with the angle form of the Fresnel coefficient
    root = math.sqrt(eps - 1 + s_half**2)
    r_tm = (eps * s_half - root) / (eps * s_half + root)
    s2 = wkb.amplitude(TM, kin, x, Dielectric(eps))
    assert s2.value() == pytest.approx(x / 2 * r_tm * math.exp(2 * x * s_half), rel=1e-13)


def test_vacuum_and_zero_size():
    kin = ScatteringKinematics.from_cos_theta(-1.5)
    assert wkb.amplitude(TE, kin, 5.0, Dielectric(1.0)).sign == 0
    assert wkb.amplitude(TM, kin, 0.0, PerfectReflector()).sign == 0


def test_dispersive_amplitude_needs_radius():
    kin = ScatteringKinematics.from_cos_theta(-1.0)
    with pytest.raises(ValueError):
        wkb.amplitude(TE, kin, 5.0, GOLD)
    R = 1e-6
    s = wkb.amplitude(TE, kin, 5.0, GOLD, radius=R)
    xi = 5.0 * C / R
    assert s.value() == pytest.approx(2.5 * fresnel(GOLD, xi, xi / C).r_te * math.exp(10.0), rel=1e-13)


def test_polarization_labels():
    kin = ScatteringKinematics.from_cos_theta(-1.0)
    assert wkb.amplitude(1, kin, 3.0, PerfectReflector()) == wkb.amplitude(TE, kin, 3.0, PerfectReflector())
    with pytest.raises(ValueError):
        wkb.amplitude("XX", kin, 3.0, PerfectReflector())


def test_zero_frequency_amplitude():
    kin = ScatteringKinematics(-np.inf, np.inf, 2.0)
    s = wkb.amplitude_zero_freq(TM, kin, 1.5, PerfectReflector())
    assert s.value() == pytest.approx(0.5 * math.exp(6.0))
    assert wkb.amplitude_zero_freq(TE, kin, 1.5, Drude(1e16, 1e13)).sign == 0


def test_reflection_element_static_perfect_reflector():
    R = 2e-6
    m_in = PlaneWaveMode(0.0, 1e6, 0.0, 1, TM)
    m_out = PlaneWaveMode(0.0, 3e6, 1.2, -1, TM)
    el = wkb.reflection_element(m_in, m_out, R, PerfectReflector())
    assert el.rho[(TM, TM)] == 1.0 and el.rho[(TE, TE)] == -1.0
    assert el.rho[(TM, TE)] == 0.0 and el.rho[(TE, TM)] == 0.0
    keff = math.sqrt((1e6 * 3e6 + 1e6 * 3e6 * math.cos(1.2)) / 2)
    assert el.exponent == pytest.approx(2 * R * keff, rel=1e-13)
    assert el.element(TM, TM).value() == pytest.approx(math.pi * R / 3e6 * math.exp(2 * R * keff), rel=1e-12)


def test_reflection_element_aligned_is_diagonal():
    xi = 2e14
    m_in = PlaneWaveMode(xi, 1e6, 0.4, 1)
    m_out = PlaneWaveMode(xi, 1e6, 0.4, -1)
    el = wkb.reflection_element(m_in, m_out, 1e-6, GOLD)
    assert el.rho[(TM, TE)] == 0 and el.rho[(TE, TM)] == 0
    rte, rtm = fresnel(GOLD, xi, m_in.kappa)
    assert el.rho[(TE, TE)] == pytest.approx(rte) and el.rho[(TM, TM)] == pytest.approx(rtm)


def test_reflection_requires_opposite_signs():
    m = PlaneWaveMode(1e14, 1e6, 0.0, 1)
    with pytest.raises(ValueError):
        wkb.reflection_element(m, m, 1e-6, GOLD)


materials = st.sampled_from([PerfectReflector(), GOLD, Drude(1.37e16, 5.32e13), Dielectric(3.0)])


@settings(max_examples=150, deadline=None)
@given(
    materials,
    st.floats(0.05, 30.0),
    st.floats(0.0, 3.0),
    st.floats(0.0, 3.0),
    st.floats(-math.pi, math.pi),
    st.floats(-math.pi, math.pi),
    st.sampled_from([-1, 1]),
    st.sampled_from(["wkb", "exact"]),
)
def test_reciprocity(model, x, a_i, a_j, phi_i, phi_j, s, kind):
    R = 1e-6
    xi = x * C / R
    q = xi / C
    m_i = PlaneWaveMode(xi, a_i * q, phi_i, s)
    m_j = PlaneWaveMode(xi, a_j * q, phi_j, -s)

    def element(mode_in, mode_out):
        el = roundtrip.sphere_reflection(mode_in, mode_out, R, model, kind)
        return el.element(mode_out.p, mode_in.p)

    ok, residual = check_reciprocity(m_i, m_j, element, tol=1e-9)
    assert ok, residual


def test_exact_element_tends_to_wkb_at_large_size():
    R = 1e-6
    x = 500.0
    xi = x * C / R
    q = xi / C
    m_in = PlaneWaveMode(xi, 0.3 * q, 0.0, 1)
    m_out = PlaneWaveMode(xi, 0.2 * q, 0.5, -1)
    exact = roundtrip.reflection_element_exact(m_in, m_out, R, PerfectReflector())
    approx = wkb.reflection_element(m_in, m_out, R, PerfectReflector())
    for key in ((TE, TE), (TM, TM)):
        e, w = exact[key], approx.element(*key)
        assert e.sign == w.sign
        assert math.exp(e.log_magnitude - w.log_magnitude) == pytest.approx(1.0, abs=1e-2)
