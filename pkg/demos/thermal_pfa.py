"""Finite-temperature PFA: Matsubara sums, thermal corrections, effective area.

The PFA free energy for sphere-plane at temperature T is a Matsubara sum of
dilogarithms. The difference to T = 0 can also be written as a rapidly
convergent sum over thermal wavelengths, which is what one wants when
lambda_T is much larger than the gap.

Run:  python demos/thermal_pfa.py
"""

import math

from casimir_pfa import pfa
from casimir_pfa.constants import C, HBAR, K_B
from casimir_pfa.geometry import Geometry
from casimir_pfa.materials import Drude, Plasma, PerfectReflector

WP, GAMMA = 1.37e16, 5.32e13  # gold-like parameters (rad/s)
R = 150e-6
models = {
    "perfect": (PerfectReflector(),) * 2,
    "plasma": (Plasma(WP),) * 2,
    "drude": (Drude(WP, GAMMA),) * 2,
}

print("force ratio F(T = 300 K) / F_perfect(T = 0), sphere-plane, R = 150 um")
print(f"{'L (um)':>8}" + "".join(f"{name:>10}" for name in models))
for L in (0.2, 0.5, 1.0, 2.0, 5.0):
    L *= 1e-6
    geom = Geometry(R, math.inf, L)
    ref = pfa.force_zero_T(geom, models["perfect"])
    row = [pfa.force(geom, m, pfa.ThermalSpec(300.0)) / ref for m in models.values()]
    print(f"{L * 1e6:8.1f}" + "".join(f"{v:10.4f}" for v in row))

# Thermal correction: Poisson-resummed against the direct Matsubara difference.
L = 1e-6
geom = Geometry(R, math.inf, L)
print("\nthermal correction to the plasma force at L = 1 um")
for ratio in (5.0, 20.0, 50.0):
    T = HBAR * C / (K_B * ratio * L)
    corr = pfa.thermal_correction(geom, models["plasma"], pfa.ThermalSpec(T))
    direct = pfa.force(geom, models["plasma"], pfa.ThermalSpec(T), rtol=1e-16) - pfa.force_zero_T(geom, models["plasma"])
    print(f"lambda_T/L = {ratio:4.0f} (T = {T:7.1f} K): {corr.value:.6e} N  direct {direct:.6e} N  terms {corr.m_max_used}")

# The patch of surface that matters thermally is sqrt(R lambda_T) across.
est = pfa.effective_area(Geometry(0.156, math.inf, 1e-6), pfa.ThermalSpec(300.0))
print(f"\nR = 15.6 cm lens at 300 K: sqrt(R lambda_T) = {math.sqrt(est.area_thermal) * 1e3:.2f} mm,"
      f" geometric cap diameter at 1 um: {est.cap_diameter * 1e3:.3f} mm")
