"""Exact Mie amplitudes against the specular (WKB) formula.

At imaginary frequency the amplitudes grow like exp(2x sin(Theta/2)), so they
are handled as sign and log-magnitude. The relative deviation of the WKB
formula from the exact sum falls roughly like 1/(2x) in backscattering.

Run:  python demos/wkb_backscattering.py
"""

import math

import numpy as np

from casimir_pfa import mie, wkb
from casimir_pfa.materials import Dielectric, PerfectReflector
from casimir_pfa.mie import ScatteringKinematics
from casimir_pfa.polarization import TE, TM


def deviation(x, z, model):
    kin = ScatteringKinematics.from_cos_theta(z)
    s1, s2 = mie.scattering_amplitudes(kin, x, model)
    out = []
    for pol, s in ((TE, s1), (TM, s2)):
        w = wkb.amplitude(pol, kin, x, model)
        out.append(abs(s.sign * w.sign * math.exp(s.log_magnitude - w.log_magnitude) - 1))
    return out, s1.log_magnitude


print("perfect reflector, cos(Theta) = -1")
print(f"{'x':>6} {'log|S1|':>12} {'err TE':>10} {'err TM':>10} {'2x err':>8}")
for x in (10.0, 50.0, 100.0, 200.0, 400.0, 800.0):
    (e1, e2), logs = deviation(x, -1.0, PerfectReflector())
    print(f"{x:6.0f} {logs:12.3f} {e1:10.2e} {e2:10.2e} {2 * x * e1:8.3f}")

# Away from backscattering (cos Theta < -1 at imaginary frequency) the
# specular point moves but the approximation keeps improving with x.
print("\ndielectric eps = 4, x = 200")
for z in (-1.0, -1.5, -3.0, -10.0):
    (e1, e2), _ = deviation(200.0, z, Dielectric(4.0))
    print(f"cos(Theta) = {z:6.1f}: err TE {e1:.2e}, err TM {e2:.2e}")

# The log-magnitude representation keeps huge amplitudes finite.
(e1, _), logs = deviation(5000.0, -1.0, PerfectReflector())
print(f"\nx = 5000: log|S1| = {logs:.1f} (|S1| ~ 10^{logs / np.log(10):.0f}), err {e1:.1e}")
