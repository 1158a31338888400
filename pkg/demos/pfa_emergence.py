"""How the proximity force approximation emerges from the round-trip trace.

A single round trip between a sphere and a plane is computed in the
plane-wave basis with exact Mie amplitudes, then divided by the PFA trace.
The ratio tends to one as the sphere grows relative to the gap. The same
happens for two equal spheres, where the relevant radius is R1 R2/(R1+R2).

Run:  python demos/pfa_emergence.py
"""

import math
import time

from casimir_pfa import pfa
from casimir_pfa import roundtrip as rt
from casimir_pfa.geometry import Geometry
from casimir_pfa.materials import PerfectReflector

PR = (PerfectReflector(), PerfectReflector())
L = 1.0  # lengths in units of the gap


def ratio(geom, r=1, xi=0.0, **kw):
    res = rt.trace_m_r(r, xi, geom, PR, **kw)
    return res.trace / pfa.tr_m_r_pfa(r, xi, geom.L, geom.R_eff, PR), res.n_nodes


print("plane-sphere, one round trip, zero frequency")
print(f"{'R/L':>8} {'tr M / tr M_PFA':>16} {'nodes':>9}")
for R in (10.0, 30.0, 100.0, 300.0, 1000.0):
    rho, n = ratio(Geometry(R, math.inf, L))
    print(f"{R:8.0f} {rho:16.6f} {n:9d}")

# Two round trips: the offset windows multiply, so the node count grows fast.
print("\nplane-sphere, two round trips")
for R in (100.0, 1000.0):
    rho, n = ratio(Geometry(R, math.inf, L), r=2)
    print(f"{R:8.0f} {rho:16.6f} {n:9d}")

print("\nsphere-sphere, R1 = R2, one round trip")
print(f"{'R_eff/L':>8} {'tr M / tr M_PFA':>16} {'nodes':>9}")
t0 = time.perf_counter()
for reff in (1.0, 10.0, 100.0):
    rho, n = ratio(Geometry(2 * reff, 2 * reff, L))
    print(f"{reff:8.0f} {rho:16.6f} {n:9d}")
print(f"({time.perf_counter() - t0:.1f} s)")

# At finite frequency the WKB amplitudes reproduce the PFA trace exactly for a
# single plane-sphere round trip, which isolates the role of the saddle point.
xi = 0.5 * 299792458.0 / L
rho_exact, _ = ratio(Geometry(100.0, math.inf, L), xi=xi)
rho_wkb, _ = ratio(Geometry(100.0, math.inf, L), xi=xi, amplitude_kind=rt.WKB)
print(f"\nR/L = 100, xi = c/2L: exact {rho_exact:.6f}, wkb {rho_wkb:.10f}")
