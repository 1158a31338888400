"""Command line front end.

Subcommands
-----------
pfa         PFA free energy and force, optionally swept over the gap
roundtrip   numerical round-trip traces compared with their PFA values
wkb-check   exact Mie amplitudes against the specular-reflection formula
materials   permittivity and Fresnel coefficients of a material

Output is CSV (default) or JSON lines, SI units throughout. Exit codes:
0 success, 2 invalid input, 3 nonconvergence, 4 evaluation budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import mie, pfa, roundtrip, wkb
from .constants import C
from .errors import BudgetExceeded, ConvergenceError
from .geometry import Geometry
from .materials import Dielectric, PerfectReflector, fresnel, material_label, parse_material, permittivity

EXIT_OK, EXIT_PARSE, EXIT_NONCONVERGENCE, EXIT_BUDGET = 0, 2, 3, 4


@dataclass
class RunConfig:
    subcommand: str
    fmt: str = "csv"
    output: str | None = None
    options: dict = field(default_factory=dict)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _positive(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def _nonnegative(text):
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {text!r}")
    return value


def _material(text):
    try:
        return parse_material(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _sweep(text):
    """``a:b:n`` -> n linearly spaced values from a to b."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"sweep must look like start:stop:count, got {text!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid sweep {text!r}") from None
    if n < 1 or not (a > 0 and b > 0):
        raise argparse.ArgumentTypeError("sweep needs positive bounds and count >= 1")
    return list(np.linspace(a, b, n)) if n > 1 else [a]


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number list {text!r}") from None


def _add_output(p):
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")
    p.add_argument("--output", "-o", default=None, help="output file (default: stdout)")


def build_parser():
    parser = _Parser(prog="casimir-pfa", description="Casimir free energy and force of spheres in the PFA and beyond.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("pfa", help="PFA free energy and force")
    p.add_argument("--r1", type=_positive, required=True, help="radius of sphere 1 (m)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--r2", type=_positive, help="radius of sphere 2 (m)")
    g.add_argument("--plane", action="store_true", help="replace sphere 2 by a plane")
    gap = p.add_mutually_exclusive_group(required=True)
    gap.add_argument("--gap", type=_positive, help="surface separation L (m)")
    gap.add_argument("--sweep-gap", type=_sweep, help="start:stop:count, linear in L (m)")
    p.add_argument("--temp", type=_nonnegative, default=300.0, help="temperature (K); 0 uses the T = 0 formulas")
    p.add_argument("--material1", type=_material, default=PerfectReflector())
    p.add_argument("--material2", type=_material, default=PerfectReflector())
    p.add_argument("--nodes", type=int, default=pfa.DEFAULT_NODES, help="kappa quadrature nodes")
    _add_output(p)

    p = sub.add_parser("roundtrip", help="numerical tr M^r compared with the PFA trace")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--plane", action="store_true", default=True, help="plane-sphere (default)")
    g.add_argument("--mu", type=float, help="sphere-sphere with mu = R1/(R1+R2) in (0, 1/2]")
    p.add_argument("--ratios", type=_float_list, default=[1e2, 3e2, 1e3], help="comma-separated R_eff/L values")
    p.add_argument("--gap", type=_positive, default=1e-6, help="surface separation L (m)")
    p.add_argument("--r", type=int, default=1, help="round-trip number")
    p.add_argument("--xi", type=_nonnegative, default=0.0, help="imaginary frequency (rad/s)")
    p.add_argument("--amplitude", choices=(roundtrip.EXACT, roundtrip.WKB), default=roundtrip.EXACT)
    p.add_argument("--material1", type=_material, default=PerfectReflector())
    p.add_argument("--material2", type=_material, default=PerfectReflector())
    p.add_argument("--n-k", type=int, default=roundtrip.QuadratureSpec.n_k)
    p.add_argument("--n-phi", type=int, default=roundtrip.QuadratureSpec.n_phi)
    p.add_argument("--n-panel", type=int, default=roundtrip.QuadratureSpec.n_panel)
    p.add_argument("--window", type=_positive, default=roundtrip.QuadratureSpec.window)
    p.add_argument("--rtol", type=_positive, default=1e-3, help="doubling-gate tolerance")
    p.add_argument("--budget", type=int, default=roundtrip.DEFAULT_BUDGET, help="maximum number of nodes")
    _add_output(p)

    p = sub.add_parser("wkb-check", help="exact Mie amplitudes versus the WKB formula")
    p.add_argument("--x", type=_float_list, default=[50.0, 100.0, 200.0, 400.0], help="comma-separated size parameters")
    p.add_argument("--cos-theta", type=_float_list, default=[-1.0], help="comma-separated cos(Theta) <= -1")
    p.add_argument("--material", type=_material, default=PerfectReflector())
    p.add_argument("--radius", type=_positive, default=None, help="sphere radius (m), needed for dispersive materials")
    _add_output(p)

    p = sub.add_parser("materials", help="permittivity and Fresnel coefficients")
    p.add_argument("--material", type=_material, required=True)
    p.add_argument("--xi", type=_float_list, default=[0.0, 1e13, 1e14, 1e15, 1e16], help="comma-separated xi (rad/s)")
    p.add_argument("--k", type=_nonnegative, default=0.0, help="transverse wave number (1/m)")
    _add_output(p)
    return parser


# ---------------------------------------------------------------- runners


def run_pfa(args):
    gaps = args.sweep_gap if args.sweep_gap is not None else [args.gap]
    if args.plane or args.r2 is None:
        r2 = math.inf
    else:
        r2 = args.r2
    models = (args.material1, args.material2)
    thermal = pfa.ThermalSpec(args.temp)
    header = pfa.csv_header()
    rows = [pfa.csv_row(Geometry(args.r1, r2, L), models, thermal, args.nodes) for L in gaps]
    return header, rows


def _geometry_for_ratio(ratio, L, mu):
    reff = ratio * L
    if mu is None:
        return Geometry(reff, math.inf, L)
    if not 0 < mu <= 0.5:
        raise ValueError("mu must lie in (0, 1/2]")
    total = reff / (mu * (1 - mu))
    return Geometry(mu * total, (1 - mu) * total, L)


def run_roundtrip(args):
    quad = roundtrip.QuadratureSpec(args.n_k, args.n_phi, args.n_panel, args.window)
    models = (args.material1, args.material2)
    header = ["R_over_L", "r", "xi", "trace", "trace_pfa", "ratio", "est_error", "n_nodes"]
    rows = []
    for ratio in args.ratios:
        geom = _geometry_for_ratio(ratio, args.gap, args.mu)
        res = roundtrip.trace_m_r(args.r, args.xi, geom, models, quad, args.amplitude, args.rtol, args.budget)
        ref = pfa.tr_m_r_pfa(args.r, args.xi, geom.L, geom.R_eff, models)
        ratio_value = res.trace / ref if ref else math.nan
        rows.append([ratio, args.r, args.xi, res.trace, ref, ratio_value, res.est_error / abs(ref) if ref else math.nan, res.n_nodes])
    return header, rows


def run_wkb_check(args):
    if any(z > -1 for z in args.cos_theta):
        raise ValueError("only backward channels cos(Theta) <= -1 exist at imaginary frequency; forward directions are outside the WKB domain")
    header = ["x", "cos_theta", "polarization", "sign", "log_abs_s_exact", "log_abs_s_wkb", "rel_error", "est_error"]
    rows = []
    for x in args.x:
        kin = mie.ScatteringKinematics.from_cos_theta(args.cos_theta)
        s1, s2 = mie.scattering_amplitudes(kin, x, args.material, radius=args.radius)
        for pol, s in (("TE", s1), ("TM", s2)):
            w = wkb.amplitude(pol, kin, x, args.material, radius=args.radius)
            sign_e, log_e = np.atleast_1d(s.sign), np.atleast_1d(s.log_magnitude)
            sign_w, log_w = np.atleast_1d(w.sign), np.atleast_1d(w.log_magnitude)
            for i, z in enumerate(args.cos_theta):
                if sign_w[i] == 0:
                    rel = math.nan
                else:
                    rel = abs(sign_e[i] * sign_w[i] * math.exp(log_e[i] - log_w[i]) - 1)
                rows.append([x, z, pol, float(sign_e[i]), float(log_e[i]), float(log_w[i]), rel, mie.DEFAULT_TOL])
    return header, rows


def run_materials(args):
    header = ["material", "xi", "k", "kappa", "eps", "r_te", "r_tm", "est_error"]
    rows = []
    for xi in args.xi:
        if xi < 0:
            raise ValueError("xi must be non-negative")
        kappa = math.sqrt((xi / C) ** 2 + args.k**2)
        if xi == 0 and kappa == 0:
            raise ValueError("xi = 0 needs k > 0")
        if xi > 0:
            eps = float(permittivity(args.material, xi))
        else:
            eps = args.material.eps0 if isinstance(args.material, Dielectric) else math.inf
        rte, rtm = fresnel(args.material, xi, kappa)
        rows.append([material_label(args.material), xi, args.k, kappa, eps, float(rte), float(rtm), 0.0])
    return header, rows


_RUNNERS = {"pfa": run_pfa, "roundtrip": run_roundtrip, "wkb-check": run_wkb_check, "materials": run_materials}


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _json_value(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return repr(v)
        return v
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_table(header, rows, fh, fmt):
    if fmt == "csv":
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    else:
        for row in rows:
            fh.write(json.dumps({h: _json_value(v) for h, v in zip(header, row)}) + "\n")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    config = RunConfig(args.subcommand, args.format, args.output, vars(args))
    try:
        header, rows = _RUNNERS[config.subcommand](args)
    except (ValueError, TypeError) as exc:
        print(f"casimir-pfa: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BudgetExceeded as exc:
        print(f"casimir-pfa: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ConvergenceError as exc:
        print(f"casimir-pfa: not converged: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    if config.output:
        with open(config.output, "w", newline="") as fh:
            write_table(header, rows, fh, config.fmt)
    else:
        write_table(header, rows, sys.stdout, config.fmt)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
