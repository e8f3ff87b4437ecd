"""Command-line front end.

    qmeng otto    --b 0.5 --polarization 0.5
    qmeng pulse   --cos-theta 0.5 --omega-t0 20 --out run/
    qmeng measure --b 0.36 --cos-theta 0.3 --omega-t0 40
    qmeng gamma   --theta 0.7 --omega-t0 20 --cutoff-ratio 10
    qmeng sweep   --what power --gamma-min 1 --gamma-max 1000 --n 31
    qmeng figs    --out out/

Values come from built-in defaults, then ``--config`` (JSON), then flags.
Results go to stdout, or to files under ``--out``; a ``run_meta.json``
sidecar records the invocation.  Failures print a JSON object on stderr and
exit with 2 (bad configuration), 3 (domain violation) or 4 (convergence).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import __version__
from .engine import (MeasurementCyclePoint, efficiency_report, figure_grid,
                     maximize_power_corrected, measurement_ledger, power_corrected, sweep_gamma)
from .errors import ConvergenceError, DomainError
from .io import atomic_write, csv_text, json_text
from .model import DimensionlessGroups, load_config
from .otto import duration_bounds, maximize_otto_power, otto_ledger, otto_power
from .radiation import CutoffSpec, gamma_cubature, gamma_radial
from .spin import PulseSpec, mean_energy_after_pulse, trajectory_rows

EXIT_CONFIG, EXIT_DOMAIN, EXIT_CONVERGENCE = 2, 3, 4

DEFAULTS = dict(b=0.5, cos_theta=math.sqrt(0.5), omega_t0=20.0, polarization=0.5, rad_scale=1e-3)

OTTO_COLUMNS = ("b", "polarization", "E0", "E1", "E2", "E3", "W01", "Q12", "W23", "Q30",
                "efficiency", "power_over_Pmax", "b_star", "power_star")
TRAJECTORY_COLUMNS = ("t", "re_psi_plus", "im_psi_plus", "psi_minus", "sx_prime", "sy_prime",
                      "sz_prime")
RECORD_SWEEP_COLUMNS = ("theta", "omega_t0", "lambda_ratio", "gamma", "overlap",
                        "E_larmor_over_E_record")
POWER_SWEEP_COLUMNS = ("gamma", "b_star", "power_star", "b_star_sqrt_gamma", "power_star_gamma")
FIG1_COLUMNS = ("gamma", "b_star", "ref_inv_sqrt_gamma")
FIG2_COLUMNS = ("gamma", "power_star_over_Pmax", "ref_inv_gamma")


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file with physical inputs or a 'dimensionless' block")
    common.add_argument("--out", help="output directory (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="output format")
    common.add_argument("--b", type=float)
    common.add_argument("--cos-theta", type=float)
    common.add_argument("--theta", type=float, help="tilt angle in radians (alternative to --cos-theta)")
    common.add_argument("--omega-t0", type=float)
    common.add_argument("--gamma", type=float,
                        help="measurement duration mu*Bz1*t0/hbar; sets omega*t0 = gamma/cos(theta)")
    common.add_argument("--polarization", type=float)
    common.add_argument("--rad-scale", type=float)
    common.add_argument("--cutoff-ratio", type=float, default=10.0, help="Lambda/(2 omega)")
    common.add_argument("--window", choices=("sharp", "smooth-turnon"), default="sharp")
    common.add_argument("--ramp-time", type=float, help="turn-on ramp, units of 1/omega")
    common.add_argument("--ramp-shape", choices=("linear", "cosine"), default="linear")
    common.add_argument("--rtol", type=float, default=1e-8, help="quadrature doubling tolerance")
    common.add_argument("--tol", type=float, default=1e-8, help="optimizer tolerance in b")
    common.add_argument("--workers", type=int, help="worker threads (capped by QMENG_THREADS)")

    p = _Parser(prog="qmeng", description="Spin-1/2 quantum measurement engine")
    p.add_argument("--version", action="version", version=f"qmeng {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    sub.add_parser("otto", parents=[common], help="thermal Otto ledger and power optimum")
    sp = sub.add_parser("pulse", parents=[common], help="spin trajectory through the pulse")
    sp.add_argument("--n-samples", type=int, default=201)
    sp.add_argument("--initial", choices=("+", "-"), default="+")
    sm = sub.add_parser("measure", parents=[common], help="measurement-engine ledger and efficiencies")
    sm.add_argument("--gamma-value", type=float, help="supply Gamma instead of computing it")
    sg = sub.add_parser("gamma", parents=[common], help="record distinguishability Gamma")
    sg.add_argument("--method", choices=("radial", "cubature"), default="radial")
    sw = sub.add_parser("sweep", parents=[common], help="parameter sweeps")
    sw.add_argument("--what", choices=("power", "record"), default="power")
    sw.add_argument("--gamma-min", type=float, default=0.1)
    sw.add_argument("--gamma-max", type=float, default=1e3)
    sw.add_argument("--n", type=int, default=60)
    sw.add_argument("--thetas", type=_floats, default=[math.pi / 6, math.pi / 4, math.pi / 3])
    sw.add_argument("--omega-t0s", type=_floats, default=[5.0, 20.0, 50.0])
    sw.add_argument("--cutoff-ratios", type=_floats, default=[10.0])
    sf = sub.add_parser("figs", parents=[common], help="data behind the b_star and power_star figures")
    sf.add_argument("--n", type=int, default=60)
    return p


def resolve_groups(args) -> DimensionlessGroups:
    values = dict(DEFAULTS)
    base = None
    if args.config:
        try:
            base = load_config(args.config)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        values.update(b=base.b, cos_theta=base.cos_theta, omega_t0=base.omega_t0,
                      polarization=base.polarization, rad_scale=base.rad_scale)
    if args.theta is not None and args.cos_theta is not None:
        raise ConfigError("give --theta or --cos-theta, not both")
    if args.theta is not None:
        values["cos_theta"] = math.cos(args.theta)
    for key in ("b", "cos_theta", "omega_t0", "polarization", "rad_scale"):
        v = getattr(args, key)
        if v is not None:
            values[key] = v
    if args.gamma is not None and args.omega_t0 is None:
        if not values["cos_theta"] > 0:
            raise DomainError("cos_theta must be > 0 to convert gamma to omega*t0")
        values["omega_t0"] = args.gamma / values["cos_theta"]
    if base is not None:
        return replace(base, **values)
    return DimensionlessGroups(**values)


def resolve_cutoff(args) -> CutoffSpec:
    return CutoffSpec(lambda_over_2omega=args.cutoff_ratio, window=args.window,
                      ramp_time=args.ramp_time, ramp_shape=args.ramp_shape, rtol=args.rtol)


def _emit(args, name, payload_json=None, csv_parts=None):
    """Write results to stdout or ``--out``; returns written paths."""
    fmt = args.format or ("json" if payload_json is not None else "csv")
    if fmt == "csv" and csv_parts is None:
        fmt = "json"
    if fmt == "json" and payload_json is None:
        fmt = "csv"
    text = json_text(payload_json) if fmt == "json" else csv_text(*csv_parts)
    if args.out is None:
        sys.stdout.write(text)
        return []
    return [atomic_write(Path(args.out) / f"{name}.{fmt}", text)]


def cmd_otto(args):
    g = resolve_groups(args)
    led = otto_ledger(g.b, g.polarization)
    b_star, p_star = maximize_otto_power(tol=args.tol)
    power = otto_power(g.b) if g.b < 1 else 0.0
    payload = {**led.as_dict(), "b": g.b, "polarization": g.polarization,
               "power_over_Pmax": power, "b_star": b_star, "power_star": p_star}
    if g.b < 1:
        d = duration_bounds(g.b)
        payload["duration_bounds"] = {"adiabatic_lower": d.adiabatic_lower,
                                      "qsl_lower": d.qsl_lower,
                                      "total_cycle_time": d.total_cycle_time}
    row = (g.b, g.polarization, *led.node_energies, led.W01, led.Q12, led.W23, led.Q30,
           led.efficiency, power, b_star, p_star)
    return _emit(args, "otto", payload, (OTTO_COLUMNS, [row]))


def cmd_pulse(args):
    g = resolve_groups(args)
    spec = PulseSpec.from_groups(g)
    sign = 1 if args.initial == "+" else -1
    if args.n_samples < 2:
        raise DomainError("--n-samples must be >= 2")
    rows = trajectory_rows(spec, args.n_samples, sign)
    payload = {"cos_theta": g.cos_theta, "omega_t0": g.omega_t0, "initial": args.initial,
               "mean_energy_after_pulse": mean_energy_after_pulse(spec, sign),
               "trajectory": {c: [r[i] for r in rows] for i, c in enumerate(TRAJECTORY_COLUMNS)}}
    return _emit(args, "trajectory", payload if args.format == "json" else None,
                 (TRAJECTORY_COLUMNS, rows))


def cmd_measure(args):
    g = resolve_groups(args)
    cutoff = resolve_cutoff(args)
    if args.gamma_value is not None:
        gamma_value, source = args.gamma_value, "supplied"
    else:
        gamma_value, source = gamma_radial(g, cutoff, args.workers).gamma_value, "radial"
    point = MeasurementCyclePoint.from_groups(g, gamma_value)
    led = measurement_ledger(point)
    eff = efficiency_report(point)
    b_star, p_star = maximize_power_corrected(point.gamma, args.tol)
    payload = {"groups": {"b": g.b, "cos_theta": g.cos_theta, "omega_t0": g.omega_t0,
                          "gamma": g.gamma, "polarization": g.polarization,
                          "rad_scale": g.rad_scale},
               "gamma_value": gamma_value, "gamma_value_source": source,
               "ledger": led.as_dict(), "efficiency": eff.as_dict(),
               "power_corrected_over_Pmax": power_corrected(g.b, g.gamma) if g.b < 1 else 0.0,
               "b_star": b_star, "power_star": p_star}
    return _emit(args, "measure", payload)


def cmd_gamma(args):
    g = resolve_groups(args)
    cutoff = resolve_cutoff(args)
    fn = gamma_cubature if args.method == "cubature" else gamma_radial
    res = fn(g, cutoff, args.workers)
    return _emit(args, "gamma", res.as_dict())


def cmd_sweep(args):
    if args.what == "power":
        if args.n < 2 or not 0 < args.gamma_min < args.gamma_max:
            raise DomainError("need n >= 2 and 0 < gamma-min < gamma-max")
        rows = sweep_gamma(figure_grid(args.n, args.gamma_min, args.gamma_max), args.tol)
        table = [(r.gamma, r.b_star, r.power_star, r.b_star_sqrt_gamma, r.power_star_gamma)
                 for r in rows]
        return _emit(args, "sweep_power", None, (POWER_SWEEP_COLUMNS, table))
    base = resolve_groups(args)
    table = []
    for theta in args.thetas:
        for wt0 in args.omega_t0s:
            for ratio in args.cutoff_ratios:
                g = replace(base, cos_theta=math.cos(theta), omega_t0=wt0)
                c = replace(resolve_cutoff(args), lambda_over_2omega=ratio)
                res = gamma_radial(g, c, args.workers)
                ratio_e = (res.radiated_energy_larmor / res.radiated_energy_record
                           if res.radiated_energy_record > 0 else math.nan)
                table.append((theta, wt0, ratio, res.gamma_value, res.overlap, ratio_e))
    return _emit(args, "sweep_record", None, (RECORD_SWEEP_COLUMNS, table))


def figure_tables(n=60, tol=1e-8):
    rows = sweep_gamma(figure_grid(n), tol)
    fig1 = [(r.gamma, r.b_star, 1.0 / math.sqrt(r.gamma)) for r in rows]
    fig2 = [(r.gamma, r.power_star, 1.0 / r.gamma) for r in rows]
    return fig1, fig2


def cmd_figs(args):
    fig1, fig2 = figure_tables(args.n, args.tol)
    out = Path(args.out or ".")
    return [atomic_write(out / "fig1.csv", csv_text(FIG1_COLUMNS, fig1)),
            atomic_write(out / "fig2.csv", csv_text(FIG2_COLUMNS, fig2))]


COMMANDS = {"otto": cmd_otto, "pulse": cmd_pulse, "measure": cmd_measure,
            "gamma": cmd_gamma, "sweep": cmd_sweep, "figs": cmd_figs}


def _fail(code, kind, message):
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")
    return code


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
        written = COMMANDS[args.subcommand](args)
        out = getattr(args, "out", None) or (args.subcommand == "figs" and ".")
        if out:
            meta = {"version": __version__, "argv": argv, "subcommand": args.subcommand,
                    "written": [p.name for p in written],
                    "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z")}
            atomic_write(Path(out) / "run_meta.json", json_text(meta))
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "config", str(exc))
    except ConvergenceError as exc:
        return _fail(EXIT_CONVERGENCE, "convergence", str(exc))
    except DomainError as exc:
        return _fail(EXIT_DOMAIN, "domain", str(exc))
    except (TypeError, ValueError) as exc:
        return _fail(EXIT_DOMAIN, "domain", str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
