"""Command-line interface.

Subcommands: fit, power-sweep, temp-study, synth, geometry, calibrate.
Global flags (--config, --out, --seed, --format) are accepted both before
and after the subcommand.  Exit codes: 0 success, 1 run-level error,
2 configuration/usage error.  The VGRES_OUT environment variable overrides
the configured output directory (but not an explicit --out).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from .core import TempModelParams, microev_to_joules
from .errors import ConfigError, VgresError
from .io import (load_sweep, write_sweep_csv, write_sweep_touchstone,
                 write_temperature_series)
from .microstrip import (capacitance_per_length, geometric_inductance_per_length,
                         kinetic_fraction, kinetic_inductance_per_length,
                         quarter_wave_frequency, sheet_inductance_oracle)
from .notch import NotchParams, fit_notch
from .photon import YFactorData, y_factor
from .pipeline import load_config, run_power_sweep, run_temperature_study
from .report import (render_tree, write_power_sweep_report,
                     write_temperature_report)
from .synth import NoiseSpec, frequency_grid, synth_notch, \
    synth_temperature_series


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # SUPPRESS keeps a flag parsed before the subcommand from being
    # clobbered by the subparser's default
    common.add_argument("--config", default=argparse.SUPPRESS,
                        help="run configuration file (INI)")
    common.add_argument("--out", default=argparse.SUPPRESS,
                        help="output directory")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="64-bit seed for synthetic data")
    common.add_argument("--format", choices=("csv", "touchstone"),
                        default=argparse.SUPPRESS, help="sweep file format")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="vgres",
        description="Vacuum-gap microstrip resonator characterization",
        parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", parents=[common],
                           help="fit a single notch sweep file")
    p_fit.add_argument("path", help="sweep file (CSV or Touchstone)")
    p_fit.set_defaults(func=cmd_fit)

    p_ps = sub.add_parser("power-sweep", parents=[common],
                          help="batch power sweep from a configuration")
    p_ps.set_defaults(func=cmd_power_sweep)

    p_ts = sub.add_parser("temp-study", parents=[common],
                          help="batch temperature study from a configuration")
    p_ts.set_defaults(func=cmd_temp_study)

    p_synth = sub.add_parser("synth", parents=[common],
                             help="generate synthetic datasets")
    synth_sub = p_synth.add_subparsers(dest="what", required=True)

    p_sn = synth_sub.add_parser("notch", parents=[common],
                                help="synthetic notch sweep")
    p_sn.add_argument("output", help="output file")
    p_sn.add_argument("--f-r", type=float, default=5e9)
    p_sn.add_argument("--q-l", type=float, default=2000.0)
    p_sn.add_argument("--q-c", type=float, default=4000.0)
    p_sn.add_argument("--phi", type=float, default=0.0)
    p_sn.add_argument("--amp", type=float, default=1.0)
    p_sn.add_argument("--phase", type=float, default=0.0)
    p_sn.add_argument("--delay", type=float, default=0.0,
                      help="cable delay in seconds")
    p_sn.add_argument("--span-linewidths", type=float, default=40.0)
    p_sn.add_argument("--points", type=int, default=801)
    p_sn.add_argument("--noise", type=float, default=0.0,
                      help="per-quadrature additive sigma")
    p_sn.add_argument("--power-dbm", type=float, default=None)
    p_sn.add_argument("--temperature-k", type=float, default=None)
    p_sn.add_argument("--resonator", default=None)
    p_sn.set_defaults(func=cmd_synth_notch)

    p_st = synth_sub.add_parser("temperature", parents=[common],
                                help="synthetic temperature series")
    p_st.add_argument("output", help="output file")
    p_st.add_argument("--f0", type=float, default=5e9)
    p_st.add_argument("--f-tan-delta", type=float, default=5.9e-4)
    p_st.add_argument("--delta-uev", type=float, default=351.0)
    p_st.add_argument("--alpha", type=float, default=0.999)
    p_st.add_argument("--t-min", type=float, default=0.05)
    p_st.add_argument("--t-max", type=float, default=0.7)
    p_st.add_argument("--t-step", type=float, default=0.05)
    p_st.add_argument("--jitter", type=float, default=0.0,
                      help="relative frequency jitter sigma")
    p_st.set_defaults(func=cmd_synth_temperature)

    p_geo = sub.add_parser("geometry", parents=[common],
                           help="vacuum-gap line parameters")
    p_geo.add_argument("--gap", type=float, required=True,
                       help="vacuum gap h in meters")
    p_geo.add_argument("--width", type=float, required=True,
                       help="conductor width w in meters")
    p_geo.add_argument("--length", type=float, default=None,
                       help="resonator length in meters")
    p_geo.add_argument("--sheet-inductance", type=float, default=0.0,
                       help="sheet kinetic inductance in H per square")
    p_geo.add_argument("--oracle-strips", type=int, default=0,
                       help="run the flux-integration check with N strips")
    p_geo.set_defaults(func=cmd_geometry)

    p_cal = sub.add_parser("calibrate", parents=[common],
                           help="Y-factor gain and noise temperature")
    p_cal.add_argument("--p-hot", type=float, help="hot-load power (W)")
    p_cal.add_argument("--p-cold", type=float, help="cold-load power (W)")
    p_cal.add_argument("--t-hot", type=float, help="hot-load temperature (K)")
    p_cal.add_argument("--t-cold", type=float, help="cold-load temperature (K)")
    p_cal.add_argument("--bandwidth", type=float, help="bandwidth (Hz)")
    p_cal.add_argument("--planck-frequency", type=float, default=None)
    p_cal.set_defaults(func=cmd_calibrate)
    return parser


def _resolve_out(args, config=None) -> Path:
    out = getattr(args, "out", None)
    if out:
        return Path(out)
    env = os.environ.get("VGRES_OUT")
    if env:
        return Path(env)
    if config is not None and config.out_dir:
        return Path(config.out_dir)
    return Path("vgres-out")


def _require_config(args):
    path = getattr(args, "config", None)
    if not path:
        raise ConfigError("this command needs --config <file>")
    config = load_config(path)
    fmt = getattr(args, "format", None)
    if fmt:
        config.fmt = fmt
    return config


def cmd_fit(args) -> int:
    sweeps = load_sweep(args.path, getattr(args, "format", None))
    fit = fit_notch(sweeps[0])
    tree = {
        "file": args.path,
        "f-r-hz": fit.f_r, "q-l": fit.q_l, "q-c-mag": fit.q_c_mag,
        "phi-rad": fit.phi, "q-int": fit.q_int,
        "tan-delta": fit.tan_delta,
        "background-amp": fit.background_amp,
        "background-phase-rad": fit.background_phase,
        "cable-delay-s": fit.cable_delay,
        "residual-rms": fit.residual_rms,
    }
    sys.stdout.write(render_tree(tree))
    return 0


def cmd_power_sweep(args) -> int:
    config = _require_config(args)
    result = run_power_sweep(config)
    out = _resolve_out(args, config)
    path = write_power_sweep_report(result, out)
    print(f"power-sweep: {len(result.rows)} fits, "
          f"{len(result.failures)} failures -> {path}")
    return 0


def cmd_temp_study(args) -> int:
    config = _require_config(args)
    result = run_temperature_study(config)
    out = _resolve_out(args, config)
    path = write_temperature_report(result, out)
    n_fits = sum(len(g.fits) for g in result.groups)
    print(f"temp-study: {len(result.groups)} groups, {n_fits} fits, "
          f"{len(result.failures)} failures -> {path}")
    return 0


def cmd_synth_notch(args) -> int:
    params = NotchParams(a=args.amp, theta=args.phase, tau=args.delay,
                         q_l=args.q_l, q_c_mag=args.q_c, phi=args.phi,
                         f_r=args.f_r)
    grid = frequency_grid(args.f_r, args.q_l, args.span_linewidths,
                          args.points)
    noise = NoiseSpec(complex_sigma=args.noise,
                      seed=getattr(args, "seed", 0) or 0)
    sweep = synth_notch(params, grid, noise,
                        drive_power_dbm=args.power_dbm)
    meta = {}
    if args.temperature_k is not None:
        meta["temperature_k"] = args.temperature_k
    if args.resonator is not None:
        meta["resonator"] = args.resonator
    out_path = Path(args.output)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    if getattr(args, "format", None) == "touchstone" or \
            out_path.suffix.lower() in (".s2p", ".snp", ".ts"):
        write_sweep_touchstone(out_path, sweep, metadata=meta)
    else:
        write_sweep_csv(out_path, sweep, metadata=meta)
    print(f"synth notch -> {out_path}")
    return 0


def cmd_synth_temperature(args) -> int:
    params = TempModelParams(f_tan_delta=args.f_tan_delta,
                             delta_0=microev_to_joules(args.delta_uev),
                             alpha=args.alpha, f0=args.f0)
    temps = np.arange(args.t_min, args.t_max + 0.5 * args.t_step, args.t_step)
    series = synth_temperature_series(params, temps, args.jitter,
                                      getattr(args, "seed", 0) or 0)
    out_path = Path(args.output)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    write_temperature_series(out_path, series)
    print(f"synth temperature -> {out_path}")
    return 0


def cmd_geometry(args) -> int:
    l_geom = geometric_inductance_per_length(args.gap, args.width)
    c = capacitance_per_length(args.width, args.gap)
    tree = {
        "gap-m": args.gap, "width-m": args.width,
        "geometric-inductance-h-per-m": l_geom,
        "capacitance-f-per-m": c,
    }
    l_total = l_geom
    if args.sheet_inductance > 0:
        l_kin = kinetic_inductance_per_length(args.sheet_inductance,
                                              args.width)
        l_total = l_kin + l_geom
        tree["kinetic-inductance-h-per-m"] = l_kin
        tree["kinetic-fraction"] = kinetic_fraction(l_kin, l_geom)
    if args.length:
        f_quarter, velocity, impedance = quarter_wave_frequency(
            l_total, c, args.length)
        tree.update({
            "length-m": args.length,
            "quarter-wave-frequency-hz": f_quarter,
            "phase-velocity-m-per-s": velocity,
            "impedance-ohm": impedance,
        })
    if args.oracle_strips:
        oracle = sheet_inductance_oracle(args.gap, args.width,
                                         args.oracle_strips)
        tree["flux-oracle-h-per-m"] = oracle
        tree["flux-oracle-rel-deviation"] = (oracle - l_geom) / l_geom
    sys.stdout.write(render_tree(tree))
    return 0


def cmd_calibrate(args) -> int:
    if getattr(args, "config", None):
        config = load_config(args.config)
        if config.calibration.mode != "y-factor":
            raise ConfigError("config has no y-factor calibration section")
        data = config.calibration.y_data
        planck = config.calibration.planck_frequency_hz
    else:
        missing = [n for n in ("p_hot", "p_cold", "t_hot", "t_cold",
                               "bandwidth") if getattr(args, n) is None]
        if missing:
            raise ConfigError(
                "calibrate needs --config or all of --p-hot --p-cold "
                "--t-hot --t-cold --bandwidth")
        data = YFactorData(p_hot=args.p_hot, p_cold=args.p_cold,
                           t_hot=args.t_hot, t_cold=args.t_cold,
                           bandwidth=args.bandwidth)
        planck = args.planck_frequency
    gain, t_e = y_factor(data, planck)
    tree = {
        "y-factor": data.p_hot / data.p_cold,
        "gain-linear": gain,
        "gain-db": 10.0 * math.log10(gain),
        "noise-temperature-k": t_e,
    }
    sys.stdout.write(render_tree(tree))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except (VgresError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
