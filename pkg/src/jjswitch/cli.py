"""Command-line entry point.

Subcommands: ground-state, evolve, switchdist, wkb, ratefit, sweep.
Every run writes CSV data plus a JSON manifest embedding the fully
resolved configuration; re-running with ``--config manifest.json``
reproduces the outputs byte-for-byte.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.  Errors
print a single machine-parsable line ``CONFIG_ERROR: ...`` or
``NUMERICAL_ERROR: ...`` to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import (absorber_from, describe, grid_settings_from, load_config,
                     params_from, sweep_spec_from)
from .errors import ConfigError, DomainError, JJSwitchError, ParameterError
from .experiments import sweep_measurement_count, sweep_ramp_time, write_sweep_outputs
from .initial import periodic_ground_state, truncate_to_open_grid
from .io import fmt17, write_csv, write_manifest
from .measure import record_to_csv, run_protocol
from .potential import BiasRamp
from .propagate import evolve, trace_to_csv
from .ratefit import prefactor_curve, rate_curve, rate_curve_to_csv
from .state import wavefunction_to_csv
from .wkb import adiabatic_pdf, distribution_to_csv, wkb_rate_function

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _manifest(command: str, cfg: dict, outputs: list) -> dict:
    return {
        "tool": "jjswitch",
        "version": __version__,
        "command": command,
        "config": cfg,
        "outputs": sorted(outputs),
    }


def _cmd_ground_state(cfg, out_dir, jobs):
    v0 = cfg["params"]["V0"]
    gs = periodic_ground_state(v0, cfg["initial"]["points"])
    write_csv(out_dir / "groundstate.csv", ["phi", "psi"], [gs.phi, gs.values])
    write_manifest(out_dir / "manifest.json",
                   _manifest("ground-state", cfg, ["groundstate.csv"]))
    print(f"E0 = {fmt17(gs.energy)} (V0 = {fmt17(v0)}, residual = {gs.residual:.2e})")
    return 0


def _cmd_evolve(cfg, out_dir, jobs):
    params = params_from(cfg)
    settings = grid_settings_from(cfg)
    absorber = absorber_from(cfg)
    grid = settings.build(absorber)
    psi = truncate_to_open_grid(
        periodic_ground_state(params.V0, cfg["initial"]["points"]), grid
    )
    bias_cfg = cfg["evolve"]["bias"]
    bias = BiasRamp(params.T) if bias_cfg == "ramp" else float(bias_cfg)
    psi, trace = evolve(psi, 0.0, cfg["evolve"]["t1"], params.dt, bias, params.V0,
                        absorber, trace_stride=cfg["evolve"]["trace_stride"])
    trace_to_csv(trace, out_dir / "trace.csv")
    wavefunction_to_csv(psi, out_dir / "state.csv")
    write_manifest(out_dir / "manifest.json",
                   _manifest("evolve", cfg, ["trace.csv", "state.csv"]))
    print(f"final in-domain probability = {fmt17(trace.in_domain_probability[-1])}")
    return 0


def _cmd_switchdist(cfg, out_dir, jobs):
    params = params_from(cfg)
    absorber = absorber_from(cfg)
    grid = grid_settings_from(cfg).build(absorber)
    record = run_protocol(params, grid, absorber, gs_points=cfg["initial"]["points"])
    record_to_csv(record, out_dir / "switchdist.csv")
    write_manifest(out_dir / "manifest.json",
                   _manifest("switchdist", cfg, ["switchdist.csv"]))
    print(
        f"total switch probability = {fmt17(np.sum(record.pdf))}, "
        f"survival = {fmt17(record.survival)}"
    )
    return 0


def _cmd_wkb(cfg, out_dir, jobs):
    params = params_from(cfg)
    dist = adiabatic_pdf(params.T, wkb_rate_function(params.V0),
                         np.linspace(0.0, 1.0, cfg["wkb"]["points"]))
    distribution_to_csv(dist, out_dir / "wkb.csv")
    write_manifest(out_dir / "manifest.json", _manifest("wkb", cfg, ["wkb.csv"]))
    print(f"normalization = {fmt17(dist.normalization)}")
    return 0


def _cmd_ratefit(cfg, out_dir, jobs):
    params = params_from(cfg)
    absorber = absorber_from(cfg)
    grid = grid_settings_from(cfg).build(absorber)
    rf = cfg["ratefit"]
    horizon, settle = rf["horizon"], rf["settle"]
    curve = rate_curve(params.V0, rf["gammas"], grid, absorber, dt=params.dt,
                       horizon=horizon, settle=settle,
                       trace_stride=rf["trace_stride"], jobs=jobs)
    prefactors = prefactor_curve(params.V0, [f.gamma for f in curve.fits],
                                 rf["t_over_n"], grid, absorber, dt=params.dt,
                                 horizon=horizon, settle=settle,
                                 trace_stride=rf["trace_stride"])
    rate_curve_to_csv(curve.fits, params.V0, out_dir / "ratefit.csv", prefactors)
    write_manifest(out_dir / "manifest.json",
                   _manifest("ratefit", cfg, ["ratefit.csv"]))
    for fit in curve.fits:
        print(
            f"gamma = {fit.gamma:g}: rate = {fmt17(fit.rate)}, "
            f"relaxation = {fit.relaxation_time:g}"
        )
    for gamma, msg in sorted(curve.failures.items()):
        print(f"gamma = {gamma:g}: FAILED ({msg})", file=sys.stderr)
    return 0


def _cmd_sweep(cfg, out_dir, jobs):
    spec = sweep_spec_from(cfg)
    if spec.kind == "N-sweep":
        result = sweep_measurement_count(
            spec.V0, spec.T_values[0], spec.N_values, dt=spec.dt, grid=spec.grid,
            absorber=spec.absorber, gs_points=spec.gs_points, jobs=jobs)
    elif spec.kind in ("T-sweep", "wkb-compare"):
        result = sweep_ramp_time(
            spec.V0, spec.N_values[0], spec.T_values, dt=spec.dt, grid=spec.grid,
            absorber=spec.absorber, gs_points=spec.gs_points, jobs=jobs)
    else:
        raise ConfigError(
            "sweep kind 'rate-curve' is served by the ratefit subcommand"
        )
    root = write_sweep_outputs(result, out_dir, spec.sweep_id,
                               _manifest("sweep", cfg, []))
    for row in result.peak_table:
        print(f"T = {row.T:g}, N = {row.N}: gamma_peak = {fmt17(row.gamma_peak)}")
    for key, msg in sorted(result.failures.items()):
        print(f"point {key}: FAILED ({msg})", file=sys.stderr)
    print(f"outputs in {root}")
    return 0


COMMANDS = {
    "ground-state": _cmd_ground_state,
    "evolve": _cmd_evolve,
    "switchdist": _cmd_switchdist,
    "wkb": _cmd_wkb,
    "ratefit": _cmd_ratefit,
    "sweep": _cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jjswitch",
        description="Switching-current statistics of a measured Josephson junction",
    )
    parser.add_argument("--version", action="version", version=f"jjswitch {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None,
                       help="TOML config file or a JSON manifest from a previous run")
        p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="override a single config value (repeatable)")
        p.add_argument("--out-dir", default="runs", help="output directory")
        p.add_argument("--jobs", type=int, default=1,
                       help="parallel worker processes for sweep points")
        p.add_argument("--dry-run", action="store_true",
                       help="validate the config, print the resolved values, and exit")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.set)
        if args.jobs < 1:
            raise ConfigError(f"--jobs must be >= 1, got {args.jobs}")
        if args.dry_run:
            print(describe(cfg))
            return 0
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out_dir, args.jobs)
    except (ConfigError, ParameterError, DomainError) as exc:
        print(f"CONFIG_ERROR: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except JJSwitchError as exc:
        print(f"NUMERICAL_ERROR: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
