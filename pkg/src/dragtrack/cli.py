"""Command-line entry point.

Subcommands: refgen (build the reference profile), simulate (one guided
run), certify (stability certificate JSON), mc (Monte Carlo batch).
Exit codes: 0 success, 1 runtime failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import certify as certify_mod
from . import drag_chain, montecarlo, reference, sim
from .config import ConfigError, load_scenario


def _add_common(p):
    p.add_argument("--config", type=Path, default=None,
                   help="scenario file (default: packaged Mars scenario)")
    p.add_argument("--dt", type=float, default=None,
                   help="override integrator step, s")
    p.add_argument("--backend", choices=("auto", "python", "compiled"),
                   default="auto")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dragtrack",
        description="Drag-tracking entry guidance simulation toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("refgen", help="generate the reference drag profile")
    _add_common(p)
    p.add_argument("--out", type=Path, required=True,
                   help="output profile CSV")

    p = sub.add_parser("simulate", help="run one closed-loop entry")
    _add_common(p)
    p.add_argument("--mode", required=True,
                   choices=("state-feedback", "output-feedback"))
    p.add_argument("--profile", type=Path, required=True,
                   help="reference profile CSV from refgen")
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--noise-std", type=float, default=0.0,
                   help="drag measurement noise std, m/s^2")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("certify", help="emit the stability certificate")
    _add_common(p)
    p.add_argument("--samples", type=Path, default=None,
                   help="CSV of (x1, Delta) residual samples for the "
                        "disturbance-envelope fit")
    p.add_argument("--mc-gains", action="store_true",
                   help="certify the Monte Carlo gain set instead")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("mc", help="Monte Carlo dispersion study")
    _add_common(p)
    p.add_argument("--profile", type=Path, required=True)
    p.add_argument("-n", "--runs", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--per-run-csv", action="store_true",
                   help="also write one log CSV per run")
    return ap


def _scenario(args):
    scn = load_scenario(args.config)
    if args.dt is not None:
        if args.dt <= 0:
            raise ConfigError("--dt must be positive")
        scn = type(scn)(**{**scn.__dict__, "dt": args.dt})
    return scn


def cmd_refgen(args) -> int:
    scn = _scenario(args)
    profile, _ = reference.generate_reference(
        scn.planet, scn.vehicle, scn.initial_state, scn.terminal_v,
        scn.terminal_h, scn.target_downrange, dt=scn.dt,
        max_time=scn.max_time,
        bank_schedule=reference.scenario_schedule(scn),
        v_switch_frac=scn.ref_v_switch_frac)
    profile.to_csv(args.out)
    print(f"wrote {args.out}")
    print(f"s_target = {profile.s_target / 1e3:.3f} km "
          f"(goal {scn.target_downrange / 1e3:.2f} km)")
    print(f"terminal altitude = {profile.terminal_h / 1e3:.3f} km "
          f"at v = {profile.terminal_v:.1f} m/s over "
          f"{profile.duration:.1f} s")
    return 0


def _run_cfg(scn, args, mode, profile, gains=None, seed=0, noise=0.0):
    return sim.RunConfig(
        mode=mode, planet=scn.planet, vehicle=scn.vehicle,
        guidance=gains or scn.guidance, profile=profile,
        initial_state=scn.initial_state, V_f=scn.terminal_v, dt=scn.dt,
        max_time=scn.max_time, noise_std=noise, seed=seed)


def cmd_simulate(args) -> int:
    scn = _scenario(args)
    profile = reference.ReferenceProfile.from_csv(args.profile)
    cfg = _run_cfg(scn, args, args.mode, profile, seed=args.seed,
                   noise=args.noise_std)
    log, summary = sim.run_closed_loop(cfg, backend=args.backend)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    log.to_csv(args.out_dir / f"{args.mode}_log.csv")
    summary.to_json(args.out_dir / f"{args.mode}_summary.json")
    print(f"status: {summary.status}")
    print(f"downrange error = {summary.downrange_error / 1e3:.5f} km")
    print(f"altitude error  = {summary.altitude_error / 1e3:.5f} km")
    return 0 if summary.status == "terminated" else 1


def cmd_certify(args) -> int:
    scn = _scenario(args)
    g = scn.guidance_mc if args.mc_gains else scn.guidance
    l_est, d_est = 0.0, 0.0
    if args.samples is not None:
        import numpy as np
        data = np.loadtxt(args.samples, delimiter=",", comments="#",
                          skiprows=1, ndmin=2)
        l_est, d_est = certify_mod.estimate_delta_bound(data[:, 1],
                                                        data[:, 0])
    report = certify_mod.build_report(g.a, g.b, g.eps0, g.l1, g.l2, g.eps,
                                      l_est=l_est, d_est=d_est)
    report.to_json(args.out)
    print(f"wrote {args.out}")
    print(f"kappa = {report.kappa:.6g}, certified = {report.certified}")
    for note in report.notes:
        print(f"note: {note}")
    return 0


def cmd_mc(args) -> int:
    if args.runs < 1:
        raise ConfigError("-n must be >= 1")
    scn = _scenario(args)
    profile = reference.ReferenceProfile.from_csv(args.profile)
    base = _run_cfg(scn, args, "output-feedback", profile,
                    gains=scn.guidance_mc)
    stats, records = montecarlo.run_batch(
        args.runs, base, scn.dispersions, args.seed, n_jobs=args.jobs,
        backend=args.backend)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    stats.to_json(args.out_dir / "mc_stats.json")
    montecarlo.scatter_csv(records, args.out_dir / "mc_scatter.csv")
    print(stats.to_json())
    return 0


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    handler = {"refgen": cmd_refgen, "simulate": cmd_simulate,
               "certify": cmd_certify, "mc": cmd_mc}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
