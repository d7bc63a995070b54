"""Time the compiled stepping kernel against the pure-Python fallback.

Runs the same nominal closed-loop trajectory through both backends,
checks they agree, and reports per-run wall time and the speedup.

Usage: python3 benchmarks/kernel_benchmark.py [--repeats N] [--mc N]
"""

import argparse
import time

import numpy as np

from dragtrack.config import load_scenario
from dragtrack.montecarlo import DispersionSpec, run_batch
from dragtrack.reference import generate_reference, scenario_schedule
from dragtrack.sim import HAVE_COMPILED, RunConfig, run_closed_loop


def time_backend(cfg, backend, repeats):
    run_closed_loop(cfg, backend=backend)          # warm-up
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        log, _ = run_closed_loop(cfg, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, log


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5,
                    help="timing repetitions per backend (best-of)")
    ap.add_argument("--mc", type=int, default=0,
                    help="also time a Monte Carlo batch of this size")
    args = ap.parse_args()

    if not HAVE_COMPILED:
        raise SystemExit("compiled kernel not built; nothing to compare")

    scn = load_scenario()
    profile, _ = generate_reference(
        scn.planet, scn.vehicle, scn.initial_state, scn.terminal_v,
        scn.terminal_h, scn.target_downrange, dt=scn.dt,
        max_time=scn.max_time, bank_schedule=scenario_schedule(scn))
    cfg = RunConfig(mode="output-feedback", planet=scn.planet,
                    vehicle=scn.vehicle, guidance=scn.guidance,
                    profile=profile, initial_state=scn.initial_state,
                    V_f=scn.terminal_v, dt=scn.dt, max_time=scn.max_time)

    t_py, log_py = time_backend(cfg, "python", args.repeats)
    t_c, log_c = time_backend(cfg, "compiled", args.repeats)
    mask = np.isfinite(log_py.data)
    worst = np.max(np.abs(log_py.data[mask] - log_c.data[mask]))
    print(f"single run ({len(log_py)} steps, dt={cfg.dt} s)")
    print(f"  python   : {t_py * 1e3:8.2f} ms")
    print(f"  compiled : {t_c * 1e3:8.2f} ms")
    print(f"  speedup  : {t_py / t_c:8.1f}x   (max |diff| {worst:.2e})")

    if args.mc > 0:
        for backend in ("python", "compiled"):
            t0 = time.perf_counter()
            stats, _ = run_batch(args.mc, cfg, DispersionSpec(),
                                 master_seed=0, backend=backend)
            dt = time.perf_counter() - t0
            print(f"{args.mc}-run batch, {backend:8s}: {dt:7.2f} s "
                  f"({dt / args.mc * 1e3:.1f} ms/run, "
                  f"{stats.n_failed} failed)")


if __name__ == "__main__":
    main()
