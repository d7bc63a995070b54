"""Monte Carlo dispersion study: per-run uniform sampling of mass,
density and aerodynamic-coefficient deviations, batch execution of
output-feedback runs, and min/max/mean/std statistics of the downrange
and altitude errors.

Per-run RNG substreams are keyed by (master seed, run index), so results
are independent of execution order and parallelism degree.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .models import DispersionSet
from .sim import RunConfig, RunSummary, run_closed_loop


@dataclass(frozen=True)
class DispersionSpec:
    """Uniform [lo, hi] fractional intervals per dispersed parameter."""

    mass: tuple = (-0.05, 0.05)
    density: tuple = (-0.20, 0.20)
    CL: tuple = (-0.30, 0.30)
    CD: tuple = (-0.30, 0.30)

    def __post_init__(self):
        for name in ("mass", "density", "CL", "CD"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"DispersionSpec.{name}: lo > hi")

    def scaled(self, factor: float) -> "DispersionSpec":
        return DispersionSpec(
            *(tuple(factor * b for b in getattr(self, n))
              for n in ("mass", "density", "CL", "CD")))


def sample_dispersions(spec: DispersionSpec, master_seed: int,
                       run_index: int) -> DispersionSet:
    """Draw one dispersion set from the per-run substream; draw order is
    fixed: mass, density, CL, CD."""
    rng = np.random.default_rng([master_seed, run_index])
    draws = []
    for name in ("mass", "density", "CL", "CD"):
        lo, hi = getattr(spec, name)
        draws.append(float(rng.uniform(lo, hi)) if hi > lo else float(lo))
    return DispersionSet(dm_frac=draws[0], drho_frac=draws[1],
                         dCL_frac=draws[2], dCD_frac=draws[3])


@dataclass
class MCStats:
    n_runs: int
    n_failed: int
    downrange_error_km: dict
    altitude_error_km: dict

    def to_json(self, path=None) -> str:
        doc = json.dumps(self.__dict__, indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(doc + "\n")
        return doc


def _metric_stats(values: np.ndarray) -> dict:
    # sample standard deviation (n-1); Table-3-shaped row set
    return {
        "minimum": float(np.min(values)),
        "maximum": float(np.max(values)),
        "average": float(np.mean(values)),
        "standard_deviation": (float(np.std(values, ddof=1))
                               if len(values) > 1 else 0.0),
    }


def _one_run(args):
    base, spec, master_seed, idx, backend = args
    disp = sample_dispersions(spec, master_seed, idx)
    cfg = replace(base, dispersions=disp, seed=master_seed + idx)
    try:
        _, summary = run_closed_loop(cfg, backend=backend)
    except RuntimeError as exc:
        return idx, disp, None, str(exc)
    return idx, disp, summary, None


def run_batch(n_runs: int, base: RunConfig, spec: DispersionSpec,
              master_seed: int, n_jobs: int = 1, backend: str = "auto"
              ) -> tuple[MCStats, list]:
    """Execute n_runs dispersed output-feedback runs and aggregate.

    Non-terminating or failed runs are excluded from the moments but
    counted and reported. Aggregation is an ordered reduction over run
    index, so parallelism cannot change the statistics.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    jobs = [(base, spec, master_seed, i, backend) for i in range(n_runs)]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            raw = list(pool.map(_one_run, jobs, chunksize=32))
    else:
        raw = [_one_run(j) for j in jobs]
    raw.sort(key=lambda r: r[0])

    records = []
    dr_err, h_err = [], []
    n_failed = 0
    for idx, disp, summary, err in raw:
        ok = (err is None and summary.status == "terminated"
              and math.isfinite(summary.downrange_error)
              and math.isfinite(summary.altitude_error))
        records.append({
            "index": idx,
            "dispersions": disp.__dict__,
            "summary": None if summary is None else summary.__dict__,
            "error": err,
            "included": ok,
        })
        if ok:
            dr_err.append(summary.downrange_error / 1e3)
            h_err.append(summary.altitude_error / 1e3)
        else:
            n_failed += 1
    if not dr_err:
        raise RuntimeError("every Monte Carlo run failed")
    stats = MCStats(
        n_runs=n_runs, n_failed=n_failed,
        downrange_error_km=_metric_stats(np.array(dr_err)),
        altitude_error_km=_metric_stats(np.array(h_err)))
    return stats, records


def scatter_csv(records: list, path) -> None:
    """Downrange vs altitude error scatter for the completed runs."""
    with open(path, "w") as fh:
        fh.write("# dragtrack-mcscatter v1\n")
        fh.write("index,downrange_error_km,altitude_error_km\n")
        for rec in records:
            if rec["included"]:
                s = rec["summary"]
                fh.write(f"{rec['index']},{s['downrange_error'] / 1e3:.17g},"
                         f"{s['altitude_error'] / 1e3:.17g}\n")
