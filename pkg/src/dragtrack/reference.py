"""Reference drag profile: generation from an open-loop nominal run,
cubic Hermite sampling, and CSV persistence.

The profile is time-indexed: the guidance laws consume (D*, Ddot*,
Dddot*) as time signals. Outside the knot range the profile clamps to
the nearest endpoint with derivatives zeroed, so late guidance decays to
pure regulation instead of extrapolating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ._kernel_py import _sample_profile
from .dynamics import EntryState
from .guidance import GuidanceConfig
from .models import NOMINAL, PlanetModel, VehicleModel
from .sim import RunConfig, TrajectoryLog, run_closed_loop

SCHEMA = "dragtrack-refprofile v1"


@dataclass(frozen=True)
class ReferenceProfile:
    knots: np.ndarray           # strictly increasing times, s
    Dstar: np.ndarray           # reference drag, m/s^2
    Dstar_dot: np.ndarray       # m/s^3
    Dstar_ddot: np.ndarray      # m/s^4
    s_target: float             # downrange target, m
    terminal_h: float           # achieved terminal altitude, m
    terminal_v: float           # terminal velocity, m/s

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        if len(k) < 2 or np.any(np.diff(k) <= 0.0):
            raise ValueError("knots must be strictly increasing")
        for name in ("Dstar", "Dstar_dot", "Dstar_ddot"):
            if len(getattr(self, name)) != len(k):
                raise ValueError(f"{name} length does not match knots")

    def sample(self, t: float) -> tuple[float, float, float]:
        """(D*, Ddot*, Dddot*) at time t; clamped outside the knots."""
        return _sample_profile(self.knots, self.Dstar, self.Dstar_dot,
                               self.Dstar_ddot, t)

    @property
    def duration(self) -> float:
        return float(self.knots[-1])

    @classmethod
    def constant(cls, value: float, t_end: float, s_target: float = math.nan,
                 terminal_h: float = math.nan,
                 terminal_v: float = math.nan) -> "ReferenceProfile":
        """Flat synthetic profile; all derivatives identically zero."""
        knots = np.array([0.0, t_end])
        z = np.zeros(2)
        return cls(knots, np.full(2, float(value)), z.copy(), z.copy(),
                   s_target, terminal_h, terminal_v)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(f"# {SCHEMA}\n")
            fh.write(f"# s_target_m = {self.s_target!r}\n")
            fh.write(f"# terminal_h_m = {self.terminal_h!r}\n")
            fh.write(f"# terminal_v_ms = {self.terminal_v!r}\n")
            fh.write("t,Dstar,Dstar_dot,Dstar_ddot\n")
            np.savetxt(fh, np.column_stack(
                [self.knots, self.Dstar, self.Dstar_dot, self.Dstar_ddot]),
                delimiter=",", fmt="%.17g")

    @classmethod
    def from_csv(cls, path) -> "ReferenceProfile":
        meta = {}
        with open(path) as fh:
            header = fh.readline().strip().lstrip("# ")
            if header != SCHEMA:
                raise ValueError(f"unknown profile schema {header!r}")
            pos = fh.tell()
            line = fh.readline()
            while line.startswith("#"):
                key, _, val = line.lstrip("# ").partition("=")
                meta[key.strip()] = float(val)
                pos = fh.tell()
                line = fh.readline()
            # the non-comment line just consumed is the column header
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        return cls(data[:, 0], data[:, 1], data[:, 2], data[:, 3],
                   meta.get("s_target_m", math.nan),
                   meta.get("terminal_h_m", math.nan),
                   meta.get("terminal_v_ms", math.nan))


def constant_bank(sigma: float) -> Callable[[float, EntryState], float]:
    return lambda t, state: sigma


def two_segment_bank(sigma1: float, sigma2: float, v_switch: float
                     ) -> Callable[[float, EntryState], float]:
    """First-segment bank until the speed drops below v_switch."""
    return lambda t, state: sigma1 if state.v > v_switch else sigma2


def scenario_schedule(scn) -> Callable[[float, EntryState], float] | None:
    """Pinned bank schedule from a scenario config, or None to tune.

    The shipped scenario pins the schedule so profile generation is
    deterministic and fast; dropping the sigma keys re-enables the
    search.
    """
    if scn.ref_sigma1_deg is None or scn.ref_sigma2_deg is None:
        return None
    return two_segment_bank(math.radians(scn.ref_sigma1_deg),
                            math.radians(scn.ref_sigma2_deg),
                            scn.ref_v_switch_frac * scn.initial_state.v)


def _open_loop_run(planet, vehicle, initial_state, schedule, dt, V_f,
                   max_time):
    cfg = RunConfig(
        mode="open-loop", planet=planet, vehicle=vehicle,
        guidance=GuidanceConfig(a=1.0, b=1.0, eps0=1.0),
        profile=None, initial_state=initial_state, V_f=V_f, dt=dt,
        max_time=max_time, dispersions=NOMINAL, bank_schedule=schedule)
    return run_closed_loop(cfg)


def _moving_average(x: np.ndarray, width: int) -> np.ndarray:
    if width <= 1:
        return x.copy()
    kernel = np.ones(width) / width
    pad = width // 2
    padded = np.concatenate([np.full(pad, x[0]), x, np.full(pad, x[-1])])
    return np.convolve(padded, kernel, mode="valid")[:len(x)]


def profile_from_log(log: TrajectoryLog, s_target: float, terminal_h: float,
                     terminal_v: float, decimate: int = 4,
                     smooth_width: int = 5) -> ReferenceProfile:
    """Build a profile from a logged open-loop run.

    Knot slopes come from centered differences of the fine drag history;
    the second-derivative channel differentiates those slopes and is
    smoothed with a fixed-width moving average since it feeds the law
    directly.
    """
    t = log.t
    D = log.D
    n = len(t)
    if n < 5:
        raise ValueError("log too short to build a profile")
    dt = t[1] - t[0]
    # drop the interpolated final event step from the uniform grid
    if not math.isclose(t[n - 1] - t[n - 2], dt, rel_tol=1e-6):
        n -= 1
    t, D = t[:n], D[:n]
    Ddot = np.gradient(D, dt)
    Dddot = _moving_average(np.gradient(Ddot, dt), smooth_width)
    idx = np.arange(0, n, decimate)
    if idx[-1] != n - 1:
        idx = np.append(idx, n - 1)
    return ReferenceProfile(t[idx].copy(), D[idx].copy(), Ddot[idx].copy(),
                            Dddot[idx].copy(), s_target, terminal_h,
                            terminal_v)


class ReferenceGenerationError(RuntimeError):
    pass


def generate_reference(planet: PlanetModel, vehicle: VehicleModel,
                       initial_state: EntryState, V_f: float,
                       target_h: float, target_s: float,
                       dt: float = 0.05, max_time: float = 2000.0,
                       bank_schedule=None, v_switch_frac: float = 0.55,
                       ) -> tuple[ReferenceProfile, Callable]:
    """Generate the reference drag profile from a tuned open-loop run.

    If no bank schedule is supplied, tunes a two-segment constant-bank
    family: the first-segment bank mainly sets downrange, the second
    sets the terminal altitude at the terminal velocity. Returns the
    profile and the schedule that produced it.
    """
    if bank_schedule is None:
        bank_schedule = tune_bank_schedule(
            planet, vehicle, initial_state, V_f, target_h, target_s,
            dt=dt, max_time=max_time, v_switch_frac=v_switch_frac)
    log, summary = _open_loop_run(planet, vehicle, initial_state,
                                  bank_schedule, dt, V_f, max_time)
    if summary.status != "terminated":
        raise ReferenceGenerationError(
            f"open-loop run did not reach V_f = {V_f} m/s "
            f"(status: {summary.status})")
    s_final = summary.terminal_state["s_m"]
    h_final = summary.terminal_state["h_m"]
    return profile_from_log(log, s_final, h_final, V_f), bank_schedule


def _terminal_metrics(planet, vehicle, initial_state, schedule, dt, V_f,
                      max_time):
    _, summary = _open_loop_run(planet, vehicle, initial_state, schedule,
                                dt, V_f, max_time)
    if summary.status != "terminated":
        return None
    return summary.terminal_state["h_m"], summary.terminal_state["s_m"]


def tune_bank_schedule(planet, vehicle, initial_state, V_f, target_h,
                       target_s, dt=0.05, max_time=2000.0,
                       v_switch_frac=0.55, h_tol=500.0, s_tol=20e3,
                       max_outer=18):
    """Search a two-segment constant-bank family for a schedule hitting
    the terminal-altitude and downrange targets.

    Nested bisections: the inner loop picks the second-segment bank for
    the terminal altitude (lift-up raises it); the outer loop picks the
    first-segment bank for downrange (lift-up lengthens it).
    """
    v_switch = v_switch_frac * initial_state.v
    coarse_dt = max(dt, 0.1)

    def inner(sigma1):
        """Bank after the switch that lands terminal altitude on target;
        returns (sigma2, h_err, s_err) or None if unreachable."""
        lo, hi = 0.0, math.pi          # altitude decreases as sigma2 grows
        met_lo = _terminal_metrics(planet, vehicle, initial_state,
                                   two_segment_bank(sigma1, lo, v_switch),
                                   coarse_dt, V_f, max_time)
        met_hi = _terminal_metrics(planet, vehicle, initial_state,
                                   two_segment_bank(sigma1, hi, v_switch),
                                   coarse_dt, V_f, max_time)
        if met_lo is None or met_hi is None:
            return None
        if not (met_hi[0] <= target_h <= met_lo[0]):
            # target altitude outside the reachable band
            best = min((met_lo, lo), (met_hi, hi),
                       key=lambda ms: abs(ms[0][0] - target_h))
            return best[1], best[0][0] - target_h, best[0][1] - target_s
        for _ in range(24):
            mid = 0.5 * (lo + hi)
            met = _terminal_metrics(planet, vehicle, initial_state,
                                    two_segment_bank(sigma1, mid, v_switch),
                                    coarse_dt, V_f, max_time)
            if met is None:
                return None
            if abs(met[0] - target_h) <= 0.1 * h_tol:
                return mid, met[0] - target_h, met[1] - target_s
            if met[0] > target_h:
                lo = mid
            else:
                hi = mid
        met = _terminal_metrics(planet, vehicle, initial_state,
                                two_segment_bank(sigma1, mid, v_switch),
                                coarse_dt, V_f, max_time)
        return mid, met[0] - target_h, met[1] - target_s

    # outer bisection on the first-segment bank for downrange
    lo1, hi1 = 0.0, math.radians(120.0)
    best = None
    results = {}
    for sigma1 in (lo1, hi1):
        results[sigma1] = inner(sigma1)
    for _ in range(max_outer):
        mid1 = 0.5 * (lo1 + hi1)
        res = inner(mid1)
        results[mid1] = res
        if res is None:
            hi1 = mid1
            continue
        _, h_err, s_err = res
        if abs(s_err) <= 0.25 * s_tol and abs(h_err) <= h_tol:
            break
        if s_err > 0.0:
            lo1 = mid1                 # flying long: less lift-up
        else:
            hi1 = mid1
    candidates = [(abs(r[2]) + 10.0 * abs(r[1]), s1, r)
                  for s1, r in results.items() if r is not None]
    if not candidates:
        raise ReferenceGenerationError(
            "no bank schedule in the search family reaches the terminal "
            "velocity")
    _, sigma1, (sigma2, h_err, s_err) = min(candidates)
    if abs(h_err) > 4.0 * h_tol or abs(s_err) > 2.0 * s_tol:
        raise ReferenceGenerationError(
            f"bank search failed: altitude error {h_err / 1e3:.2f} km, "
            f"downrange error {s_err / 1e3:.2f} km")
    return two_segment_bank(sigma1, sigma2, v_switch)
