"""Closed-loop orchestration: fixed-step integration of the truth plant
plus observer, guidance invocation, terminal-event detection and logging.

The per-step loop runs in a compiled Cython kernel when the extension is
built, with a pure-Python kernel as fallback; select via the backend
argument or the DRAGTRACK_BACKEND environment variable.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernel_py
from ._kernel_py import (COLS, MODE_OUTPUT_FEEDBACK, MODE_STATE_FEEDBACK,
                         NCOL, STATUS_DOMAIN, STATUS_MAX_TIME,
                         STATUS_TERMINATED)
from .dynamics import EntryState, downrange_rate, eom_rhs, specific_energy
from .guidance import GuidanceConfig
from .models import DispersionSet, NOMINAL, PlanetModel, VehicleModel, aero_accels, atmospheric_density

try:
    from . import _kernel_c
    HAVE_COMPILED = True
except ImportError:
    _kernel_c = None
    HAVE_COMPILED = False

_COL_INDEX = {name: i for i, name in enumerate(COLS)}

MODES = ("open-loop", "state-feedback", "output-feedback")


def default_backend() -> str:
    env = os.environ.get("DRAGTRACK_BACKEND", "auto")
    if env not in ("auto", "python", "compiled"):
        raise ValueError(f"unknown backend {env!r}")
    return env


@dataclass
class RunConfig:
    mode: str
    planet: PlanetModel
    vehicle: VehicleModel
    guidance: GuidanceConfig
    profile: object                      # reference.ReferenceProfile
    initial_state: EntryState
    V_f: float
    dt: float = 0.05
    max_time: float = 2000.0
    dispersions: DispersionSet = NOMINAL
    noise_std: float = 0.0               # drag-measurement noise, m/s^2
    seed: int = 0
    bank_schedule: Optional[Callable[[float, EntryState], float]] = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.dt <= 0.0 or self.max_time <= 0.0 or self.V_f <= 0.0:
            raise ValueError("dt, max_time and V_f must be positive")
        if self.mode == "open-loop" and self.bank_schedule is None:
            raise ValueError("open-loop mode needs a bank_schedule")


class TrajectoryLog:
    """Column-addressable per-step record of a single run."""

    SCHEMA = "dragtrack-log v1"

    def __init__(self, data: np.ndarray):
        if data.ndim != 2 or data.shape[1] != NCOL:
            raise ValueError("log array has wrong shape")
        self.data = data

    def __len__(self) -> int:
        return self.data.shape[0]

    def __getattr__(self, name):
        try:
            return self.data[:, _COL_INDEX[name]]
        except KeyError:
            raise AttributeError(name) from None

    def column(self, name: str) -> np.ndarray:
        return self.data[:, _COL_INDEX[name]]

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(f"# {self.SCHEMA}\n")
            fh.write(",".join(COLS) + "\n")
            np.savetxt(fh, self.data, delimiter=",", fmt="%.17g")

    @classmethod
    def from_csv(cls, path) -> "TrajectoryLog":
        with open(path) as fh:
            header = fh.readline().strip().lstrip("# ")
            if header != cls.SCHEMA:
                raise ValueError(f"unknown log schema {header!r}")
            fh.readline()  # column names
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
        return cls(data)


@dataclass
class RunSummary:
    status: str                          # terminated | max-time | domain-violation
    t_final: float
    downrange_error: float               # s_final - s_target, m
    altitude_error: float                # h_final - h_f, m
    terminal_state: dict
    saturation_fraction: float
    max_tracking_error_post_transient: float

    def to_json(self, path=None) -> str:
        doc = json.dumps(self.__dict__, indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(doc + "\n")
        return doc


def rk4_step(rhs, t: float, y: np.ndarray, dt: float) -> np.ndarray:
    """Classical fourth-order fixed-step update of dy/dt = rhs(t, y)."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    k1 = np.asarray(rhs(t, y))
    k2 = np.asarray(rhs(t + 0.5 * dt, y + 0.5 * dt * k1))
    k3 = np.asarray(rhs(t + 0.5 * dt, y + 0.5 * dt * k2))
    k4 = np.asarray(rhs(t + dt, y + dt * k3))
    out = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite state after RK4 step")
    return out


def _status_name(status: int) -> str:
    return {STATUS_TERMINATED: "terminated",
            STATUS_MAX_TIME: "max-time",
            STATUS_DOMAIN: "domain-violation"}[status]


def _summarize(log: TrajectoryLog, status: int, profile) -> RunSummary:
    t = log.t
    t_final = float(t[-1])
    s_final = float(log.s[-1])
    h_final = float(log.h[-1])
    s_target = getattr(profile, "s_target", math.nan)
    h_f = getattr(profile, "terminal_h", math.nan)
    # transient excluded as the first fifth of the flight
    post = t >= 0.2 * t_final
    x1 = log.x1[post]
    sat = log.saturated
    return RunSummary(
        status=_status_name(status),
        t_final=t_final,
        downrange_error=s_final - s_target,
        altitude_error=h_final - h_f,
        terminal_state={
            "r_m": float(log.r[-1]), "lon_rad": float(log.lon[-1]),
            "lat_rad": float(log.lat[-1]), "v_ms": float(log.v[-1]),
            "gamma_rad": float(log.gamma[-1]), "chi_rad": float(log.chi[-1]),
            "h_m": h_final, "s_m": s_final,
        },
        saturation_fraction=float(np.mean(sat[:-1])) if len(sat) > 1 else 0.0,
        max_tracking_error_post_transient=(
            float(np.max(np.abs(x1))) if len(x1) else math.nan),
    )


def run_closed_loop(cfg: RunConfig, backend: str = "auto"
                    ) -> tuple[TrajectoryLog, RunSummary]:
    """Run one guided (or open-loop) entry to the terminal velocity."""
    if backend == "auto":
        backend = default_backend()
    if cfg.mode == "open-loop":
        return _run_open_loop(cfg)

    max_steps = int(math.ceil(cfg.max_time / cfg.dt))
    if cfg.noise_std > 0.0:
        rng = np.random.default_rng(cfg.seed)
        noise = rng.normal(0.0, cfg.noise_std, max_steps)
    else:
        noise = np.zeros(max_steps)

    st = cfg.initial_state
    st.validate()
    y0 = np.array([st.r, st.lon, st.lat, st.v, st.gamma, st.chi, 0.0])
    p, veh, d, g = cfg.planet, cfg.vehicle, cfg.dispersions, cfg.guidance
    prof = cfg.profile
    mode = (MODE_STATE_FEEDBACK if cfg.mode == "state-feedback"
            else MODE_OUTPUT_FEEDBACK)

    if backend == "compiled" and not HAVE_COMPILED:
        raise RuntimeError("compiled kernel requested but not built")
    kern = _kernel_c if (backend != "python" and HAVE_COMPILED) else _kernel_py

    data, status, _ = kern.run_guided(
        mode, y0, cfg.dt, max_steps,
        p.mu, p.r_ref, p.rho0, p.h_s,
        veh.m, veh.S, veh.CL0, veh.CD0,
        d.dm_frac, d.drho_frac, d.dCL_frac, d.dCD_frac,
        g.a, g.b, g.eps0, g.l1, g.l2, g.eps, g.g0_floor,
        cfg.V_f,
        np.ascontiguousarray(prof.knots), np.ascontiguousarray(prof.Dstar),
        np.ascontiguousarray(prof.Dstar_dot),
        np.ascontiguousarray(prof.Dstar_ddot),
        np.ascontiguousarray(noise))
    log = TrajectoryLog(np.asarray(data))
    if status == STATUS_DOMAIN:
        raise RuntimeError(
            f"dynamics left the modeled domain at t = {log.t[-1]:.2f} s")
    return log, _summarize(log, status, prof)


def _run_open_loop(cfg: RunConfig) -> tuple[TrajectoryLog, RunSummary]:
    """Open-loop propagation under a bank schedule; used for reference
    generation and round-trip checks."""
    max_steps = int(math.ceil(cfg.max_time / cfg.dt))
    data = np.full((max_steps + 1, NCOL), np.nan)
    p, veh, d = cfg.planet, cfg.vehicle, cfg.dispersions
    prof = cfg.profile
    st = cfg.initial_state
    st.validate()
    t, s = 0.0, 0.0
    status = STATUS_MAX_TIME
    n = 0
    sigma = 0.0

    def record(i, state, t_, s_, sigma_):
        h = state.altitude(p)
        rho = atmospheric_density(h, p, d.drho_frac)
        _, D = aero_accels(rho, state.v, veh, d.dCL_frac, d.dCD_frac, d.dm_frac)
        row = data[i]
        row[_COL_INDEX["t"]] = t_
        row[_COL_INDEX["r"]] = state.r
        row[_COL_INDEX["lon"]] = state.lon
        row[_COL_INDEX["lat"]] = state.lat
        row[_COL_INDEX["v"]] = state.v
        row[_COL_INDEX["gamma"]] = state.gamma
        row[_COL_INDEX["chi"]] = state.chi
        row[_COL_INDEX["h"]] = h
        row[_COL_INDEX["s"]] = s_
        row[_COL_INDEX["D"]] = D
        row[_COL_INDEX["sigma"]] = sigma_
        row[_COL_INDEX["u"]] = math.cos(sigma_)
        row[_COL_INDEX["saturated"]] = 0.0
        row[_COL_INDEX["held"]] = 0.0
        row[_COL_INDEX["energy"]] = specific_energy(state, p)
        if prof is not None:
            Ds, _, _ = prof.sample(t_)
            row[_COL_INDEX["Dstar"]] = Ds
            row[_COL_INDEX["x1"]] = D - Ds

    def step(state, s_, sigma_, h_):
        def rhs7(_t, y):
            stt = EntryState(y[0], y[1], y[2], y[3], y[4], y[5])
            der = eom_rhs(stt, sigma_, p, veh, d)
            return np.array([der.r_dot, der.lon_dot, der.lat_dot, der.v_dot,
                             der.gamma_dot, der.chi_dot, downrange_rate(stt)])
        y = np.array([state.r, state.lon, state.lat, state.v, state.gamma,
                      state.chi, s_])
        yn = rk4_step(rhs7, t, y, h_)
        return EntryState(*yn[:6]), yn[6]

    for _ in range(max_steps):
        sigma = cfg.bank_schedule(t, st)
        if not 0.0 <= sigma <= math.pi:
            raise ValueError(f"bank schedule returned {sigma} outside [0, pi]")
        record(n, st, t, s, sigma)
        n += 1
        st_new, s_new = step(st, s, sigma, cfg.dt)
        if st_new.v <= cfg.V_f:
            tau = cfg.dt * (st.v - cfg.V_f) / (st.v - st_new.v)
            for _ in range(5):
                st_try, s_try = step(st, s, sigma, tau) if tau > 0 else (st, s)
                err = st_try.v - cfg.V_f
                der = eom_rhs(st_try, sigma, p, veh, d)
                if abs(err) <= 1e-9 * cfg.V_f or der.v_dot == 0.0:
                    break
                tau = min(max(tau - err / der.v_dot, 0.0), cfg.dt)
            st, s = st_try, s_try
            t += tau
            status = STATUS_TERMINATED
            break
        st, s = st_new, s_new
        t += cfg.dt

    record(n, st, t, s, sigma)
    n += 1
    log = TrajectoryLog(data[:n])
    return log, _summarize(log, status, prof)
