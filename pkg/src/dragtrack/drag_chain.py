"""Onboard drag-dynamics model.

The drag rate follows from the exponential-atmosphere chain rule; the
second derivative splits into a drift term f, a control-effectiveness
term g0 multiplying u = cos(sigma), and an unmodeled residual that only
truth-model diagnostics can see.

The drift term is re-derived by differentiating the drag-rate expression
along the equations of motion with the lift contribution to the flight
path angle rate split out, rather than using a transcribed closed form;
the second-difference oracle in the test suite arbitrates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import EntryState
from .models import PlanetModel, VehicleModel, gravity


@dataclass(frozen=True)
class DragChainTerms:
    D: float
    Ddot: float
    f: float
    g0: float
    C: float = 0.0               # nominal-coefficient rate term; constant coefficients
    delta: float = 0.0           # truth-diagnostic only, identically zero onboard
    Delta: float = 0.0


def drag_rate(D: float, state: EntryState, planet: PlanetModel,
              vehicle: VehicleModel) -> float:
    """Onboard drag rate: D * (-v sin(g)/h_s - 2D/v - 2 g sin(g)/v).

    The coefficient-rate and uncertainty terms are zero onboard (constant
    nominal coefficients, nominal atmosphere).
    """
    if state.v <= 0.0:
        raise ValueError("speed must be positive")
    v, gam = state.v, state.gamma
    g = gravity(state.r, planet)
    sin_gamma = math.sin(gam)
    return D * (-v * sin_gamma / planet.h_s - 2.0 * D / v - 2.0 * g * sin_gamma / v)


def f_and_g0(D: float, state: EntryState, L: float, planet: PlanetModel,
             vehicle: VehicleModel) -> tuple[float, float]:
    """Drift and control-effectiveness terms of the drag acceleration's
    second derivative, evaluated with onboard (nominal) models.

    g0 is negative whenever L > 0, D > 0, |gamma| < pi/2: every factor of
    (v/h_s + 2g/v) * L * D * cos(gamma) / v is positive except the
    leading sign.
    """
    if state.v <= 0.0:
        raise ValueError("speed must be positive")
    r, v, gam = state.r, state.v, state.gamma
    h_s = planet.h_s
    g = gravity(r, planet)
    sin_g = math.sin(gam)
    cos_g = math.cos(gam)

    # first-derivative chain shared with drag_rate
    W = -v * sin_g / h_s - 2.0 * D / v - 2.0 * g * sin_g / v

    # state rates with the lift term of gamma_dot split out into g0*u
    v_dot = -D - g * sin_g
    gamma_dot0 = -(g / v - v / r) * cos_g
    g_dot = -2.0 * g * v * sin_g / r

    # d/dt of W along the motion, lift-free part
    W_dot0 = (
        -(v_dot * sin_g + v * cos_g * gamma_dot0) / h_s
        - 2.0 * (D * W) / v + 2.0 * D * v_dot / (v * v)
        - 2.0 * g_dot * sin_g / v
        - 2.0 * g * cos_g * gamma_dot0 / v
        + 2.0 * g * sin_g * v_dot / (v * v)
    )

    f = D * (W * W + W_dot0)
    g0 = -(v / h_s + 2.0 * g / v) * L * D * cos_g / v
    return f, g0


def chain_terms(D: float, state: EntryState, L: float, planet: PlanetModel,
                vehicle: VehicleModel) -> DragChainTerms:
    f, g0 = f_and_g0(D, state, L, planet, vehicle)
    return DragChainTerms(D=D, Ddot=drag_rate(D, state, planet, vehicle), f=f, g0=g0)


def delta_diagnostic(truth_run, max_dt: float = 0.1) -> tuple[np.ndarray, np.ndarray]:
    """Sample the unmodeled residual along a logged truth run.

    Second-differences the logged drag history and subtracts the onboard
    f + g0*u logged at each step. Returns (t, Delta) on the interior grid
    points of the constant-stride portion of the log.

    Raises if the log stride is too coarse for second differences.
    """
    t = np.asarray(truth_run.t)
    D = np.asarray(truth_run.D)
    f = np.asarray(truth_run.f)
    g0 = np.asarray(truth_run.g0)
    u = np.asarray(truth_run.u)
    if len(t) < 4:
        raise ValueError("log too short for second differences")
    dt = t[1] - t[0]
    if dt > max_dt:
        raise ValueError(
            f"log stride {dt:.3g} s too coarse for second differences "
            f"(limit {max_dt:.3g} s)")
    # drop a trailing interpolated event step if present
    n = len(t)
    if not math.isclose(t[n - 1] - t[n - 2], dt, rel_tol=1e-6):
        n -= 1
    d2 = (D[2:n] - 2.0 * D[1:n - 1] + D[0:n - 2]) / (dt * dt)
    delta = d2 - f[1:n - 1] - g0[1:n - 1] * u[1:n - 1]
    return t[1:n - 1], delta
