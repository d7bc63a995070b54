"""Truth equations of motion over a non-rotating spherical planet.

Six states: radius, longitude, latitude, speed, flight path angle, heading.
Bank angle sigma tilts the lift vector; drag opposes velocity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .models import (DispersionSet, NOMINAL, PlanetModel, VehicleModel,
                     aero_accels, atmospheric_density, gravity)


@dataclass(frozen=True)
class EntryState:
    r: float        # radial position, m
    lon: float      # longitude, rad (kept unwrapped)
    lat: float      # latitude, rad
    v: float        # speed, m/s
    gamma: float    # flight path angle, rad
    chi: float      # heading angle, rad

    def validate(self) -> None:
        if self.r <= 0.0:
            raise ValueError("r must be positive")
        if self.v <= 0.0:
            raise ValueError("v must be positive")
        if not -math.pi / 2 < self.gamma < math.pi / 2:
            raise ValueError("flight path angle out of (-90, 90) deg")
        if not abs(self.lat) < math.pi / 2:
            raise ValueError("latitude out of (-90, 90) deg")

    def altitude(self, planet: PlanetModel) -> float:
        return self.r - planet.r_ref


@dataclass(frozen=True)
class StateDerivative:
    r_dot: float
    lon_dot: float
    lat_dot: float
    v_dot: float
    gamma_dot: float
    chi_dot: float


def eom_rhs(state: EntryState, sigma: float, planet: PlanetModel,
            vehicle: VehicleModel, disp: DispersionSet = NOMINAL) -> StateDerivative:
    """Evaluate the six state rates at (state, sigma) under the given
    dispersions. Rejects the polar / vertical-flight singularities."""
    r, v, gamma, chi, lat = state.r, state.v, state.gamma, state.chi, state.lat
    cos_lat = math.cos(lat)
    cos_gamma = math.cos(gamma)
    if cos_lat == 0.0:
        raise ValueError("longitude rate singular at the pole (cos lat = 0)")
    if cos_gamma == 0.0:
        raise ValueError("heading rate singular at vertical flight (cos gamma = 0)")

    h = r - planet.r_ref
    rho = atmospheric_density(h, planet, disp.drho_frac)
    g = gravity(r, planet)
    L, D = aero_accels(rho, v, vehicle, disp.dCL_frac, disp.dCD_frac, disp.dm_frac)

    sin_gamma = math.sin(gamma)
    return StateDerivative(
        r_dot=v * sin_gamma,
        lon_dot=v * cos_gamma * math.sin(chi) / (r * cos_lat),
        lat_dot=v * cos_gamma * math.cos(chi) / r,
        v_dot=-D - g * sin_gamma,
        gamma_dot=L * math.cos(sigma) / v - (g / v - v / r) * cos_gamma,
        chi_dot=(L * math.sin(sigma) / (v * cos_gamma)
                 + v * cos_gamma * math.sin(chi) * math.tan(lat) / r),
    )


def downrange_rate(state: EntryState) -> float:
    """Great-circle arc-length rate over the sphere, integrated into
    downrange by the simulator."""
    return state.v * math.cos(state.gamma)


def specific_energy(state: EntryState, planet: PlanetModel) -> float:
    """Specific orbital energy v^2/2 - mu/r; non-increasing along every
    truth trajectory (drag only dissipates)."""
    return 0.5 * state.v * state.v - planet.mu / state.r
