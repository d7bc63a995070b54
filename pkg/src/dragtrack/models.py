"""Planet, atmosphere, vehicle and dispersion models.

All quantities are SI. Dispersions are fractional multipliers held fixed
over a run; the all-zero set is the nominal world.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PlanetModel:
    """Non-rotating planet with an exponential atmosphere."""

    mu: float        # gravitational parameter, m^3/s^2
    r_ref: float     # reference (surface) radius, m
    rho0: float      # density at the reference radius, kg/m^3
    h_s: float       # atmospheric scale height, m

    def __post_init__(self):
        for name in ("mu", "r_ref", "rho0", "h_s"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"PlanetModel.{name} must be strictly positive")


@dataclass(frozen=True)
class VehicleModel:
    """Point-mass lifting entry vehicle with constant nominal coefficients."""

    m: float         # mass, kg
    S: float         # reference area, m^2
    CL0: float       # nominal lift coefficient
    CD0: float       # nominal drag coefficient

    def __post_init__(self):
        if self.m <= 0.0:
            raise ValueError("VehicleModel.m must be positive")
        if self.S <= 0.0:
            raise ValueError("VehicleModel.S must be positive")
        if self.CD0 <= 0.0:
            raise ValueError("VehicleModel.CD0 must be positive")
        if self.CL0 < 0.0:
            raise ValueError("VehicleModel.CL0 must be nonnegative")

    @property
    def ballistic_coefficient(self) -> float:
        return self.m / (self.CD0 * self.S)


@dataclass(frozen=True)
class DispersionSet:
    """Signed fractional deviations applied to the truth plant only."""

    dm_frac: float = 0.0
    drho_frac: float = 0.0
    dCL_frac: float = 0.0
    dCD_frac: float = 0.0

    @property
    def is_nominal(self) -> bool:
        return (self.dm_frac == 0.0 and self.drho_frac == 0.0
                and self.dCL_frac == 0.0 and self.dCD_frac == 0.0)


NOMINAL = DispersionSet()


def atmospheric_density(h: float, planet: PlanetModel, drho_frac: float = 0.0) -> float:
    """Exponential density at altitude h; the density deviation is a
    constant multiplicative factor. Negative h extrapolates."""
    return (1.0 + drho_frac) * planet.rho0 * math.exp(-h / planet.h_s)


def gravity(r: float, planet: PlanetModel) -> float:
    """Inverse-square gravitational acceleration at radius r."""
    if r <= 0.0:
        raise ValueError("radial position must be positive")
    return planet.mu / (r * r)


def aero_accels(rho: float, v: float, vehicle: VehicleModel,
                dCL_frac: float = 0.0, dCD_frac: float = 0.0,
                dm_frac: float = 0.0) -> tuple[float, float]:
    """Lift and drag accelerations (m/s^2) at the given density and speed."""
    if rho < 0.0 or v < 0.0:
        raise ValueError("rho and v must be nonnegative")
    m = vehicle.m * (1.0 + dm_frac)
    if m <= 0.0:
        raise ValueError("dispersed mass must be positive")
    q = 0.5 * rho * v * v * vehicle.S / m
    L = q * vehicle.CL0 * (1.0 + dCL_frac)
    D = q * vehicle.CD0 * (1.0 + dCD_frac)
    return L, D
