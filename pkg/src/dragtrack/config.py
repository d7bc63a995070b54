"""Scenario configuration: flat INI-style key-value file with sections.

Units are annotated in the key names and converted to SI at the
boundary; everything downstream of this module is SI radians/meters/
seconds. The shipped default scenario pins the Mars entry case used
throughout the tests.
"""

from __future__ import annotations

import configparser
import importlib.resources
import math
from dataclasses import dataclass

from .dynamics import EntryState
from .guidance import GuidanceConfig
from .models import PlanetModel, VehicleModel
from .montecarlo import DispersionSpec


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    planet: PlanetModel
    vehicle: VehicleModel
    initial_state: EntryState
    terminal_h: float            # m
    terminal_v: float            # m/s
    target_downrange: float      # m
    guidance: GuidanceConfig
    guidance_mc: GuidanceConfig  # gain set used by the Monte Carlo study
    dt: float
    max_time: float
    dispersions: DispersionSpec
    ref_v_switch_frac: float
    ref_decimate: int
    ref_smooth_width: int
    # pinned two-segment bank schedule, degrees; None means "tune"
    ref_sigma1_deg: float | None = None
    ref_sigma2_deg: float | None = None


def _get(cp, section, key, cast=float):
    try:
        return cast(cp[section][key])
    except KeyError as exc:
        raise ConfigError(f"missing [{section}] {key}") from exc
    except ValueError as exc:
        raise ConfigError(f"bad value for [{section}] {key}") from exc


def _opt(cp, section, key, cast=float):
    if section not in cp or key not in cp[section]:
        return None
    return _get(cp, section, key, cast)


def _interval(cp, section, key):
    raw = _get(cp, section, key, str)
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 2:
        raise ConfigError(f"[{section}] {key} must be 'lo, hi'")
    lo, hi = (float(p) / 100.0 for p in parts)
    return lo, hi


def _guidance(cp, section) -> GuidanceConfig:
    return GuidanceConfig(
        a=_get(cp, section, "a"),
        b=_get(cp, section, "b"),
        eps0=_get(cp, section, "eps0"),
        l1=_get(cp, section, "l1"),
        l2=_get(cp, section, "l2"),
        eps=_get(cp, section, "eps"),
        g0_floor=_get(cp, section, "g0_floor_ms4"),
    )


def load_scenario(path=None) -> ScenarioConfig:
    """Load a scenario file; with no path, the packaged default."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    if path is None:
        text = (importlib.resources.files("dragtrack") / "data"
                / "default_scenario.cfg").read_text()
        cp.read_string(text)
    else:
        read = cp.read(str(path))
        if not read:
            raise ConfigError(f"cannot read scenario file {path}")
    try:
        planet = PlanetModel(
            mu=_get(cp, "planet", "mu_m3s2"),
            r_ref=_get(cp, "planet", "radius_km") * 1e3,
            rho0=_get(cp, "planet", "rho0_kgm3"),
            h_s=_get(cp, "planet", "scale_height_m"))
        vehicle = VehicleModel(
            m=_get(cp, "vehicle", "mass_kg"),
            S=_get(cp, "vehicle", "area_m2"),
            CL0=_get(cp, "vehicle", "cl0"),
            CD0=_get(cp, "vehicle", "cd0"))
        initial = EntryState(
            r=planet.r_ref + _get(cp, "initial", "altitude_km") * 1e3,
            lon=math.radians(_get(cp, "initial", "longitude_deg")),
            lat=math.radians(_get(cp, "initial", "latitude_deg")),
            v=_get(cp, "initial", "velocity_kms") * 1e3,
            gamma=math.radians(_get(cp, "initial", "fpa_deg")),
            chi=math.radians(_get(cp, "initial", "heading_deg")))
        return ScenarioConfig(
            planet=planet, vehicle=vehicle, initial_state=initial,
            terminal_h=_get(cp, "terminal", "altitude_km") * 1e3,
            terminal_v=_get(cp, "terminal", "velocity_ms"),
            target_downrange=_get(cp, "terminal", "downrange_km") * 1e3,
            guidance=_guidance(cp, "guidance"),
            guidance_mc=_guidance(cp, "guidance_mc"),
            dt=_get(cp, "integrator", "dt_s"),
            max_time=_get(cp, "integrator", "max_time_s"),
            dispersions=DispersionSpec(
                mass=_interval(cp, "dispersions", "mass_pct"),
                density=_interval(cp, "dispersions", "density_pct"),
                CL=_interval(cp, "dispersions", "cl_pct"),
                CD=_interval(cp, "dispersions", "cd_pct")),
            ref_v_switch_frac=_get(cp, "reference", "v_switch_frac"),
            ref_decimate=_get(cp, "reference", "decimate", int),
            ref_smooth_width=_get(cp, "reference", "smooth_width", int),
            ref_sigma1_deg=_opt(cp, "reference", "sigma1_deg"),
            ref_sigma2_deg=_opt(cp, "reference", "sigma2_deg"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
