"""Drag-tracking entry guidance: simulation, certification, Monte Carlo."""

from .models import DispersionSet, PlanetModel, VehicleModel
from .dynamics import EntryState
from .guidance import GuidanceConfig, ObserverState
from .reference import ReferenceProfile
from .sim import RunConfig, RunSummary, TrajectoryLog, run_closed_loop, HAVE_COMPILED
from .montecarlo import DispersionSpec, MCStats, run_batch

__all__ = [
    "DispersionSet", "PlanetModel", "VehicleModel", "EntryState",
    "GuidanceConfig", "ObserverState", "ReferenceProfile", "RunConfig",
    "RunSummary", "TrajectoryLog", "run_closed_loop", "HAVE_COMPILED",
    "DispersionSpec", "MCStats", "run_batch",
]

__version__ = "0.1.0"
