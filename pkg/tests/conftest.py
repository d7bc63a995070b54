import pytest

from dragtrack.config import load_scenario
from dragtrack.reference import generate_reference, scenario_schedule


@pytest.fixture(scope="session")
def scn():
    return load_scenario()


@pytest.fixture(scope="session")
def nominal_profile(scn):
    profile, _ = generate_reference(
        scn.planet, scn.vehicle, scn.initial_state, scn.terminal_v,
        scn.terminal_h, scn.target_downrange, dt=scn.dt,
        max_time=scn.max_time, bank_schedule=scenario_schedule(scn))
    return profile
