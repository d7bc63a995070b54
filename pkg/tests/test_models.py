import math

import numpy as np
import pytest

from dragtrack.models import (DispersionSet, NOMINAL, PlanetModel,
                              VehicleModel, aero_accels,
                              atmospheric_density, gravity)

PLANET = PlanetModel(mu=4.2828e13, r_ref=3397e3, rho0=0.0158, h_s=9354.0)
VEHICLE = VehicleModel(m=992.0, S=16.0, CL0=0.09704347826086957,
                       CD0=0.5391304347826087)


def test_density_at_reference_altitude():
    assert atmospheric_density(0.0, PLANET) == PLANET.rho0


def test_density_one_scale_height():
    assert atmospheric_density(PLANET.h_s, PLANET) == pytest.approx(
        PLANET.rho0 / math.e, rel=1e-15)


def test_density_dispersed_two_scale_heights():
    got = atmospheric_density(2.0 * PLANET.h_s, PLANET, drho_frac=0.20)
    assert got == pytest.approx(1.2 * PLANET.rho0 * math.exp(-2.0), rel=1e-15)


def test_density_strictly_decreasing_and_positive():
    hs = np.linspace(-5e3, 120e3, 500)
    rho = np.array([atmospheric_density(h, PLANET, -0.99) for h in hs])
    assert np.all(rho > 0.0)
    assert np.all(np.diff(rho) < 0.0)


def test_gravity_inverse_square():
    g1 = gravity(PLANET.r_ref, PLANET)
    g2 = gravity(2.0 * PLANET.r_ref, PLANET)
    assert g2 == pytest.approx(g1 / 4.0, rel=1e-15)
    assert g1 == pytest.approx(PLANET.mu / PLANET.r_ref ** 2, rel=1e-15)


def test_gravity_rejects_nonpositive_radius():
    with pytest.raises(ValueError):
        gravity(0.0, PLANET)


def test_aero_vacuum():
    assert aero_accels(0.0, 5000.0, VEHICLE) == (0.0, 0.0)


def test_aero_ratio_is_nominal_ld():
    for rho, v in [(1e-4, 6000.0), (1e-2, 900.0), (0.5, 1.0)]:
        L, D = aero_accels(rho, v, VEHICLE)
        assert L / D == pytest.approx(VEHICLE.CL0 / VEHICLE.CD0, rel=1e-14)


def test_aero_homogeneity():
    L1, D1 = aero_accels(1e-3, 3000.0, VEHICLE)
    L2, D2 = aero_accels(1e-3, 6000.0, VEHICLE)
    assert L2 == pytest.approx(4.0 * L1, rel=1e-14)
    assert D2 == pytest.approx(4.0 * D1, rel=1e-14)
    L3, D3 = aero_accels(2e-3, 3000.0, VEHICLE)
    assert L3 == pytest.approx(2.0 * L1, rel=1e-14)
    assert D3 == pytest.approx(2.0 * D1, rel=1e-14)


def test_aero_dispersions_scale_linearly():
    L0, D0 = aero_accels(1e-3, 3000.0, VEHICLE)
    L, D = aero_accels(1e-3, 3000.0, VEHICLE, dCL_frac=0.3, dCD_frac=-0.3)
    assert L == pytest.approx(1.3 * L0, rel=1e-14)
    assert D == pytest.approx(0.7 * D0, rel=1e-14)


def test_aero_rejects_nonphysical_mass():
    with pytest.raises(ValueError):
        aero_accels(1e-3, 3000.0, VEHICLE, dm_frac=-1.0)


def test_aero_rejects_negative_inputs():
    with pytest.raises(ValueError):
        aero_accels(-1.0, 3000.0, VEHICLE)
    with pytest.raises(ValueError):
        aero_accels(1e-3, -1.0, VEHICLE)


def test_ballistic_coefficient_pins_cd0():
    # beta = m / (CD0 S) = 115 kg/m^2 with m = 992 kg, S = 16 m^2
    assert VEHICLE.ballistic_coefficient == pytest.approx(115.0, rel=1e-12)
    assert VEHICLE.CD0 == pytest.approx(992.0 / (115.0 * 16.0), rel=1e-15)
    assert VEHICLE.CL0 == pytest.approx(0.18 * VEHICLE.CD0, rel=1e-15)


def test_model_validation():
    with pytest.raises(ValueError):
        PlanetModel(mu=-1.0, r_ref=1.0, rho0=1.0, h_s=1.0)
    with pytest.raises(ValueError):
        VehicleModel(m=1.0, S=1.0, CL0=-0.1, CD0=1.0)
    with pytest.raises(ValueError):
        VehicleModel(m=1.0, S=1.0, CL0=0.1, CD0=0.0)


def test_nominal_dispersion_set():
    assert NOMINAL.is_nominal
    assert not DispersionSet(dCD_frac=0.1).is_nominal
