import math

import numpy as np
import pytest

from dragtrack.models import NOMINAL
from dragtrack.reference import (ReferenceProfile, constant_bank,
                                 scenario_schedule, two_segment_bank)
from dragtrack.sim import RunConfig, run_closed_loop


def test_constant_profile_is_flat():
    prof = ReferenceProfile.constant(18.0, 120.0)
    for t in (0.0, 13.7, 120.0, 500.0, -5.0):
        D, Dd, Ddd = prof.sample(t)
        assert D == 18.0 and Dd == 0.0 and Ddd == 0.0


def test_sample_reproduces_knots(nominal_profile):
    p = nominal_profile
    # interior knots return the stored values and slopes
    for i in (1, len(p.knots) // 2, len(p.knots) - 2):
        D, Dd, Ddd = p.sample(float(p.knots[i]))
        assert D == pytest.approx(p.Dstar[i], rel=1e-9)
        assert Dd == pytest.approx(p.Dstar_dot[i], rel=1e-9)
        assert Ddd == pytest.approx(p.Dstar_ddot[i], rel=1e-9)
    # endpoints clamp with zeroed derivatives
    for i in (0, len(p.knots) - 1):
        D, Dd, Ddd = p.sample(float(p.knots[i]))
        assert D == pytest.approx(p.Dstar[i], rel=1e-12)
        assert (Dd, Ddd) == (0.0, 0.0)


def test_clamping_beyond_the_knots(nominal_profile):
    p = nominal_profile
    D, Dd, Ddd = p.sample(p.duration + 100.0)
    assert D == p.Dstar[-1] and Dd == 0.0 and Ddd == 0.0
    D, Dd, Ddd = p.sample(-1.0)
    assert D == p.Dstar[0] and Dd == 0.0 and Ddd == 0.0


def test_interpolated_rate_is_self_consistent(nominal_profile):
    # mid-interval first derivative against centered differences of the
    # sampled drag, away from the ends
    p = nominal_profile
    ts = np.linspace(p.knots[2], p.knots[-3], 400)
    h = 1e-3
    worst = 0.0
    scale = float(np.max(np.abs(p.Dstar_dot)))
    for t in ts:
        _, Dd, _ = p.sample(float(t))
        num = (p.sample(float(t) + h)[0] - p.sample(float(t) - h)[0]) / (2 * h)
        worst = max(worst, abs(Dd - num))
    assert worst / scale <= 1e-3


def test_profile_round_trips_through_csv(tmp_path, nominal_profile):
    path = tmp_path / "profile.csv"
    nominal_profile.to_csv(path)
    back = ReferenceProfile.from_csv(path)
    assert np.array_equal(back.knots, nominal_profile.knots)
    assert np.array_equal(back.Dstar, nominal_profile.Dstar)
    assert back.s_target == nominal_profile.s_target
    assert back.terminal_h == nominal_profile.terminal_h
    assert back.terminal_v == nominal_profile.terminal_v


def test_from_csv_rejects_unknown_schema(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("# something-else v9\nt,a,b,c\n0,1,0,0\n1,1,0,0\n")
    with pytest.raises(ValueError):
        ReferenceProfile.from_csv(path)


def test_profile_validation():
    with pytest.raises(ValueError):
        ReferenceProfile(np.array([0.0, 0.0]), np.ones(2), np.zeros(2),
                         np.zeros(2), 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        ReferenceProfile(np.array([0.0, 1.0, 2.0]), np.ones(2), np.zeros(2),
                         np.zeros(2), 1.0, 1.0, 1.0)


def test_open_loop_round_trip(scn, nominal_profile):
    # re-simulating the generating schedule reproduces the knot drags
    cfg = RunConfig(mode="open-loop", planet=scn.planet, vehicle=scn.vehicle,
                    guidance=scn.guidance, profile=nominal_profile,
                    initial_state=scn.initial_state, V_f=scn.terminal_v,
                    dt=scn.dt, max_time=scn.max_time, dispersions=NOMINAL,
                    bank_schedule=scenario_schedule(scn))
    log, summary = run_closed_loop(cfg)
    assert summary.status == "terminated"
    p = nominal_profile
    resampled = np.interp(p.knots, log.t, log.D)
    assert np.max(np.abs(resampled - p.Dstar)) <= 1e-6 * np.max(p.Dstar)


def test_generated_profile_hits_the_terminal_box(scn, nominal_profile):
    p = nominal_profile
    assert abs(p.terminal_h - scn.terminal_h) <= 2e3
    assert abs(p.s_target - scn.target_downrange) <= 0.05 * scn.target_downrange
    assert p.terminal_v == pytest.approx(scn.terminal_v)


def test_bank_schedule_helpers(scn):
    sched = constant_bank(1.0)
    assert sched(0.0, scn.initial_state) == 1.0
    sw = two_segment_bank(1.0, 0.5, 4000.0)
    hi = scn.initial_state
    lo = type(hi)(r=hi.r, lon=0.0, lat=0.0, v=3000.0, gamma=hi.gamma,
                  chi=hi.chi)
    assert sw(0.0, hi) == 1.0 and sw(0.0, lo) == 0.5
    assert callable(scenario_schedule(scn))


def test_scenario_schedule_absent_means_tune(scn):
    bare = type(scn)(**{**scn.__dict__, "ref_sigma1_deg": None})
    assert scenario_schedule(bare) is None
