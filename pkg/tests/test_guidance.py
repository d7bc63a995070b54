import math

import numpy as np
import pytest

from dragtrack.guidance import (G0BelowFloor, GuidanceConfig, ObserverState,
                                observer_rhs, observer_step,
                                output_feedback_u, saturate_and_bank,
                                state_feedback_u)

CFG = GuidanceConfig(a=1.982, b=3.0, eps0=5.0)


def test_state_feedback_inverts_the_chain():
    x1, x2, f, g0, ddd = 2.0, -0.5, 0.3, -0.02, 0.01
    u = state_feedback_u(x1, x2, f, g0, ddd, CFG)
    # closing the loop must reproduce the commanded error dynamics
    lhs = f + g0 * u
    rhs = ddd - (CFG.a / CFG.eps0 ** 2) * x1 - (CFG.b / CFG.eps0) * x2
    assert lhs == pytest.approx(rhs, rel=1e-14)


def test_output_feedback_is_same_law_with_estimate():
    args = (1.0, 0.2, 0.3, -0.05, 0.0)
    assert output_feedback_u(*args, CFG) == state_feedback_u(*args, CFG)


def test_g0_floor_raises():
    with pytest.raises(G0BelowFloor):
        state_feedback_u(1.0, 0.0, 0.0, 1e-12, 0.0, CFG)


def test_saturate_and_bank():
    u, sigma, sat = saturate_and_bank(0.5)
    assert (u, sat) == (0.5, False)
    assert math.cos(sigma) == pytest.approx(0.5, rel=1e-14)
    u, sigma, sat = saturate_and_bank(3.7)
    assert (u, sigma, sat) == (1.0, 0.0, True)
    u, sigma, sat = saturate_and_bank(-2.0)
    assert (u, sat) == (-1.0, True)
    assert sigma == pytest.approx(math.pi, rel=1e-14)


def test_bank_round_trip_over_the_full_range():
    for u in np.linspace(-1.0, 1.0, 41):
        got, sigma, sat = saturate_and_bank(u)
        assert not sat
        assert math.cos(sigma) == pytest.approx(u, abs=1e-12)
        assert 0.0 <= sigma <= math.pi


def test_observer_matches_linear_solution():
    # constant measurement: the observer is an LTI system; compare one
    # RK4 trajectory against the matrix-exponential solution
    from scipy.linalg import expm

    cfg = GuidanceConfig(a=20.0, b=5.0, eps0=20.0, l1=2.0, l2=1.0, eps=0.45)
    x1m = 0.7
    A = np.array([[-cfg.l1 / cfg.eps, 1.0],
                  [-cfg.l2 / cfg.eps ** 2, -cfg.b / cfg.eps0]])
    c = np.array([cfg.l1 / cfg.eps * x1m,
                  (-cfg.a / cfg.eps0 ** 2 + cfg.l2 / cfg.eps ** 2) * x1m])
    z0 = np.array([0.1, -0.3])
    dt, n = 0.01, 300
    obs = ObserverState(*z0)
    for _ in range(n):
        obs = observer_step(obs, x1m, cfg, dt)
    T = n * dt
    zf = expm(A * T) @ z0
    # particular solution for the constant forcing
    zp = np.linalg.solve(A, (expm(A * T) - np.eye(2)) @ c)
    want = zf + zp
    assert obs.xhat1 == pytest.approx(want[0], abs=1e-9)
    assert obs.xhat2 == pytest.approx(want[1], abs=1e-9)


def test_observer_rhs_fixed_point():
    # with xhat1 = x1 and xhat2 = 0 the innovation vanishes and the rate
    # reduces to the commanded error dynamics
    d1, d2 = observer_rhs(0.4, 0.0, 0.4, CFG)
    assert d1 == 0.0
    assert d2 == pytest.approx(-(CFG.a / CFG.eps0 ** 2) * 0.4, rel=1e-14)


def test_observer_step_rejects_bad_dt():
    with pytest.raises(ValueError):
        observer_step(ObserverState(), 0.0, CFG, 0.0)


def test_config_validation():
    with pytest.raises(ValueError):
        GuidanceConfig(a=0.0, b=1.0, eps0=1.0)
    with pytest.raises(ValueError):
        GuidanceConfig(a=1.0, b=1.0, eps0=1.0, eps=-0.1)
