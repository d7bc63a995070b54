"""Bank-angle guidance laws and the drag-rate observer.

The effective control is u = cos(sigma); the feedback law inverts the
drag-chain control effectiveness g0 and places the tracking-error poles
through the gains (a, b, eps0). The high-gain observer supplies the
drag-rate error estimate when it is not measured.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class GuidanceConfig:
    a: float
    b: float
    eps0: float
    l1: float = 2.0
    l2: float = 1.0
    eps: float = 0.481
    g0_floor: float = 1e-8      # below this |g0| the law cannot invert
    u_min: float = -1.0
    u_max: float = 1.0

    def __post_init__(self):
        for name in ("a", "b", "eps0", "l1", "l2", "eps"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"GuidanceConfig.{name} must be positive")


@dataclass
class ObserverState:
    xhat1: float = 0.0          # estimated drag tracking error
    xhat2: float = 0.0          # estimated tracking-error rate


@dataclass(frozen=True)
class TrackingState:
    x1: float                   # D - D*
    x2: float                   # Ddot - Ddot* (state-feedback mode only)


def state_feedback_u(x1: float, x2: float, f: float, g0: float,
                     Dstar_ddot: float, cfg: GuidanceConfig) -> float:
    """Unclamped state-feedback command."""
    if abs(g0) < cfg.g0_floor:
        raise G0BelowFloor(g0)
    return (-f + Dstar_ddot - (cfg.a / cfg.eps0 ** 2) * x1
            - (cfg.b / cfg.eps0) * x2) / g0


def output_feedback_u(x1: float, xhat2: float, f: float, g0: float,
                      Dstar_ddot: float, cfg: GuidanceConfig) -> float:
    """Same law with the observer estimate in place of the measured rate."""
    return state_feedback_u(x1, xhat2, f, g0, Dstar_ddot, cfg)


class G0BelowFloor(Exception):
    """Control effectiveness too small to invert; caller holds the
    previous bank command."""

    def __init__(self, g0: float):
        super().__init__(f"|g0| = {abs(g0):.3e} below singularity floor")
        self.g0 = g0


def observer_rhs(xhat1: float, xhat2: float, x1_meas: float,
                 cfg: GuidanceConfig) -> tuple[float, float]:
    """Observer state rates for a zero-order-held measurement."""
    innov = x1_meas - xhat1
    d1 = xhat2 + (cfg.l1 / cfg.eps) * innov
    d2 = (-(cfg.a / cfg.eps0 ** 2) * x1_meas - (cfg.b / cfg.eps0) * xhat2
          + (cfg.l2 / cfg.eps ** 2) * innov)
    return d1, d2


def observer_step(obs: ObserverState, x1_meas: float, cfg: GuidanceConfig,
                  dt: float) -> ObserverState:
    """Advance the observer one classical RK4 step, the same scheme and
    step size as the plant."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    x1, x2 = obs.xhat1, obs.xhat2
    k1 = observer_rhs(x1, x2, x1_meas, cfg)
    k2 = observer_rhs(x1 + 0.5 * dt * k1[0], x2 + 0.5 * dt * k1[1], x1_meas, cfg)
    k3 = observer_rhs(x1 + 0.5 * dt * k2[0], x2 + 0.5 * dt * k2[1], x1_meas, cfg)
    k4 = observer_rhs(x1 + dt * k3[0], x2 + dt * k3[1], x1_meas, cfg)
    return ObserverState(
        xhat1=x1 + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        xhat2=x2 + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    )


def saturate_and_bank(u_raw: float) -> tuple[float, float, bool]:
    """Clamp the command to [-1, 1] and map to a bank angle in [0, pi]."""
    u = min(1.0, max(-1.0, u_raw))
    return u, math.acos(u), u != u_raw
