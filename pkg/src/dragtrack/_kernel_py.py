"""Pure-Python closed-loop stepping kernel.

Reference implementation of the hot loop; dragtrack._kernel_c is a line-
for-line Cython port selected at import when available. Both operate on
plain float64 scalars in the same order so results agree to the last bit
in practice. Keep the two in sync.
"""

from __future__ import annotations

import math

import numpy as np

# log column layout shared with the compiled kernel and sim.TrajectoryLog
COLS = ("t", "r", "lon", "lat", "v", "gamma", "chi", "h", "s", "D", "Dstar",
        "x1", "sigma", "u", "u_raw", "saturated", "held", "xhat1", "xhat2",
        "x2", "f", "g0", "energy")
NCOL = len(COLS)

MODE_STATE_FEEDBACK = 0
MODE_OUTPUT_FEEDBACK = 1

STATUS_TERMINATED = 0
STATUS_MAX_TIME = 1
STATUS_DOMAIN = 2


def _sample_profile(knots, ps, ms, dds, t):
    """Cubic Hermite sample of (D*, Ddot*) plus linear interp of Dddot*.

    Outside the knot range: clamp to the nearest endpoint value with
    derivatives zeroed.
    """
    n = len(knots)
    if t <= knots[0]:
        return ps[0], 0.0, 0.0
    if t >= knots[n - 1]:
        return ps[n - 1], 0.0, 0.0
    lo, hi = 0, n - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if knots[mid] <= t:
            lo = mid
        else:
            hi = mid
    h = knots[lo + 1] - knots[lo]
    s = (t - knots[lo]) / h
    s2 = s * s
    s3 = s2 * s
    p0, p1 = ps[lo], ps[lo + 1]
    m0, m1 = ms[lo], ms[lo + 1]
    p = ((2.0 * s3 - 3.0 * s2 + 1.0) * p0 + (s3 - 2.0 * s2 + s) * h * m0
         + (-2.0 * s3 + 3.0 * s2) * p1 + (s3 - s2) * h * m1)
    dp = ((6.0 * s2 - 6.0 * s) * p0 / h + (3.0 * s2 - 4.0 * s + 1.0) * m0
          + (6.0 * s - 6.0 * s2) * p1 / h + (3.0 * s2 - 2.0 * s) * m1)
    ddp = dds[lo] + (dds[lo + 1] - dds[lo]) * s
    return p, dp, ddp


def run_guided(mode, y0, dt, max_steps,
               mu, r_ref, rho0, h_s,
               m_nom, S, CL0, CD0,
               dm, drho, dCL, dCD,
               a, b, eps0, l1, l2, eps, g0_floor,
               V_f, knots, Dstar, Dstar_dot, Dstar_ddot, noise):
    """Integrate the guided entry until v <= V_f or max_steps.

    Returns (log array [n, NCOL], status, terminal row index).
    """
    log = np.empty((max_steps + 1, NCOL))

    r, lon, lat, v, gamma, chi, s = (float(y0[i]) for i in range(7))
    m_true = m_nom * (1.0 + dm)
    rho_fac = (1.0 + drho) * rho0
    kL_true = 0.5 * S * CL0 * (1.0 + dCL) / m_true
    kD_true = 0.5 * S * CD0 * (1.0 + dCD) / m_true
    kL_nom = 0.5 * S * CL0 / m_nom
    kD_nom = 0.5 * S * CD0 / m_nom

    def rhs(r_, lon_, lat_, v_, gamma_, chi_, sigma_):
        # truth equations of motion plus downrange rate; raises on the
        # polar / vertical-flight singularities
        cos_lat = math.cos(lat_)
        cos_g = math.cos(gamma_)
        if cos_lat == 0.0 or cos_g == 0.0:
            raise ZeroDivisionError
        sin_g = math.sin(gamma_)
        rho = rho_fac * math.exp(-(r_ - r_ref) / h_s)
        g = mu / (r_ * r_)
        q = rho * v_ * v_
        L = q * kL_true
        D = q * kD_true
        return (v_ * sin_g,
                v_ * cos_g * math.sin(chi_) / (r_ * cos_lat),
                v_ * cos_g * math.cos(chi_) / r_,
                -D - g * sin_g,
                L * math.cos(sigma_) / v_ - (g / v_ - v_ / r_) * cos_g,
                L * math.sin(sigma_) / (v_ * cos_g)
                + v_ * cos_g * math.sin(chi_) * math.tan(lat_) / r_,
                v_ * cos_g)

    def rk4(r_, lon_, lat_, v_, gamma_, chi_, s_, sigma_, h_):
        y = (r_, lon_, lat_, v_, gamma_, chi_, s_)
        k1 = rhs(r_, lon_, lat_, v_, gamma_, chi_, sigma_)
        y2 = tuple(y[i] + 0.5 * h_ * k1[i] for i in range(7))
        k2 = rhs(y2[0], y2[1], y2[2], y2[3], y2[4], y2[5], sigma_)
        y3 = tuple(y[i] + 0.5 * h_ * k2[i] for i in range(7))
        k3 = rhs(y3[0], y3[1], y3[2], y3[3], y3[4], y3[5], sigma_)
        y4 = tuple(y[i] + h_ * k3[i] for i in range(7))
        k4 = rhs(y4[0], y4[1], y4[2], y4[3], y4[4], y4[5], sigma_)
        return tuple(
            y[i] + h_ / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            for i in range(7))

    sigma_prev = 0.0        # full lift-up until g0 becomes invertible
    xhat1 = 0.0
    xhat2 = 0.0
    a_e2 = a / (eps0 * eps0)
    b_e = b / eps0
    status = STATUS_MAX_TIME
    n = 0
    t = 0.0

    for k in range(max_steps):
        # measurements and onboard model at the step start
        h_alt = r - r_ref
        sin_g = math.sin(gamma)
        cos_g = math.cos(gamma)
        g = mu / (r * r)
        rho_true = rho_fac * math.exp(-h_alt / h_s)
        q_true = rho_true * v * v
        D_true = q_true * kD_true
        D_meas = D_true + noise[k]
        rho_nom = rho0 * math.exp(-h_alt / h_s)
        L_nom = rho_nom * v * v * kL_nom

        Ds, Dds, Ddds = _sample_profile(knots, Dstar, Dstar_dot, Dstar_ddot, t)
        x1 = D_meas - Ds

        # onboard drag chain at the measured state
        W = -v * sin_g / h_s - 2.0 * D_meas / v - 2.0 * g * sin_g / v
        Ddot_ob = D_meas * W
        v_dot = -D_meas - g * sin_g
        gamma_dot0 = -(g / v - v / r) * cos_g
        g_dot = -2.0 * g * v * sin_g / r
        W_dot0 = (-(v_dot * sin_g + v * cos_g * gamma_dot0) / h_s
                  - 2.0 * (D_meas * W) / v + 2.0 * D_meas * v_dot / (v * v)
                  - 2.0 * g_dot * sin_g / v
                  - 2.0 * g * cos_g * gamma_dot0 / v
                  + 2.0 * g * sin_g * v_dot / (v * v))
        f = D_meas * (W * W + W_dot0)
        g0 = -(v / h_s + 2.0 * g / v) * L_nom * D_meas * cos_g / v

        x2_ob = Ddot_ob - Dds
        if mode == MODE_OUTPUT_FEEDBACK:
            if k == 0:
                xhat1 = x1
                xhat2 = 0.0
            x2_used = xhat2
        else:
            x2_used = x2_ob

        held = 0.0
        saturated = 0.0
        if abs(g0) < g0_floor:
            sigma = sigma_prev
            u = math.cos(sigma)
            u_raw = u
            held = 1.0
        else:
            u_raw = (-f + Ddds - a_e2 * x1 - b_e * x2_used) / g0
            u = u_raw
            if u > 1.0:
                u = 1.0
                saturated = 1.0
            elif u < -1.0:
                u = -1.0
                saturated = 1.0
            sigma = math.acos(u)
        sigma_prev = sigma

        energy = 0.5 * v * v - mu / r
        log[n, 0] = t
        log[n, 1] = r
        log[n, 2] = lon
        log[n, 3] = lat
        log[n, 4] = v
        log[n, 5] = gamma
        log[n, 6] = chi
        log[n, 7] = h_alt
        log[n, 8] = s
        log[n, 9] = D_true
        log[n, 10] = Ds
        log[n, 11] = x1
        log[n, 12] = sigma
        log[n, 13] = u
        log[n, 14] = u_raw
        log[n, 15] = saturated
        log[n, 16] = held
        log[n, 17] = xhat1 if mode == MODE_OUTPUT_FEEDBACK else math.nan
        log[n, 18] = xhat2 if mode == MODE_OUTPUT_FEEDBACK else math.nan
        log[n, 19] = x2_ob
        log[n, 20] = f
        log[n, 21] = g0
        log[n, 22] = energy
        n += 1

        # observer advanced with the same scheme, measurement held
        if mode == MODE_OUTPUT_FEEDBACK:
            oh1, oh2 = xhat1, xhat2
            k1a = oh2 + (l1 / eps) * (x1 - oh1)
            k1b = -a_e2 * x1 - b_e * oh2 + (l2 / (eps * eps)) * (x1 - oh1)
            t1a, t1b = oh1 + 0.5 * dt * k1a, oh2 + 0.5 * dt * k1b
            k2a = t1b + (l1 / eps) * (x1 - t1a)
            k2b = -a_e2 * x1 - b_e * t1b + (l2 / (eps * eps)) * (x1 - t1a)
            t2a, t2b = oh1 + 0.5 * dt * k2a, oh2 + 0.5 * dt * k2b
            k3a = t2b + (l1 / eps) * (x1 - t2a)
            k3b = -a_e2 * x1 - b_e * t2b + (l2 / (eps * eps)) * (x1 - t2a)
            t3a, t3b = oh1 + dt * k3a, oh2 + dt * k3b
            k4a = t3b + (l1 / eps) * (x1 - t3a)
            k4b = -a_e2 * x1 - b_e * t3b + (l2 / (eps * eps)) * (x1 - t3a)
            xhat1 = oh1 + dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
            xhat2 = oh2 + dt / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)

        # plant step with the command held
        try:
            rn, lonn, latn, vn, gamman, chin, sn = rk4(
                r, lon, lat, v, gamma, chi, s, sigma, dt)
        except (ZeroDivisionError, ValueError, OverflowError):
            status = STATUS_DOMAIN
            return log[:n], status, n - 1
        if not (math.isfinite(rn) and math.isfinite(vn)
                and math.isfinite(gamman)):
            status = STATUS_DOMAIN
            return log[:n], status, n - 1

        if vn <= V_f:
            # refine the event time within the step: secant start, then
            # Newton on v(tau) - V_f using partial RK4 sub-steps
            tau = dt * (v - V_f) / (v - vn)
            yf = None
            for _ in range(5):
                yf = rk4(r, lon, lat, v, gamma, chi, s, sigma, tau)
                vd = rhs(yf[0], yf[1], yf[2], yf[3], yf[4], yf[5], sigma)[3]
                err = yf[3] - V_f
                if abs(err) <= 1e-9 * V_f or vd == 0.0:
                    break
                tau -= err / vd
                tau = min(max(tau, 0.0), dt)
            r, lon, lat, v, gamma, chi, s = yf
            t += tau
            status = STATUS_TERMINATED
            break

        r, lon, lat, v, gamma, chi, s = rn, lonn, latn, vn, gamman, chin, sn
        t += dt

    # final row at the terminal (or time-out) state
    h_alt = r - r_ref
    rho_true = rho_fac * math.exp(-h_alt / h_s)
    D_true = rho_true * v * v * kD_true
    Ds, Dds, Ddds = _sample_profile(knots, Dstar, Dstar_dot, Dstar_ddot, t)
    log[n, 0] = t
    log[n, 1] = r
    log[n, 2] = lon
    log[n, 3] = lat
    log[n, 4] = v
    log[n, 5] = gamma
    log[n, 6] = chi
    log[n, 7] = h_alt
    log[n, 8] = s
    log[n, 9] = D_true
    log[n, 10] = Ds
    log[n, 11] = D_true - Ds
    log[n, 12] = sigma_prev
    log[n, 13] = math.cos(sigma_prev)
    log[n, 14] = math.cos(sigma_prev)
    log[n, 15] = 0.0
    log[n, 16] = 0.0
    log[n, 17] = xhat1 if mode == MODE_OUTPUT_FEEDBACK else math.nan
    log[n, 18] = xhat2 if mode == MODE_OUTPUT_FEEDBACK else math.nan
    log[n, 19] = math.nan
    log[n, 20] = math.nan
    log[n, 21] = math.nan
    log[n, 22] = 0.5 * v * v - mu / r
    n += 1
    return log[:n], status, n - 1
