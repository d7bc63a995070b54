# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled closed-loop stepping kernel.

Line-for-line port of dragtrack._kernel_py.run_guided; same argument
list, same log column layout, same operation order. Keep the two in
sync (tests/test_backends.py compares them).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport acos, cos, exp, isfinite, sin, tan, NAN

cnp.import_array()

DEF NCOL = 23

MODE_STATE_FEEDBACK = 0
MODE_OUTPUT_FEEDBACK = 1

STATUS_TERMINATED = 0
STATUS_MAX_TIME = 1
STATUS_DOMAIN = 2


cdef struct Plant:
    double mu, r_ref, h_s, rho_fac, kL_true, kD_true


cdef struct Y:
    double r, lon, lat, v, gamma, chi, s


cdef int _rhs(Plant* pl, Y* y, double sigma, Y* out) except? -1 nogil:
    cdef double cos_lat = cos(y.lat)
    cdef double cos_g = cos(y.gamma)
    if cos_lat == 0.0 or cos_g == 0.0:
        return -1
    cdef double sin_g = sin(y.gamma)
    cdef double rho = pl.rho_fac * exp(-(y.r - pl.r_ref) / pl.h_s)
    cdef double g = pl.mu / (y.r * y.r)
    cdef double q = rho * y.v * y.v
    cdef double L = q * pl.kL_true
    cdef double D = q * pl.kD_true
    out.r = y.v * sin_g
    out.lon = y.v * cos_g * sin(y.chi) / (y.r * cos_lat)
    out.lat = y.v * cos_g * cos(y.chi) / y.r
    out.v = -D - g * sin_g
    out.gamma = L * cos(sigma) / y.v - (g / y.v - y.v / y.r) * cos_g
    out.chi = (L * sin(sigma) / (y.v * cos_g)
               + y.v * cos_g * sin(y.chi) * tan(y.lat) / y.r)
    out.s = y.v * cos_g
    return 0


cdef inline void _axpy(Y* out, Y* y, double c, Y* k) nogil:
    out.r = y.r + c * k.r
    out.lon = y.lon + c * k.lon
    out.lat = y.lat + c * k.lat
    out.v = y.v + c * k.v
    out.gamma = y.gamma + c * k.gamma
    out.chi = y.chi + c * k.chi
    out.s = y.s + c * k.s


cdef int _rk4(Plant* pl, Y* y, double sigma, double h, Y* out) except? -1 nogil:
    cdef Y k1, k2, k3, k4, tmp
    if _rhs(pl, y, sigma, &k1) != 0:
        return -1
    _axpy(&tmp, y, 0.5 * h, &k1)
    if _rhs(pl, &tmp, sigma, &k2) != 0:
        return -1
    _axpy(&tmp, y, 0.5 * h, &k2)
    if _rhs(pl, &tmp, sigma, &k3) != 0:
        return -1
    _axpy(&tmp, y, h, &k3)
    if _rhs(pl, &tmp, sigma, &k4) != 0:
        return -1
    out.r = y.r + h / 6.0 * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r)
    out.lon = y.lon + h / 6.0 * (k1.lon + 2.0 * k2.lon + 2.0 * k3.lon + k4.lon)
    out.lat = y.lat + h / 6.0 * (k1.lat + 2.0 * k2.lat + 2.0 * k3.lat + k4.lat)
    out.v = y.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v)
    out.gamma = y.gamma + h / 6.0 * (k1.gamma + 2.0 * k2.gamma
                                     + 2.0 * k3.gamma + k4.gamma)
    out.chi = y.chi + h / 6.0 * (k1.chi + 2.0 * k2.chi + 2.0 * k3.chi + k4.chi)
    out.s = y.s + h / 6.0 * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s)
    return 0


cdef void _sample(double[::1] knots, double[::1] ps, double[::1] ms,
                  double[::1] dds, double t, double* out) nogil:
    cdef Py_ssize_t n = knots.shape[0]
    cdef Py_ssize_t lo, hi, mid
    cdef double h, s, s2, s3, p0, p1, m0, m1
    if t <= knots[0]:
        out[0] = ps[0]
        out[1] = 0.0
        out[2] = 0.0
        return
    if t >= knots[n - 1]:
        out[0] = ps[n - 1]
        out[1] = 0.0
        out[2] = 0.0
        return
    lo = 0
    hi = n - 1
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
    p0 = ps[lo]
    p1 = ps[lo + 1]
    m0 = ms[lo]
    m1 = ms[lo + 1]
    out[0] = ((2.0 * s3 - 3.0 * s2 + 1.0) * p0 + (s3 - 2.0 * s2 + s) * h * m0
              + (-2.0 * s3 + 3.0 * s2) * p1 + (s3 - s2) * h * m1)
    out[1] = ((6.0 * s2 - 6.0 * s) * p0 / h + (3.0 * s2 - 4.0 * s + 1.0) * m0
              + (6.0 * s - 6.0 * s2) * p1 / h + (3.0 * s2 - 2.0 * s) * m1)
    out[2] = dds[lo] + (dds[lo + 1] - dds[lo]) * s


def run_guided(int mode, cnp.ndarray y0_arr, double dt, int max_steps,
               double mu, double r_ref, double rho0, double h_s,
               double m_nom, double S, double CL0, double CD0,
               double dm, double drho, double dCL, double dCD,
               double a, double b, double eps0, double l1, double l2,
               double eps, double g0_floor, double V_f,
               double[::1] knots, double[::1] Dstar, double[::1] Dstar_dot,
               double[::1] Dstar_ddot, double[::1] noise):
    """Integrate the guided entry until v <= V_f or max_steps.

    Returns (log array [n, NCOL], status, terminal row index).
    """
    log_arr = np.empty((max_steps + 1, NCOL))
    cdef double[:, ::1] log = log_arr

    cdef Y y, yn, yf, kd
    cdef double[::1] y0 = np.ascontiguousarray(y0_arr, dtype=np.float64)
    y.r = y0[0]
    y.lon = y0[1]
    y.lat = y0[2]
    y.v = y0[3]
    y.gamma = y0[4]
    y.chi = y0[5]
    y.s = y0[6]

    cdef Plant pl
    cdef double m_true = m_nom * (1.0 + dm)
    pl.mu = mu
    pl.r_ref = r_ref
    pl.h_s = h_s
    pl.rho_fac = (1.0 + drho) * rho0
    pl.kL_true = 0.5 * S * CL0 * (1.0 + dCL) / m_true
    pl.kD_true = 0.5 * S * CD0 * (1.0 + dCD) / m_true
    cdef double kL_nom = 0.5 * S * CL0 / m_nom

    cdef double sigma_prev = 0.0
    cdef double xhat1 = 0.0, xhat2 = 0.0
    cdef double a_e2 = a / (eps0 * eps0)
    cdef double b_e = b / eps0
    cdef int status = STATUS_MAX_TIME
    cdef Py_ssize_t n = 0
    cdef double t = 0.0
    cdef int k, it
    cdef double h_alt, sin_g, cos_g, g, rho_true, q_true, D_true, D_meas
    cdef double rho_nom, L_nom, x1, W, Ddot_ob, v_dot, gamma_dot0, g_dot
    cdef double W_dot0, f, g0, x2_ob, x2_used, held, saturated, u, u_raw
    cdef double sigma, energy, tau, err, vd
    cdef double prof[3]
    cdef double oh1, oh2, k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b
    cdef double t1a, t1b, t2a, t2b, t3a, t3b

    for k in range(max_steps):
        h_alt = y.r - r_ref
        sin_g = sin(y.gamma)
        cos_g = cos(y.gamma)
        g = mu / (y.r * y.r)
        rho_true = pl.rho_fac * exp(-h_alt / h_s)
        q_true = rho_true * y.v * y.v
        D_true = q_true * pl.kD_true
        D_meas = D_true + noise[k]
        rho_nom = rho0 * exp(-h_alt / h_s)
        L_nom = rho_nom * y.v * y.v * kL_nom

        _sample(knots, Dstar, Dstar_dot, Dstar_ddot, t, prof)
        x1 = D_meas - prof[0]

        W = -y.v * sin_g / h_s - 2.0 * D_meas / y.v - 2.0 * g * sin_g / y.v
        Ddot_ob = D_meas * W
        v_dot = -D_meas - g * sin_g
        gamma_dot0 = -(g / y.v - y.v / y.r) * cos_g
        g_dot = -2.0 * g * y.v * sin_g / y.r
        W_dot0 = (-(v_dot * sin_g + y.v * cos_g * gamma_dot0) / h_s
                  - 2.0 * (D_meas * W) / y.v
                  + 2.0 * D_meas * v_dot / (y.v * y.v)
                  - 2.0 * g_dot * sin_g / y.v
                  - 2.0 * g * cos_g * gamma_dot0 / y.v
                  + 2.0 * g * sin_g * v_dot / (y.v * y.v))
        f = D_meas * (W * W + W_dot0)
        g0 = -(y.v / h_s + 2.0 * g / y.v) * L_nom * D_meas * cos_g / y.v

        x2_ob = Ddot_ob - prof[1]
        if mode == 1:
            if k == 0:
                xhat1 = x1
                xhat2 = 0.0
            x2_used = xhat2
        else:
            x2_used = x2_ob

        held = 0.0
        saturated = 0.0
        if (g0 if g0 >= 0.0 else -g0) < g0_floor:
            sigma = sigma_prev
            u = cos(sigma)
            u_raw = u
            held = 1.0
        else:
            u_raw = (-f + prof[2] - a_e2 * x1 - b_e * x2_used) / g0
            u = u_raw
            if u > 1.0:
                u = 1.0
                saturated = 1.0
            elif u < -1.0:
                u = -1.0
                saturated = 1.0
            sigma = acos(u)
        sigma_prev = sigma

        energy = 0.5 * y.v * y.v - mu / y.r
        log[n, 0] = t
        log[n, 1] = y.r
        log[n, 2] = y.lon
        log[n, 3] = y.lat
        log[n, 4] = y.v
        log[n, 5] = y.gamma
        log[n, 6] = y.chi
        log[n, 7] = h_alt
        log[n, 8] = y.s
        log[n, 9] = D_true
        log[n, 10] = prof[0]
        log[n, 11] = x1
        log[n, 12] = sigma
        log[n, 13] = u
        log[n, 14] = u_raw
        log[n, 15] = saturated
        log[n, 16] = held
        log[n, 17] = xhat1 if mode == 1 else NAN
        log[n, 18] = xhat2 if mode == 1 else NAN
        log[n, 19] = x2_ob
        log[n, 20] = f
        log[n, 21] = g0
        log[n, 22] = energy
        n += 1

        if mode == 1:
            oh1 = xhat1
            oh2 = xhat2
            k1a = oh2 + (l1 / eps) * (x1 - oh1)
            k1b = -a_e2 * x1 - b_e * oh2 + (l2 / (eps * eps)) * (x1 - oh1)
            t1a = oh1 + 0.5 * dt * k1a
            t1b = oh2 + 0.5 * dt * k1b
            k2a = t1b + (l1 / eps) * (x1 - t1a)
            k2b = -a_e2 * x1 - b_e * t1b + (l2 / (eps * eps)) * (x1 - t1a)
            t2a = oh1 + 0.5 * dt * k2a
            t2b = oh2 + 0.5 * dt * k2b
            k3a = t2b + (l1 / eps) * (x1 - t2a)
            k3b = -a_e2 * x1 - b_e * t2b + (l2 / (eps * eps)) * (x1 - t2a)
            t3a = oh1 + dt * k3a
            t3b = oh2 + dt * k3b
            k4a = t3b + (l1 / eps) * (x1 - t3a)
            k4b = -a_e2 * x1 - b_e * t3b + (l2 / (eps * eps)) * (x1 - t3a)
            xhat1 = oh1 + dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
            xhat2 = oh2 + dt / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)

        if _rk4(&pl, &y, sigma, dt, &yn) != 0:
            status = STATUS_DOMAIN
            return log_arr[:n], status, n - 1
        if not (isfinite(yn.r) and isfinite(yn.v) and isfinite(yn.gamma)):
            status = STATUS_DOMAIN
            return log_arr[:n], status, n - 1

        if yn.v <= V_f:
            tau = dt * (y.v - V_f) / (y.v - yn.v)
            for it in range(5):
                if _rk4(&pl, &y, sigma, tau, &yf) != 0:
                    status = STATUS_DOMAIN
                    return log_arr[:n], status, n - 1
                if _rhs(&pl, &yf, sigma, &kd) != 0:
                    status = STATUS_DOMAIN
                    return log_arr[:n], status, n - 1
                vd = kd.v
                err = yf.v - V_f
                if (err if err >= 0.0 else -err) <= 1e-9 * V_f or vd == 0.0:
                    break
                tau -= err / vd
                if tau < 0.0:
                    tau = 0.0
                elif tau > dt:
                    tau = dt
            y = yf
            t += tau
            status = STATUS_TERMINATED
            break

        y = yn
        t += dt

    h_alt = y.r - r_ref
    rho_true = pl.rho_fac * exp(-h_alt / h_s)
    D_true = rho_true * y.v * y.v * pl.kD_true
    _sample(knots, Dstar, Dstar_dot, Dstar_ddot, t, prof)
    log[n, 0] = t
    log[n, 1] = y.r
    log[n, 2] = y.lon
    log[n, 3] = y.lat
    log[n, 4] = y.v
    log[n, 5] = y.gamma
    log[n, 6] = y.chi
    log[n, 7] = h_alt
    log[n, 8] = y.s
    log[n, 9] = D_true
    log[n, 10] = prof[0]
    log[n, 11] = D_true - prof[0]
    log[n, 12] = sigma_prev
    log[n, 13] = cos(sigma_prev)
    log[n, 14] = cos(sigma_prev)
    log[n, 15] = 0.0
    log[n, 16] = 0.0
    log[n, 17] = xhat1 if mode == 1 else NAN
    log[n, 18] = xhat2 if mode == 1 else NAN
    log[n, 19] = NAN
    log[n, 20] = NAN
    log[n, 21] = NAN
    log[n, 22] = 0.5 * y.v * y.v - mu / y.r
    n += 1
    return log_arr[:n], status, n - 1
