"""Compiled Dormand-Prince 5(4) integrator for -u'' + (q - E) u = 0.

The potential is passed in canonical form ``A/x^2 + c + interp(grid, vals)``.
Status codes returned by :func:`integrate`:

    0  success
    1  non-finite state (integration error)
    2  step size underflow
    3  step budget exhausted
"""

import numpy as np
from numba import njit

OK, NONFINITE, UNDERFLOW, BUDGET = 0, 1, 2, 3

# Dormand-Prince tableau
C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = (
    9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0)
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
E1, E3, E4, E5, E6, E7 = (
    71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)

MAX_STEPS = 5_000_000


@njit(cache=True)
def _q(x, A, c, grid, vals):
    v = c
    if A != 0.0:
        v += A / (x * x)
    if grid.shape[0] > 0:
        v += np.interp(x, grid, vals)
    return v


@njit(cache=True)
def _err_norm(e0, e1, s0, s1):
    return np.sqrt(0.5 * ((e0 / s0) ** 2 + (e1 / s1) ** 2))


@njit(cache=True)
def _grow(arr, n):
    out = np.empty(2 * arr.shape[0], dtype=arr.dtype)
    out[:n] = arr[:n]
    return out


@njit(cache=True)
def integrate(A, c, grid, vals, E, x0, u0, du0, x1, rtol, atol, max_step, record):
    """Integrate from ``x0`` to ``x1`` (either direction).

    Returns ``(xs, us, dus, n, status)``; with ``record`` false only the
    start and final states are stored (n == 2).
    """
    cap = 1024 if record else 2
    xs = np.empty(cap)
    us = np.empty(cap)
    dus = np.empty(cap)
    xs[0], us[0], dus[0] = x0, u0, du0
    n = 1
    span = x1 - x0
    if span == 0.0:
        xs[1], us[1], dus[1] = x0, u0, du0
        return xs, us, dus, 2, OK
    sgn = 1.0 if span > 0 else -1.0
    length = abs(span)
    hmax = min(max_step, length)

    x, u, du = x0, u0, du0
    k1u, k1d = du, (_q(x, A, c, grid, vals) - E) * u

    # initial step (Hairer, Norsett & Wanner, II.4)
    s0 = atol + rtol * abs(u)
    s1 = atol + rtol * abs(du)
    d0 = _err_norm(u, du, s0, s1)
    d1 = _err_norm(k1u, k1d, s0, s1)
    h0 = 1e-6 * max(1.0, abs(x)) if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, hmax)
    yu, yd = u + sgn * h0 * k1u, du + sgn * h0 * k1d
    f2u, f2d = yd, (_q(x + sgn * h0, A, c, grid, vals) - E) * yu
    d2 = _err_norm(f2u - k1u, f2d - k1d, s0, s1) / h0
    dm = max(d1, d2)
    if dm <= 1e-15:
        h1 = max(1e-6 * max(1.0, abs(x)), h0 * 1e-3)
    else:
        h1 = (0.01 / dm) ** 0.2
    h = min(100.0 * h0, h1, hmax)
    h = min(max(h, 1e3 * 2.220446049250313e-16 * abs(x)), hmax)

    status = OK
    steps = 0
    done = False
    rejected = False
    while not done:
        steps += 1
        if steps > MAX_STEPS:
            status = BUDGET
            break
        remaining = abs(x1 - x)
        last = False
        # also absorb a leftover that round-off could not resolve
        if h >= remaining or remaining - h <= 64.0 * 2.220446049250313e-16 * abs(x1):
            h = remaining
            last = True
        if h <= 16.0 * 2.220446049250313e-16 * max(abs(x), 1e-300):
            status = UNDERFLOW
            break
        hs = sgn * h

        k2u = du + hs * A21 * k1d
        k2y = u + hs * A21 * k1u
        k2d = (_q(x + C2 * hs, A, c, grid, vals) - E) * k2y

        yu = u + hs * (A31 * k1u + A32 * k2u)
        yd = du + hs * (A31 * k1d + A32 * k2d)
        k3u, k3d = yd, (_q(x + C3 * hs, A, c, grid, vals) - E) * yu

        yu = u + hs * (A41 * k1u + A42 * k2u + A43 * k3u)
        yd = du + hs * (A41 * k1d + A42 * k2d + A43 * k3d)
        k4u, k4d = yd, (_q(x + C4 * hs, A, c, grid, vals) - E) * yu

        yu = u + hs * (A51 * k1u + A52 * k2u + A53 * k3u + A54 * k4u)
        yd = du + hs * (A51 * k1d + A52 * k2d + A53 * k3d + A54 * k4d)
        k5u, k5d = yd, (_q(x + C5 * hs, A, c, grid, vals) - E) * yu

        yu = u + hs * (A61 * k1u + A62 * k2u + A63 * k3u + A64 * k4u + A65 * k5u)
        yd = du + hs * (A61 * k1d + A62 * k2d + A63 * k3d + A64 * k4d + A65 * k5d)
        xn = x1 if last else x + hs
        k6u, k6d = yd, (_q(xn, A, c, grid, vals) - E) * yu

        nu = u + hs * (B1 * k1u + B3 * k3u + B4 * k4u + B5 * k5u + B6 * k6u)
        nd = du + hs * (B1 * k1d + B3 * k3d + B4 * k4d + B5 * k5d + B6 * k6d)
        k7u, k7d = nd, (_q(xn, A, c, grid, vals) - E) * nu

        eu = hs * (E1 * k1u + E3 * k3u + E4 * k4u + E5 * k5u + E6 * k6u + E7 * k7u)
        ed = hs * (E1 * k1d + E3 * k3d + E4 * k4d + E5 * k5d + E6 * k6d + E7 * k7d)
        s0 = atol + rtol * max(abs(u), abs(nu))
        s1 = atol + rtol * max(abs(du), abs(nd))
        err = _err_norm(eu, ed, s0, s1)
        if not np.isfinite(err) or not np.isfinite(nu) or not np.isfinite(nd):
            status = NONFINITE
            break

        if err <= 1.0:
            x, u, du = xn, nu, nd
            k1u, k1d = k7u, k7d
            if record:
                if n == xs.shape[0]:
                    xs = _grow(xs, n)
                    us = _grow(us, n)
                    dus = _grow(dus, n)
                xs[n], us[n], dus[n] = x, u, du
                n += 1
            done = last
            fac = 10.0 if err == 0.0 else min(10.0, max(0.2, 0.9 * err ** -0.2))
            if rejected:
                fac = min(fac, 1.0)
            h = min(h * fac, hmax)
            rejected = False
        else:
            h = h * max(0.2, 0.9 * err ** -0.2)
            rejected = True

    if not record:
        xs[1], us[1], dus[1] = x, u, du
        n = 2
    return xs, us, dus, n, status
