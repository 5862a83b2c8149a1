"""Hot inner loops: polynomial evaluation, I_h lookup, Dormand-Prince stepping.

Every function here is compiled with numba unless the env flag in ``_accel``
turns it off, in which case the identical source runs as plain Python.
Arguments are restricted to floats, ints and contiguous float64/int64 arrays so
both paths accept the same calls.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import njit

TWO_PI = 2.0 * math.pi

# Dormand-Prince 5(4) tableau.
C2, C3, C4, C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
A21 = 1.0 / 5.0
A31, A32 = 3.0 / 40.0, 9.0 / 40.0
A41, A42, A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
A51, A52, A53, A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
A61, A62, A63, A64, A65 = 9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0
B1, B3, B4, B5, B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
E1, E3, E4, E5, E6, E7 = (
    -71.0 / 57600.0,
    71.0 / 16695.0,
    -71.0 / 1920.0,
    17253.0 / 339200.0,
    -22.0 / 525.0,
    1.0 / 40.0,
)

SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 10.0

STATUS_OK = 0
STATUS_MAX_STEPS = 1
STATUS_BOUND = 2
STATUS_STEP_UNDERFLOW = 3


@njit(cache=True)
def poly3(x, y, z, exps, coeffs):
    """Sum of coeffs[m] * x**i * y**j * z**k with (i, j, k) = exps[m]."""
    acc = 0.0
    for m in range(coeffs.shape[0]):
        term = coeffs[m]
        for _ in range(exps[m, 0]):
            term *= x
        for _ in range(exps[m, 1]):
            term *= y
        for _ in range(exps[m, 2]):
            term *= z
        acc += term
    return acc


@njit(cache=True)
def h_circle(c, s, pq, hc):
    acc = 0.0
    for m in range(hc.shape[0]):
        term = hc[m]
        for _ in range(pq[m, 0]):
            term *= c
        for _ in range(pq[m, 1]):
            term *= s
        acc += term
    return acc


@njit(cache=True)
def ih_lookup(theta, grid, pq, hc, glx, glw):
    """I_h(theta) from the cumulative grid plus a Gauss-Legendre correction."""
    n = grid.shape[0] - 1
    dth = TWO_PI / n
    m = math.floor(theta / TWO_PI)
    phi = theta - m * TWO_PI
    k = int(phi / dth)
    if k >= n:
        k = n - 1
    if k < 0:
        k = 0
    a = k * dth
    half = 0.5 * (phi - a)
    mid = 0.5 * (phi + a)
    corr = 0.0
    if half != 0.0:
        for q in range(glx.shape[0]):
            s = mid + half * glx[q]
            corr += glw[q] * h_circle(math.cos(s), math.sin(s), pq, hc)
        corr *= half
    return m * grid[n] + grid[k] + corr


@njit(cache=True)
def _reduced_rhs(theta, u, r0, z0, eps, exps, coeffs, grid, pq, hc, glx, glw):
    r = r0 * math.exp(min(u, 700.0))  # trial stages may overshoot; the bound check rejects them
    z = z0 + ih_lookup(theta, grid, pq, hc, glx, glw)
    return eps * poly3(r * math.cos(theta), r * math.sin(theta), z, exps, coeffs)


@njit(cache=True)
def reduced_log_increment(r0, z0, eps, th0, th1, exps, coeffs, grid, pq, hc, glx, glw,
                          rtol, atol, max_steps, u_min, u_max):
    """Integrate d(log r)/dtheta = eps * Psi over [th0, th1].

    Returns (increment of log r, status, accepted steps). Working in log r keeps
    the displacement r*expm1(u) accurate relative to eps.
    """
    u = 0.0
    if eps == 0.0 or th1 <= th0:
        return u, STATUS_OK, 0
    t = th0
    span = th1 - th0
    h = span / 8.0
    steps = 0
    k1 = _reduced_rhs(t, u, r0, z0, eps, exps, coeffs, grid, pq, hc, glx, glw)
    while t < th1:
        if steps >= max_steps:
            return u, STATUS_MAX_STEPS, steps
        if t + h > th1:
            h = th1 - t
        if h <= 1e-14 * span:
            return u, STATUS_STEP_UNDERFLOW, steps
        k2 = _reduced_rhs(t + C2 * h, u + h * A21 * k1, r0, z0, eps, exps, coeffs, grid, pq, hc, glx, glw)
        k3 = _reduced_rhs(t + C3 * h, u + h * (A31 * k1 + A32 * k2), r0, z0, eps, exps, coeffs,
                          grid, pq, hc, glx, glw)
        k4 = _reduced_rhs(t + C4 * h, u + h * (A41 * k1 + A42 * k2 + A43 * k3), r0, z0, eps, exps,
                          coeffs, grid, pq, hc, glx, glw)
        k5 = _reduced_rhs(t + C5 * h, u + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4), r0, z0, eps,
                          exps, coeffs, grid, pq, hc, glx, glw)
        k6 = _reduced_rhs(t + h, u + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5), r0, z0,
                          eps, exps, coeffs, grid, pq, hc, glx, glw)
        u_new = u + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
        k7 = _reduced_rhs(t + h, u_new, r0, z0, eps, exps, coeffs, grid, pq, hc, glx, glw)
        err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        scale = atol + rtol * max(abs(u), abs(u_new))
        errnorm = abs(err) / scale
        if errnorm <= 1.0:
            t = t + h
            u = u_new
            k1 = k7
            steps += 1
            if u < u_min or u > u_max:
                return u, STATUS_BOUND, steps
            if errnorm == 0.0:
                factor = MAX_FACTOR
            else:
                factor = min(MAX_FACTOR, SAFETY * errnorm ** -0.2)
        else:
            factor = max(MIN_FACTOR, SAFETY * errnorm ** -0.2)
        h = h * factor
    return u, STATUS_OK, steps


@njit(cache=True)
def cart_rhs(state, eps, exps, coeffs, pq, hc, out):
    x = state[0]
    y = state[1]
    rho = math.sqrt(x * x + y * y)
    psi = poly3(x, y, state[2], exps, coeffs)
    out[0] = -y + eps * x * psi
    out[1] = x + eps * y * psi
    out[2] = h_circle(x / rho, y / rho, pq, hc)


@njit(cache=True)
def cart_step(state, h, eps, exps, coeffs, pq, hc, K):
    """One Dormand-Prince step of the smooth field on one side of y = 0.

    Fills K (7 x 3) with the stages and returns (new state, error estimate).
    """
    tmp = np.empty(3)
    cart_rhs(state, eps, exps, coeffs, pq, hc, K[0])
    for d in range(3):
        tmp[d] = state[d] + h * A21 * K[0, d]
    cart_rhs(tmp, eps, exps, coeffs, pq, hc, K[1])
    for d in range(3):
        tmp[d] = state[d] + h * (A31 * K[0, d] + A32 * K[1, d])
    cart_rhs(tmp, eps, exps, coeffs, pq, hc, K[2])
    for d in range(3):
        tmp[d] = state[d] + h * (A41 * K[0, d] + A42 * K[1, d] + A43 * K[2, d])
    cart_rhs(tmp, eps, exps, coeffs, pq, hc, K[3])
    for d in range(3):
        tmp[d] = state[d] + h * (A51 * K[0, d] + A52 * K[1, d] + A53 * K[2, d] + A54 * K[3, d])
    cart_rhs(tmp, eps, exps, coeffs, pq, hc, K[4])
    for d in range(3):
        tmp[d] = state[d] + h * (A61 * K[0, d] + A62 * K[1, d] + A63 * K[2, d] + A64 * K[3, d]
                                 + A65 * K[4, d])
    cart_rhs(tmp, eps, exps, coeffs, pq, hc, K[5])
    new = np.empty(3)
    for d in range(3):
        new[d] = state[d] + h * (B1 * K[0, d] + B3 * K[2, d] + B4 * K[3, d] + B5 * K[4, d] + B6 * K[5, d])
    cart_rhs(new, eps, exps, coeffs, pq, hc, K[6])
    err = np.empty(3)
    for d in range(3):
        err[d] = h * (E1 * K[0, d] + E3 * K[2, d] + E4 * K[3, d] + E5 * K[4, d] + E6 * K[5, d]
                      + E7 * K[6, d])
    return new, err
