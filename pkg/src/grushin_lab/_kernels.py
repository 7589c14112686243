"""Compiled inner loops for the shooting solver.

The ODE -psi'' + (V - E) psi = 0 is written as y' = A(x) y with
A = [[0, 1], [V - E, 0]] and y = (psi, psi').  Each cell is advanced with the
fourth-order Magnus integrator using the two Gauss points of the cell; the
exponential of the traceless 2x2 Magnus matrix is evaluated in closed form, so
the step is exact for piecewise-constant V and never differentiates V.
"""
import math

import numpy as np
from numba import njit

SQRT3_12 = math.sqrt(3.0) / 12.0
_RESCALE = 1e150


@njit(cache=True, nogil=True)
def magnus_step(h, q1, q2):
    """Entries (a, b, c, d) of the propagator over a cell of length h.

    q1, q2 are V - E at the first and second Gauss points.
    """
    g = SQRT3_12 * h * h * (q1 - q2)
    qm = 0.5 * (q1 + q2)
    s2 = g * g + h * h * qm
    if s2 > 1e-8:
        s = math.sqrt(s2)
        cc = math.cosh(s)
        ss = math.sinh(s) / s
    elif s2 < -1e-8:
        w = math.sqrt(-s2)
        cc = math.cos(w)
        ss = math.sin(w) / w
    else:
        cc = 1.0 + s2 / 2.0 + s2 * s2 / 24.0 + s2 * s2 * s2 / 720.0
        ss = 1.0 + s2 / 6.0 + s2 * s2 / 120.0 + s2 * s2 * s2 / 5040.0
    return cc + ss * g, ss * h, ss * h * qm, cc - ss * g


@njit(cache=True, nogil=True)
def _wrap(a):
    while a > math.pi:
        a -= 2.0 * math.pi
    while a <= -math.pi:
        a += 2.0 * math.pi
    return a


@njit(cache=True, nogil=True)
def phase_mismatch(h, v1, v2, energy, m, scale):
    """theta_L(x_m) - theta_R(x_m) for Dirichlet data at both grid ends.

    theta is the Pruefer angle atan2(scale * psi, psi'), continued through every
    cell; the left solution starts at theta = 0, the right one at theta = pi.
    Eigenvalue n (1-based) solves mismatch = (n - 1) * pi.
    """
    ncell = h.shape[0]
    p, dp = 0.0, 1.0
    theta = 0.0
    prev = 0.0
    for i in range(m):
        a, b, c, d = magnus_step(h[i], v1[i] - energy, v2[i] - energy)
        p, dp = a * p + b * dp, c * p + d * dp
        ang = math.atan2(scale * p, dp)
        theta += _wrap(ang - prev)
        prev = ang
        big = abs(p) + abs(dp)
        if big > _RESCALE:
            p /= big
            dp /= big
    theta_left = theta
    p, dp = 0.0, -1.0
    theta = math.pi
    prev = math.pi
    for i in range(ncell - 1, m - 1, -1):
        a, b, c, d = magnus_step(h[i], v1[i] - energy, v2[i] - energy)
        # inverse propagator (unit determinant)
        p, dp = d * p - b * dp, -c * p + a * dp
        ang = math.atan2(scale * p, dp)
        theta += _wrap(ang - prev)
        prev = ang
        big = abs(p) + abs(dp)
        if big > _RESCALE:
            p /= big
            dp /= big
    return theta_left - theta


@njit(cache=True, nogil=True)
def shoot_states(h, v1, v2, energy, m):
    """Left and right Dirichlet solutions, stored at every node.

    Returns psi, dpsi (left solution on nodes 0..m, right on m..N) together with
    the right solution's state at node m and per-node log scale factors.
    """
    ncell = h.shape[0]
    nn = ncell + 1
    psi = np.zeros(nn)
    dpsi = np.zeros(nn)
    logs = np.zeros(nn)
    p, dp = 0.0, 1.0
    psi[0] = p
    dpsi[0] = dp
    acc = 0.0
    for i in range(m):
        a, b, c, d = magnus_step(h[i], v1[i] - energy, v2[i] - energy)
        p, dp = a * p + b * dp, c * p + d * dp
        big = abs(p) + abs(dp)
        if big > _RESCALE:
            p /= big
            dp /= big
            acc += math.log(big)
        psi[i + 1] = p
        dpsi[i + 1] = dp
        logs[i + 1] = acc
    p, dp = 0.0, -1.0
    acc = 0.0
    right_psi = np.zeros(nn)
    right_dpsi = np.zeros(nn)
    right_logs = np.zeros(nn)
    right_psi[nn - 1] = p
    right_dpsi[nn - 1] = dp
    for i in range(ncell - 1, m - 1, -1):
        a, b, c, d = magnus_step(h[i], v1[i] - energy, v2[i] - energy)
        p, dp = d * p - b * dp, -c * p + a * dp
        big = abs(p) + abs(dp)
        if big > _RESCALE:
            p /= big
            dp /= big
            acc += math.log(big)
        right_psi[i] = p
        right_dpsi[i] = dp
        right_logs[i] = acc
    return psi, dpsi, logs, right_psi, right_dpsi, right_logs


@njit(cache=True, nogil=True)
def propagate_points(x0, p0, dp0, s, v1, v2, energy):
    """Advance node states (p0, dp0) at x0 by sub-steps s (one Magnus step each)."""
    k = s.shape[0]
    out_p = np.empty(k)
    out_dp = np.empty(k)
    for j in range(k):
        if s[j] == 0.0:
            out_p[j] = p0[j]
            out_dp[j] = dp0[j]
            continue
        a, b, c, d = magnus_step(s[j], v1[j] - energy, v2[j] - energy)
        out_p[j] = a * p0[j] + b * dp0[j]
        out_dp[j] = c * p0[j] + d * dp0[j]
    return out_p, out_dp
