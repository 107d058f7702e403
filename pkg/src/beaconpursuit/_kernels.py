"""Compiled inner loops for the fixed-step integrator.

State layout: float64 array of shape (n_agents, 4, 3) with rows
(position, x_axis, y_axis, z_axis) per agent. Config codes select how the
steering commands are produced; the frame transport itself is identical
for every config. Kept free of Python objects so the whole time loop sits
in one nopython region.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# Steering selector codes.
CONST = 0  # fixed (u, v), calibration runs
SINGLE = 1  # one agent splitting attention between the two beacons
PAIR = 2  # two agents in mutual pursuit, each holding its own beacon

BEACON_NONE = 1e300  # sentinel "separation" when no singular reference exists


@njit(cache=True)
def _steer_terms(S, i, tx, ty, tz, a):
    """Unweighted CB steering pair for agent i about the point (tx, ty, tz).

    Returns (-(xbar - a) * y.d, -(xbar - a) * z.d) with d the unit vector
    from the reference point to the agent. Caller applies gain and
    attention weights.
    """
    rx = S[i, 0, 0] - tx
    ry = S[i, 0, 1] - ty
    rz = S[i, 0, 2] - tz
    n = np.sqrt(rx * rx + ry * ry + rz * rz)
    dx = rx / n
    dy = ry / n
    dz = rz / n
    xbar = S[i, 1, 0] * dx + S[i, 1, 1] * dy + S[i, 1, 2] * dz
    g = -(xbar - a)
    u = g * (S[i, 2, 0] * dx + S[i, 2, 1] * dy + S[i, 2, 2] * dz)
    v = g * (S[i, 3, 0] * dx + S[i, 3, 1] * dy + S[i, 3, 2] * dz)
    return u, v


@njit(cache=True)
def _controls(S, cfg, mu, lam, pa, pb, b, out):
    """Steering commands for every agent, written into out (n, 2).

    Parameter slots: SINGLE uses (pa, pb) = (ab1, ab2); PAIR uses
    (pa, pb) = (a, a0); CONST uses them as the fixed (u, v).
    """
    if cfg == CONST:
        for i in range(S.shape[0]):
            out[i, 0] = pa
            out[i, 1] = pb
    elif cfg == SINGLE:
        u1, v1 = _steer_terms(S, 0, 0.0, 0.0, -b, pa)
        u2, v2 = _steer_terms(S, 0, 0.0, 0.0, b, pb)
        out[0, 0] = mu * ((1.0 - lam) * u2 + lam * u1)
        out[0, 1] = mu * ((1.0 - lam) * v2 + lam * v1)
    else:
        un, vn = _steer_terms(S, 0, S[1, 0, 0], S[1, 0, 1], S[1, 0, 2], pa)
        ub, vb = _steer_terms(S, 0, 0.0, 0.0, -b, pb)
        out[0, 0] = mu * ((1.0 - lam) * un + lam * ub)
        out[0, 1] = mu * ((1.0 - lam) * vn + lam * vb)
        un, vn = _steer_terms(S, 1, S[0, 0, 0], S[0, 0, 1], S[0, 0, 2], pa)
        ub, vb = _steer_terms(S, 1, 0.0, 0.0, b, pb)
        out[1, 0] = mu * ((1.0 - lam) * un + lam * ub)
        out[1, 1] = mu * ((1.0 - lam) * vn + lam * vb)


@njit(cache=True)
def _rhs(S, cfg, mu, lam, pa, pb, b, ctl, dS):
    """Time derivative of the packed state under the closed-loop law."""
    _controls(S, cfg, mu, lam, pa, pb, b, ctl)
    for i in range(S.shape[0]):
        u = ctl[i, 0]
        v = ctl[i, 1]
        for c in range(3):
            dS[i, 0, c] = S[i, 1, c]
            dS[i, 1, c] = u * S[i, 2, c] + v * S[i, 3, c]
            dS[i, 2, c] = -u * S[i, 1, c]
            dS[i, 3, c] = -v * S[i, 1, c]


@njit(cache=True)
def _rk4_step(S, cfg, mu, lam, pa, pb, b, dt, out):
    """Classical RK4 step; out must not alias S."""
    n = S.shape[0]
    ctl = np.empty((n, 2))
    k1 = np.empty_like(S)
    k2 = np.empty_like(S)
    k3 = np.empty_like(S)
    k4 = np.empty_like(S)
    _rhs(S, cfg, mu, lam, pa, pb, b, ctl, k1)
    _rhs(S + (0.5 * dt) * k1, cfg, mu, lam, pa, pb, b, ctl, k2)
    _rhs(S + (0.5 * dt) * k2, cfg, mu, lam, pa, pb, b, ctl, k3)
    _rhs(S + dt * k3, cfg, mu, lam, pa, pb, b, ctl, k4)
    out[:] = S + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@njit(cache=True)
def _orthonormalize(S):
    """Gram-Schmidt each agent's frame in place, keeping the x direction.

    Returns the largest absolute component change, i.e. the integration
    drift removed by the projection.
    """
    drift = 0.0
    for i in range(S.shape[0]):
        xn = np.sqrt(S[i, 1, 0] ** 2 + S[i, 1, 1] ** 2 + S[i, 1, 2] ** 2)
        ex0 = S[i, 1, 0] / xn
        ex1 = S[i, 1, 1] / xn
        ex2 = S[i, 1, 2] / xn
        py = S[i, 2, 0] * ex0 + S[i, 2, 1] * ex1 + S[i, 2, 2] * ex2
        wy0 = S[i, 2, 0] - py * ex0
        wy1 = S[i, 2, 1] - py * ex1
        wy2 = S[i, 2, 2] - py * ex2
        yn = np.sqrt(wy0 * wy0 + wy1 * wy1 + wy2 * wy2)
        ey0 = wy0 / yn
        ey1 = wy1 / yn
        ey2 = wy2 / yn
        pzx = S[i, 3, 0] * ex0 + S[i, 3, 1] * ex1 + S[i, 3, 2] * ex2
        pzy = S[i, 3, 0] * ey0 + S[i, 3, 1] * ey1 + S[i, 3, 2] * ey2
        wz0 = S[i, 3, 0] - pzx * ex0 - pzy * ey0
        wz1 = S[i, 3, 1] - pzx * ex1 - pzy * ey1
        wz2 = S[i, 3, 2] - pzx * ex2 - pzy * ey2
        zn = np.sqrt(wz0 * wz0 + wz1 * wz1 + wz2 * wz2)
        ez0 = wz0 / zn
        ez1 = wz1 / zn
        ez2 = wz2 / zn
        d = abs(ex0 - S[i, 1, 0])
        d = max(d, abs(ex1 - S[i, 1, 1]))
        d = max(d, abs(ex2 - S[i, 1, 2]))
        d = max(d, abs(ey0 - S[i, 2, 0]))
        d = max(d, abs(ey1 - S[i, 2, 1]))
        d = max(d, abs(ey2 - S[i, 2, 2]))
        d = max(d, abs(ez0 - S[i, 3, 0]))
        d = max(d, abs(ez1 - S[i, 3, 1]))
        d = max(d, abs(ez2 - S[i, 3, 2]))
        drift = max(drift, d)
        S[i, 1, 0] = ex0
        S[i, 1, 1] = ex1
        S[i, 1, 2] = ex2
        S[i, 2, 0] = ey0
        S[i, 2, 1] = ey1
        S[i, 2, 2] = ey2
        S[i, 3, 0] = ez0
        S[i, 3, 1] = ez1
        S[i, 3, 2] = ez2
    return drift


@njit(cache=True)
def _dist_to(S, i, tx, ty, tz):
    dx = S[i, 0, 0] - tx
    dy = S[i, 0, 1] - ty
    dz = S[i, 0, 2] - tz
    return np.sqrt(dx * dx + dy * dy + dz * dz)


@njit(cache=True)
def _min_separation(S, cfg, b):
    """Smallest distance between any agent and its singular references."""
    if cfg == CONST:
        return BEACON_NONE
    if cfg == SINGLE:
        d1 = _dist_to(S, 0, 0.0, 0.0, -b)
        d2 = _dist_to(S, 0, 0.0, 0.0, b)
        return min(d1, d2)
    d = _dist_to(S, 0, S[1, 0, 0], S[1, 0, 1], S[1, 0, 2])
    d1 = _dist_to(S, 0, 0.0, 0.0, -b)
    d2 = _dist_to(S, 1, 0.0, 0.0, b)
    return min(d, min(d1, d2))


@njit(cache=True)
def _integrate(S0, cfg, mu, lam, pa, pb, b, dt, n_steps, stride, abort_eps):
    """Fixed-step RK4 loop with per-step frame renormalization.

    Snapshots (state and steering commands) are recorded every `stride`
    steps, the initial state included. Separations are checked before
    every step; crossing `abort_eps` stops the run and truncates the
    recording at the last full stride.

    Returns (times, states, controls, aborted, abort_step, max_drift).
    """
    n = S0.shape[0]
    n_rec = n_steps // stride + 1
    times = np.empty(n_rec)
    rec = np.empty((n_rec, n, 4, 3))
    ctl_rec = np.empty((n_rec, n, 2))
    ctl = np.empty((n, 2))
    S = S0.copy()
    Snew = np.empty_like(S)

    times[0] = 0.0
    rec[0] = S
    _controls(S, cfg, mu, lam, pa, pb, b, ctl)
    ctl_rec[0] = ctl[:, :]

    k = 0
    max_drift = 0.0
    aborted = False
    abort_step = -1
    for step in range(1, n_steps + 1):
        if _min_separation(S, cfg, b) <= abort_eps:
            aborted = True
            abort_step = step - 1
            break
        _rk4_step(S, cfg, mu, lam, pa, pb, b, dt, Snew)
        S[:] = Snew
        d = _orthonormalize(S)
        if d > max_drift:
            max_drift = d
        if step % stride == 0:
            k += 1
            times[k] = step * dt
            rec[k] = S
            _controls(S, cfg, mu, lam, pa, pb, b, ctl)
            ctl_rec[k] = ctl[:, :]
    return (
        times[: k + 1].copy(),
        rec[: k + 1].copy(),
        ctl_rec[: k + 1].copy(),
        aborted,
        abort_step,
        max_drift,
    )
