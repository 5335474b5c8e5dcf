"""Compiled inner loops for the trajectory propagators.

All kernels work on plain float64 arrays.  States are stored every ``stride``
steps; readouts and innovations are always kept at full resolution.

Ordering codes: 0 = x then z, 1 = z then x, 2 = symmetric (half x, z, half x).
Renormalization codes: 0 = off, 1 = project onto the unit sphere,
2 = pull back into the ball only when outside it.
"""
import math

import numpy as np
from numba import njit

ORDER_XZ = 0
ORDER_ZX = 1
ORDER_SYMMETRIC = 2

RENORM_OFF = 0
RENORM_SPHERE = 1
RENORM_BALL = 2


@njit(cache=True, inline="always")
def _kraus_x(x, y, z, w):
    t = math.tanh(w)
    d = 1.0 + x * t
    c = math.cosh(w) * d
    return (x + t) / d, y / c, z / c


@njit(cache=True, inline="always")
def _kraus_z(x, y, z, w):
    t = math.tanh(w)
    d = 1.0 + z * t
    c = math.cosh(w) * d
    return x / c, y / c, (z + t) / d


@njit(cache=True, inline="always")
def _mixture(a, u, g, sigma):
    if u < 0.5 * (1.0 + a):
        return 1.0 + sigma * g
    return -1.0 + sigma * g


@njit(cache=True)
def kraus_chain(s0, gx, gz, ux, uz, dt, tau_x, tau_z, ordering, stride):
    """Kraus chain with readouts sampled from the exact two-Gaussian mixture."""
    n = gx.shape[0]
    states = np.empty((n // stride + 1, 3))
    rx = np.empty(n)
    rz = np.empty(n)
    nx = np.empty(n)
    nz = np.empty(n)
    x, y, z = s0[0], s0[1], s0[2]
    states[0, 0], states[0, 1], states[0, 2] = x, y, z
    sx = math.sqrt(tau_x / dt)
    sz = math.sqrt(tau_z / dt)
    kx = dt / tau_x
    kz = dt / tau_z
    for k in range(n):
        x0, z0 = x, z
        if ordering == ORDER_ZX:
            r2 = _mixture(z, uz[k], gz[k], sz)
            x, y, z = _kraus_z(x, y, z, r2 * kz)
            r1 = _mixture(x, ux[k], gx[k], sx)
            x, y, z = _kraus_x(x, y, z, r1 * kx)
        else:
            r1 = _mixture(x, ux[k], gx[k], sx)
            if ordering == ORDER_SYMMETRIC:
                x, y, z = _kraus_x(x, y, z, 0.5 * r1 * kx)
            else:
                x, y, z = _kraus_x(x, y, z, r1 * kx)
            r2 = _mixture(z, uz[k], gz[k], sz)
            x, y, z = _kraus_z(x, y, z, r2 * kz)
            if ordering == ORDER_SYMMETRIC:
                x, y, z = _kraus_x(x, y, z, 0.5 * r1 * kx)
        rx[k] = r1
        rz[k] = r2
        nx[k] = (r1 - x0) / math.sqrt(tau_x)
        nz[k] = (r2 - z0) / math.sqrt(tau_z)
        if (k + 1) % stride == 0:
            j = (k + 1) // stride
            states[j, 0], states[j, 1], states[j, 2] = x, y, z
    return states, rx, rz, nx, nz


@njit(cache=True)
def kraus_replay(s0, rx, rz, dt, tau_x, tau_z, ordering, stride):
    """Kraus chain driven by a given readout record."""
    n = rx.shape[0]
    states = np.empty((n // stride + 1, 3))
    x, y, z = s0[0], s0[1], s0[2]
    states[0, 0], states[0, 1], states[0, 2] = x, y, z
    kx = dt / tau_x
    kz = dt / tau_z
    for k in range(n):
        wx = rx[k] * kx
        wz = rz[k] * kz
        if ordering == ORDER_ZX:
            x, y, z = _kraus_z(x, y, z, wz)
            x, y, z = _kraus_x(x, y, z, wx)
        elif ordering == ORDER_SYMMETRIC:
            x, y, z = _kraus_x(x, y, z, 0.5 * wx)
            x, y, z = _kraus_z(x, y, z, wz)
            x, y, z = _kraus_x(x, y, z, 0.5 * wx)
        else:
            x, y, z = _kraus_x(x, y, z, wx)
            x, y, z = _kraus_z(x, y, z, wz)
        if (k + 1) % stride == 0:
            j = (k + 1) // stride
            states[j, 0], states[j, 1], states[j, 2] = x, y, z
    return states


@njit(cache=True, inline="always")
def _strat_rhs(x, y, z, ax, az):
    # ax = r_x / tau_x, az = r_z / tau_z
    return (
        (1.0 - x * x) * ax - x * z * az,
        -y * x * ax - y * z * az,
        (1.0 - z * z) * az - x * z * ax,
    )


@njit(cache=True, inline="always")
def _renorm(x, y, z, mode):
    n2 = x * x + y * y + z * z
    if mode == RENORM_SPHERE or (mode == RENORM_BALL and n2 > 1.0):
        n = math.sqrt(n2)
        return x / n, y / n, z / n, abs(n - 1.0)
    return x, y, z, 0.0


@njit(cache=True, inline="always")
def _heun_step(x, y, z, ax, az, dt):
    fx, fy, fz = _strat_rhs(x, y, z, ax, az)
    px, py, pz = x + dt * fx, y + dt * fy, z + dt * fz
    gx, gy, gz = _strat_rhs(px, py, pz, ax, az)
    h = 0.5 * dt
    return x + h * (fx + gx), y + h * (fy + gy), z + h * (fz + gz)


@njit(cache=True)
def heun_chain(s0, xix, xiz, dt, tau_x, tau_z, renorm, stride):
    """Stratonovich (Heun) integration; readouts ``r = a + sqrt(tau) xi`` from the pre-step state."""
    n = xix.shape[0]
    states = np.empty((n // stride + 1, 3))
    rx = np.empty(n)
    rz = np.empty(n)
    x, y, z = s0[0], s0[1], s0[2]
    states[0, 0], states[0, 1], states[0, 2] = x, y, z
    qx = math.sqrt(tau_x)
    qz = math.sqrt(tau_z)
    worst = 0.0
    for k in range(n):
        r1 = x + qx * xix[k]
        r2 = z + qz * xiz[k]
        x, y, z = _heun_step(x, y, z, r1 / tau_x, r2 / tau_z, dt)
        x, y, z, c = _renorm(x, y, z, renorm)
        worst = max(worst, c)
        rx[k] = r1
        rz[k] = r2
        if (k + 1) % stride == 0:
            j = (k + 1) // stride
            states[j, 0], states[j, 1], states[j, 2] = x, y, z
    return states, rx, rz, worst


@njit(cache=True)
def heun_replay(s0, rx, rz, dt, tau_x, tau_z, renorm, stride):
    n = rx.shape[0]
    states = np.empty((n // stride + 1, 3))
    x, y, z = s0[0], s0[1], s0[2]
    states[0, 0], states[0, 1], states[0, 2] = x, y, z
    worst = 0.0
    for k in range(n):
        x, y, z = _heun_step(x, y, z, rx[k] / tau_x, rz[k] / tau_z, dt)
        x, y, z, c = _renorm(x, y, z, renorm)
        worst = max(worst, c)
        if (k + 1) % stride == 0:
            j = (k + 1) // stride
            states[j, 0], states[j, 1], states[j, 2] = x, y, z
    return states, worst


@njit(cache=True, inline="always")
def _ito_step(x, y, z, ex, ez, dt, tau_x, tau_z):
    # ex, ez are white-noise samples (variance 1/dt)
    ix = ex / math.sqrt(tau_x)
    iz = ez / math.sqrt(tau_z)
    cx = 0.5 / tau_x
    cz = 0.5 / tau_z
    dx = -cz * x + (1.0 - x * x) * ix - x * z * iz
    dy = -(cx + cz) * y - x * y * ix - y * z * iz
    dz = -cx * z + (1.0 - z * z) * iz - x * z * ix
    return x + dt * dx, y + dt * dy, z + dt * dz


@njit(cache=True)
def ito_chain(s0, xix, xiz, dt, tau_x, tau_z, renorm, stride):
    """Euler-Maruyama integration of the Ito master equation in Bloch form."""
    n = xix.shape[0]
    states = np.empty((n // stride + 1, 3))
    rx = np.empty(n)
    rz = np.empty(n)
    x, y, z = s0[0], s0[1], s0[2]
    states[0, 0], states[0, 1], states[0, 2] = x, y, z
    qx = math.sqrt(tau_x)
    qz = math.sqrt(tau_z)
    worst = 0.0
    for k in range(n):
        rx[k] = x + qx * xix[k]
        rz[k] = z + qz * xiz[k]
        x, y, z = _ito_step(x, y, z, xix[k], xiz[k], dt, tau_x, tau_z)
        x, y, z, c = _renorm(x, y, z, renorm)
        worst = max(worst, c)
        if (k + 1) % stride == 0:
            j = (k + 1) // stride
            states[j, 0], states[j, 1], states[j, 2] = x, y, z
    return states, rx, rz, worst


@njit(cache=True)
def ito_replay(s0, rx, rz, dt, tau_x, tau_z, renorm, stride):
    """Ito integration driven by a readout record through its innovations."""
    n = rx.shape[0]
    states = np.empty((n // stride + 1, 3))
    x, y, z = s0[0], s0[1], s0[2]
    states[0, 0], states[0, 1], states[0, 2] = x, y, z
    qx = math.sqrt(tau_x)
    qz = math.sqrt(tau_z)
    worst = 0.0
    for k in range(n):
        ex = (rx[k] - x) / qx
        ez = (rz[k] - z) / qz
        x, y, z = _ito_step(x, y, z, ex, ez, dt, tau_x, tau_z)
        x, y, z, c = _renorm(x, y, z, renorm)
        worst = max(worst, c)
        if (k + 1) % stride == 0:
            j = (k + 1) // stride
            states[j, 0], states[j, 1], states[j, 2] = x, y, z
    return states, worst


@njit(cache=True)
def geodesic_replay(s0, rx, rz, dt, tau_x, tau_z, stride):
    """Forward step of the Bloch equations taken along the great circle.

    For a pure state the right-hand side is tangent to the sphere, so the
    step rotates ``s`` by ``|f| dt`` towards ``f``.  Requires ``|s0| = 1``.
    """
    n = rx.shape[0]
    states = np.empty((n // stride + 1, 3))
    x, y, z = s0[0], s0[1], s0[2]
    states[0, 0], states[0, 1], states[0, 2] = x, y, z
    for k in range(n):
        fx, fy, fz = _strat_rhs(x, y, z, rx[k] / tau_x, rz[k] / tau_z)
        speed = math.sqrt(fx * fx + fy * fy + fz * fz)
        if speed > 0.0:
            a = speed * dt
            c = math.cos(a)
            s = math.sin(a) / speed
            x, y, z = c * x + s * fx, c * y + s * fy, c * z + s * fz
            n2 = math.sqrt(x * x + y * y + z * z)
            x, y, z = x / n2, y / n2, z / n2
        if (k + 1) % stride == 0:
            j = (k + 1) // stride
            states[j, 0], states[j, 1], states[j, 2] = x, y, z
    return states
