"""Pure-Python kernels. Reference implementation and fallback for ``_kernels``.

Operation order mirrors ``_kernels.pyx`` exactly so both backends produce the
same doubles.
"""

from math import cos, sin

import numpy as np


def fk(L1, L2, L3, side, q1, q2, q3):
    a = side * q1
    c = side * q3
    A = L2 + L3 * cos(c)
    vx = A * sin(q2)
    vy = -L3 * sin(c)
    vz = L1 + A * cos(q2)
    ca = cos(a)
    sa = sin(a)
    return (vx, ca * vy - sa * vz, sa * vy + ca * vz)


def jacobian(L1, L2, L3, side, q1, q2, q3):
    """Row-major 3x3 position Jacobian as a flat 9-tuple."""
    a = side * q1
    c = side * q3
    cc = cos(c)
    sc = sin(c)
    cq = cos(q2)
    sq = sin(q2)
    ca = cos(a)
    sa = sin(a)
    A = L2 + L3 * cc
    vy = -L3 * sc
    vz = L1 + A * cq
    # d/dq1
    j01 = side * (-sa * vy - ca * vz)
    j02 = side * (ca * vy - sa * vz)
    # d/dq2
    d2z = -A * sq
    j10 = A * cq
    j11 = -sa * d2z
    j12 = ca * d2z
    # d/dq3
    d3x = -L3 * sc * sq
    d3y = -L3 * cc
    d3z = -L3 * sc * cq
    j20 = side * d3x
    j21 = side * (ca * d3y - sa * d3z)
    j22 = side * (sa * d3y + ca * d3z)
    return (0.0, j10, j20, j01, j11, j21, j02, j12, j22)


def observer_update(I, N, w, u, dt, gain, L0, rsum):
    """One momentum-observer step; I is 9 values, N is 12 values (row-major)."""
    w0, w1, w2 = w
    Iw0 = I[0] * w0 + I[1] * w1 + I[2] * w2
    Iw1 = I[3] * w0 + I[4] * w1 + I[5] * w2
    Iw2 = I[6] * w0 + I[7] * w1 + I[8] * w2
    u0, u1, u2, u3 = u
    m0 = N[0] * u0 + N[1] * u1 + N[2] * u2 + N[3] * u3
    m1 = N[4] * u0 + N[5] * u1 + N[6] * u2 + N[7] * u3
    m2 = N[8] * u0 + N[9] * u1 + N[10] * u2 + N[11] * u3
    h0 = (w1 * Iw2 - w2 * Iw1) - m0
    h1 = (w2 * Iw0 - w0 * Iw2) - m1
    h2 = (w0 * Iw1 - w1 * Iw0) - m2
    t0 = gain * ((Iw0 - L0[0]) + h0 * dt + rsum[0])
    t1 = gain * ((Iw1 - L0[1]) + h1 * dt + rsum[1])
    t2 = gain * ((Iw2 - L0[2]) + h2 * dt + rsum[2])
    r0 = rsum[0] + (h0 - t0) * dt
    r1 = rsum[1] + (h1 - t1) * dt
    r2 = rsum[2] + (h2 - t2) * dt
    return (t0, t1, t2), (r0, r1, r2)


def fk_batch(L1, L2, L3, side, Q):
    Q = np.ascontiguousarray(Q, dtype=float)
    out = np.empty((Q.shape[0], 3))
    for i in range(Q.shape[0]):
        out[i] = fk(L1, L2, L3, side, Q[i, 0], Q[i, 1], Q[i, 2])
    return out


def observer_run(I, N, omega, u, dt, gain, L0):
    I = tuple(np.asarray(I, dtype=float).ravel())
    N = tuple(np.asarray(N, dtype=float).ravel())
    omega = np.ascontiguousarray(omega, dtype=float)
    u = np.ascontiguousarray(u, dtype=float)
    L0 = tuple(float(v) for v in L0)
    out = np.empty((omega.shape[0], 3))
    rsum = (0.0, 0.0, 0.0)
    for i in range(omega.shape[0]):
        tau, rsum = observer_update(I, N, tuple(omega[i]), tuple(u[i]), dt, gain, L0, rsum)
        out[i] = tau
    return out
