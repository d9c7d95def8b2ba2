# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of ``_kernels_py``; same signatures, same operation order."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()


cdef inline void _fk(double L1, double L2, double L3, double side,
                     double q1, double q2, double q3, double* out) noexcept nogil:
    cdef double a = side * q1
    cdef double c = side * q3
    cdef double A = L2 + L3 * cos(c)
    cdef double vx = A * sin(q2)
    cdef double vy = -L3 * sin(c)
    cdef double vz = L1 + A * cos(q2)
    cdef double ca = cos(a)
    cdef double sa = sin(a)
    out[0] = vx
    out[1] = ca * vy - sa * vz
    out[2] = sa * vy + ca * vz


def fk(double L1, double L2, double L3, double side, double q1, double q2, double q3):
    cdef double out[3]
    _fk(L1, L2, L3, side, q1, q2, q3, out)
    return (out[0], out[1], out[2])


def jacobian(double L1, double L2, double L3, double side, double q1, double q2, double q3):
    cdef double a = side * q1
    cdef double c = side * q3
    cdef double cc = cos(c)
    cdef double sc = sin(c)
    cdef double cq = cos(q2)
    cdef double sq = sin(q2)
    cdef double ca = cos(a)
    cdef double sa = sin(a)
    cdef double A = L2 + L3 * cc
    cdef double vy = -L3 * sc
    cdef double vz = L1 + A * cq
    cdef double j01 = side * (-sa * vy - ca * vz)
    cdef double j02 = side * (ca * vy - sa * vz)
    cdef double d2z = -A * sq
    cdef double j10 = A * cq
    cdef double j11 = -sa * d2z
    cdef double j12 = ca * d2z
    cdef double d3x = -L3 * sc * sq
    cdef double d3y = -L3 * cc
    cdef double d3z = -L3 * sc * cq
    cdef double j20 = side * d3x
    cdef double j21 = side * (ca * d3y - sa * d3z)
    cdef double j22 = side * (sa * d3y + ca * d3z)
    return (0.0, j10, j20, j01, j11, j21, j02, j12, j22)


cdef inline void _obs(const double* I, const double* N, double w0, double w1, double w2,
                      double u0, double u1, double u2, double u3, double dt, double gain,
                      const double* L0, double* rsum, double* tau) noexcept nogil:
    cdef double Iw0 = I[0] * w0 + I[1] * w1 + I[2] * w2
    cdef double Iw1 = I[3] * w0 + I[4] * w1 + I[5] * w2
    cdef double Iw2 = I[6] * w0 + I[7] * w1 + I[8] * w2
    cdef double m0 = N[0] * u0 + N[1] * u1 + N[2] * u2 + N[3] * u3
    cdef double m1 = N[4] * u0 + N[5] * u1 + N[6] * u2 + N[7] * u3
    cdef double m2 = N[8] * u0 + N[9] * u1 + N[10] * u2 + N[11] * u3
    cdef double h0 = (w1 * Iw2 - w2 * Iw1) - m0
    cdef double h1 = (w2 * Iw0 - w0 * Iw2) - m1
    cdef double h2 = (w0 * Iw1 - w1 * Iw0) - m2
    tau[0] = gain * ((Iw0 - L0[0]) + h0 * dt + rsum[0])
    tau[1] = gain * ((Iw1 - L0[1]) + h1 * dt + rsum[1])
    tau[2] = gain * ((Iw2 - L0[2]) + h2 * dt + rsum[2])
    rsum[0] = rsum[0] + (h0 - tau[0]) * dt
    rsum[1] = rsum[1] + (h1 - tau[1]) * dt
    rsum[2] = rsum[2] + (h2 - tau[2]) * dt


def observer_update(I, N, w, u, double dt, double gain, L0, rsum):
    cdef double cI[9]
    cdef double cN[12]
    cdef double cL[3]
    cdef double cr[3]
    cdef double tau[3]
    cdef int k
    for k in range(9):
        cI[k] = I[k]
    for k in range(12):
        cN[k] = N[k]
    for k in range(3):
        cL[k] = L0[k]
        cr[k] = rsum[k]
    _obs(cI, cN, w[0], w[1], w[2], u[0], u[1], u[2], u[3], dt, gain, cL, cr, tau)
    return (tau[0], tau[1], tau[2]), (cr[0], cr[1], cr[2])


def fk_batch(double L1, double L2, double L3, double side, Q):
    cdef const double[:, ::1] q = np.ascontiguousarray(Q, dtype=np.float64)
    cdef Py_ssize_t n = q.shape[0]
    out = np.empty((n, 3), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            _fk(L1, L2, L3, side, q[i, 0], q[i, 1], q[i, 2], &o[i, 0])
    return out


def observer_run(I, N, omega, u, double dt, double gain, L0):
    cdef const double[::1] cI = np.ascontiguousarray(np.asarray(I, dtype=np.float64).ravel())
    cdef const double[::1] cN = np.ascontiguousarray(np.asarray(N, dtype=np.float64).ravel())
    cdef const double[::1] cL = np.ascontiguousarray(np.asarray(L0, dtype=np.float64).ravel())
    cdef const double[:, ::1] w = np.ascontiguousarray(omega, dtype=np.float64)
    cdef const double[:, ::1] uu = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = w.shape[0]
    out = np.empty((n, 3), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double rsum[3]
    rsum[0] = 0.0
    rsum[1] = 0.0
    rsum[2] = 0.0
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            _obs(&cI[0], &cN[0], w[i, 0], w[i, 1], w[i, 2],
                 uu[i, 0], uu[i, 1], uu[i, 2], uu[i, 3], dt, gain, &cL[0], rsum, &o[i, 0])
    return out
