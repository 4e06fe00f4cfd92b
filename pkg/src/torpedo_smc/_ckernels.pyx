# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled integration kernels (same contract as ``_pykernels``)."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef inline void _matvec_add(const double[:, ::1] A, const double* v,
                             const double[::1] c, double* out, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += A[i, j] * v[j]
        out[i] = acc + c[i]


cdef void _step(const double[:, ::1] A, double* x, const double[::1] c,
                double dt, double* work, Py_ssize_t n) noexcept nogil:
    # work holds k1..k4 and one stage buffer: 5 * n doubles
    cdef double* k1 = work
    cdef double* k2 = work + n
    cdef double* k3 = work + 2 * n
    cdef double* k4 = work + 3 * n
    cdef double* tmp = work + 4 * n
    cdef Py_ssize_t i
    cdef double half = 0.5 * dt
    _matvec_add(A, x, c, k1, n)
    for i in range(n):
        tmp[i] = x[i] + half * k1[i]
    _matvec_add(A, tmp, c, k2, n)
    for i in range(n):
        tmp[i] = x[i] + half * k2[i]
    _matvec_add(A, tmp, c, k3, n)
    for i in range(n):
        tmp[i] = x[i] + dt * k3[i]
    _matvec_add(A, tmp, c, k4, n)
    for i in range(n):
        x[i] = x[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


def rk4_affine(const double[:, ::1] A, const double[::1] x, const double[::1] c, double dt):
    cdef Py_ssize_t n = x.shape[0]
    out = np.array(x, dtype=np.float64, copy=True)
    cdef double[::1] xo = out
    cdef double* work = <double*> malloc(5 * n * sizeof(double))
    if work == NULL:
        raise MemoryError()
    try:
        _step(A, &xo[0], c, dt, work, n)
    finally:
        free(work)
    return out


def rk4_affine_trajectory(const double[:, ::1] A, const double[::1] x0,
                          const double[:, ::1] c_seq, double dt):
    cdef Py_ssize_t n = x0.shape[0]
    cdef Py_ssize_t steps = c_seq.shape[0]
    cdef Py_ssize_t i, j
    out = np.empty((steps + 1, n), dtype=np.float64)
    cdef double[:, ::1] traj = out
    cdef double* x = <double*> malloc(n * sizeof(double))
    cdef double* work = <double*> malloc(5 * n * sizeof(double))
    if x == NULL or work == NULL:
        free(x)
        free(work)
        raise MemoryError()
    try:
        for j in range(n):
            x[j] = x0[j]
            traj[0, j] = x0[j]
        with nogil:
            for i in range(steps):
                _step(A, x, c_seq[i], dt, work, n)
                for j in range(n):
                    traj[i + 1, j] = x[j]
    finally:
        free(x)
        free(work)
    return out
