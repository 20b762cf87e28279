# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loop for the master-equation integrator.

Mirrors steadybox._kernels_py.rk4_clamped; see that module for the contract.
"""

import numpy as np

cimport numpy as cnp

BACKEND = "compiled"


cdef inline void _stage_rates(const double[:, ::1] h,
                              const double[::1] stage,
                              const cnp.intp_t[::1] internal_idx,
                              double[::1] out) noexcept nogil:
    cdef Py_ssize_t a, j, i
    cdef Py_ssize_t n = h.shape[0]
    cdef Py_ssize_t ni = internal_idx.shape[0]
    cdef double acc
    for a in range(ni):
        i = internal_idx[a]
        acc = 0.0
        for j in range(n):
            acc += h[i, j] * stage[j]
        out[a] = acc


def rk4_clamped(double[:, ::1] h,
                double[::1] p0,
                cnp.intp_t[::1] internal_idx,
                cnp.intp_t[::1] terminal_idx,
                double[:, :, ::1] terminal_values,
                double[::1] dts):
    cdef Py_ssize_t n = h.shape[0]
    cdef Py_ssize_t ni = internal_idx.shape[0]
    cdef Py_ssize_t nt = terminal_idx.shape[0]
    cdef Py_ssize_t ns = dts.shape[0]

    states_arr = np.empty((ns + 1, n))
    cdef double[:, ::1] states = states_arr
    cur_arr = np.array(p0, dtype=float)
    cdef double[::1] cur = cur_arr
    stage_arr = np.array(p0, dtype=float)
    cdef double[::1] stage = stage_arr
    k_arr = np.empty((4, max(ni, 1)))
    cdef double[:, ::1] k = k_arr

    cdef Py_ssize_t s, a, t
    cdef double step
    with nogil:
        for a in range(n):
            states[0, a] = p0[a]
        for s in range(ns):
            step = dts[s]
            for a in range(n):
                stage[a] = cur[a]
            for t in range(nt):
                stage[terminal_idx[t]] = terminal_values[s, 0, t]
            _stage_rates(h, stage, internal_idx, k[0])
            for a in range(ni):
                stage[internal_idx[a]] = cur[internal_idx[a]] + 0.5 * step * k[0, a]
            for t in range(nt):
                stage[terminal_idx[t]] = terminal_values[s, 1, t]
            _stage_rates(h, stage, internal_idx, k[1])
            for a in range(ni):
                stage[internal_idx[a]] = cur[internal_idx[a]] + 0.5 * step * k[1, a]
            _stage_rates(h, stage, internal_idx, k[2])
            for a in range(ni):
                stage[internal_idx[a]] = cur[internal_idx[a]] + step * k[2, a]
            for t in range(nt):
                stage[terminal_idx[t]] = terminal_values[s, 2, t]
            _stage_rates(h, stage, internal_idx, k[3])
            for a in range(ni):
                cur[internal_idx[a]] += (step / 6.0) * (
                    k[0, a] + 2.0 * k[1, a] + 2.0 * k[2, a] + k[3, a])
            for t in range(nt):
                cur[terminal_idx[t]] = terminal_values[s, 2, t]
            for a in range(n):
                states[s + 1, a] = cur[a]
    return states_arr
