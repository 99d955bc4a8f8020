# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled propagation kernel; same contract as ``_pykernel.propagate_banded``."""

import numpy as np
from libc.math cimport ceil, cos, sin, sqrt

ctypedef double complex cplx


cdef inline double cabs(cplx z) noexcept nogil:
    return sqrt(z.real * z.real + z.imag * z.imag)


def propagate_banded(bands, weights, state, record, double tol=1e-17, int max_terms=80):
    cdef const cplx[:, :, ::1] B = np.ascontiguousarray(bands, dtype=complex)
    cdef const double[:, ::1] W = np.ascontiguousarray(weights, dtype=float)
    cdef const unsigned char[::1] rec = np.ascontiguousarray(record, dtype=np.uint8)
    cdef Py_ssize_t M = B.shape[0], nb = B.shape[1], d = B.shape[2]
    cdef Py_ssize_t bw = (nb - 1) // 2
    cdef Py_ssize_t nsteps = W.shape[0]

    xa = np.array(state, dtype=complex, order="C")
    cdef Py_ssize_t ncol = xa.shape[1]
    nrec = int(np.asarray(record, dtype=bool).sum())
    out_a = np.empty((nrec, d, ncol), complex)
    cdef cplx[:, :, ::1] out = out_a
    cdef cplx[:, ::1] x = xa
    # two ping-pong buffers for successive Taylor terms
    cdef cplx[:, :, ::1] buf = np.empty((2, d, ncol), complex)
    cdef cplx[:, ::1] acc = np.empty((d, ncol), complex)
    cdef cplx[:, ::1] g = np.empty((nb, d), complex)

    cdef Py_ssize_t k, m, b, i, c, j, sub, lo, hi, cur, nxt, r = 0
    cdef int s
    cdef double nu, row, xmax, tmax, wkm, ph
    cdef cplx scale, coef, acc_v

    with nogil:
        for k in range(nsteps):
            for b in range(nb):
                for i in range(d):
                    g[b, i] = 0
            for m in range(M):
                wkm = W[k, m]
                if wkm == 0.0:
                    continue
                for b in range(nb):
                    for i in range(d):
                        g[b, i] = g[b, i] + wkm * B[m, b, i]

            if bw == 0:
                for i in range(d):
                    ph = g[0, i].real
                    coef = cos(ph) - 1j * sin(ph)
                    for c in range(ncol):
                        x[i, c] = x[i, c] * coef
            else:
                nu = 0.0
                for i in range(d):
                    row = 0.0
                    for b in range(nb):
                        row = row + cabs(g[b, i])
                    if row > nu:
                        nu = row
                s = <int>ceil(nu / 2.0)
                if s < 1:
                    s = 1
                scale = -1j / (<double>s)
                for sub in range(s):
                    xmax = 0.0
                    for i in range(d):
                        for c in range(ncol):
                            buf[0, i, c] = x[i, c]
                            acc[i, c] = x[i, c]
                            if cabs(x[i, c]) > xmax:
                                xmax = cabs(x[i, c])
                    cur = 0
                    for j in range(1, max_terms + 1):
                        nxt = 1 - cur
                        coef = scale / (<double>j)
                        tmax = 0.0
                        for i in range(d):
                            lo = bw - i
                            if lo < 0:
                                lo = 0
                            hi = d - i + bw
                            if hi > nb:
                                hi = nb
                            for c in range(ncol):
                                acc_v = 0
                                for b in range(lo, hi):
                                    acc_v = acc_v + g[b, i] * buf[cur, i + b - bw, c]
                                acc_v = acc_v * coef
                                buf[nxt, i, c] = acc_v
                                if cabs(acc_v) > tmax:
                                    tmax = cabs(acc_v)
                        for i in range(d):
                            for c in range(ncol):
                                acc[i, c] = acc[i, c] + buf[nxt, i, c]
                        cur = nxt
                        if tmax <= tol * xmax:
                            break
                    for i in range(d):
                        for c in range(ncol):
                            x[i, c] = acc[i, c]
            if rec[k]:
                for i in range(d):
                    for c in range(ncol):
                        out[r, i, c] = x[i, c]
                r = r + 1
    return out_a
