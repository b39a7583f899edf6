# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; see ``_pykernels`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.math cimport atan, fabs, INFINITY, NAN

cnp.import_array()

BACKEND = "cython"


def hfh_search(x1s, x2s, double gain, double H, double er1, double er2,
               double T, double V, double alpha1, double alpha2):
    cdef double[::1] xa = np.ascontiguousarray(x1s, dtype=np.float64)
    cdef double[::1] xb = np.ascontiguousarray(x2s, dtype=np.float64)
    cdef Py_ssize_t n1 = xa.shape[0], n2 = xb.shape[0], i, j
    cdef Py_ssize_t best_i = -1, best_j = -1
    cdef double best_t = NAN, best_total = -INFINITY
    cdef double H2 = H * H, c = gain / (V * H), slack = 1e-12 * T
    cdef double x1, x2, tf, q11, q21, q12, q22, f1, f2, a1, a2, b1, b2
    cdef double den, num, scale, t, window, total
    with nogil:
        for i in range(n1):
            x1 = xa[i]
            q11 = gain / ((x1 - er1) * (x1 - er1) + H2)
            q21 = gain / ((x1 - er2) * (x1 - er2) + H2)
            for j in range(n2):
                x2 = xb[j]
                if x2 < x1:
                    continue
                tf = (x2 - x1) / V
                window = T - tf
                if window < -slack:
                    continue
                q12 = gain / ((x2 - er1) * (x2 - er1) + H2)
                q22 = gain / ((x2 - er2) * (x2 - er2) + H2)
                f1 = c * (atan((x2 - er1) / H) - atan((x1 - er1) / H))
                f2 = c * (atan((x2 - er2) / H) - atan((x1 - er2) / H))
                a1 = q11 - q12
                a2 = q21 - q22
                b1 = (T - tf) * q12 + f1
                b2 = (T - tf) * q22 + f2
                den = alpha2 * a1 - alpha1 * a2
                num = alpha1 * b2 - alpha2 * b1
                scale = fabs(alpha2 * b1) + fabs(alpha1 * b2)
                if fabs(den) * T <= 1e-12 * scale:
                    if fabs(num) > 1e-9 * scale:
                        continue
                    t = 0.0
                else:
                    t = num / den
                    if t < -slack or t > window + slack:
                        continue
                if window < 0.0:
                    window = 0.0
                if t < 0.0:
                    t = 0.0
                elif t > window:
                    t = window
                total = (a1 + a2) * t + b1 + b2
                if total > best_total:
                    best_total = total
                    best_t = t
                    best_i = i
                    best_j = j
    return best_i, best_j, best_t, best_total


def dp_frontier(q1, q2, int n_steps, int reach, int n_levels, double level_width, double dt):
    cdef double[::1] Q1 = np.ascontiguousarray(q1, dtype=np.float64)
    cdef double[::1] Q2 = np.ascontiguousarray(q2, dtype=np.float64)
    cdef Py_ssize_t n_pos = Q1.shape[0], L = n_levels
    parents_arr = np.full((n_steps, n_pos, L), -1, dtype=np.int32)
    e1_arr = np.full((n_pos, L), -1.0)
    e2_arr = np.zeros((n_pos, L))
    n1_arr = np.empty((n_pos, L))
    n2_arr = np.empty((n_pos, L))
    cdef int[:, :, ::1] parents = parents_arr
    cdef double[:, ::1] e1 = e1_arr
    cdef double[:, ::1] e2 = e2_arr
    cdef double[:, ::1] n1 = n1_arr
    cdef double[:, ::1] n2 = n2_arr
    cdef double[:, ::1] tmp
    cdef Py_ssize_t p, s, l, nl, step, lo, hi
    cdef double ne1, ne2, dq1, dq2
    for p in range(n_pos):
        nl = <Py_ssize_t>(dt * Q2[p] / level_width)
        if nl > L - 1:
            nl = L - 1
        e1[p, nl] = dt * Q1[p]
        e2[p, nl] = dt * Q2[p]
    with nogil:
        for step in range(1, n_steps):
            n1[:, :] = -1.0
            n2[:, :] = 0.0
            for p in range(n_pos):
                dq1 = dt * Q1[p]
                dq2 = dt * Q2[p]
                lo = p - reach
                if lo < 0:
                    lo = 0
                hi = p + reach
                if hi > n_pos - 1:
                    hi = n_pos - 1
                for s in range(lo, hi + 1):
                    for l in range(L):
                        if e1[s, l] < 0.0:
                            continue
                        ne1 = e1[s, l] + dq1
                        ne2 = e2[s, l] + dq2
                        nl = <Py_ssize_t>(ne2 / level_width)
                        if nl > L - 1:
                            nl = L - 1
                        if ne1 > n1[p, nl]:
                            n1[p, nl] = ne1
                            n2[p, nl] = ne2
                            parents[step, p, nl] = <int>(s * L + l)
            tmp = e1
            e1 = n1
            n1 = tmp
            tmp = e2
            e2 = n2
            n2 = tmp
    return np.asarray(e1), np.asarray(e2), parents_arr
