# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled shell-resolved mode sums; same contract as ``_modesums_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos

cnp.import_array()


def shell_terms(int n0, double kappa, double a, int N):
    cdef double R = n0 / kappa
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((N + 1, 10))
    cdef double[:, ::1] o = out
    cdef double cp = cos(a * kappa), sp = sin(a * kappa)
    cdef double k, g, c, sn, sgp, sgm, sign
    cdef int s, t
    for s in range(N + 1):
        if s == n0:
            continue
        for t in range(2):
            if t == 1 and s == 0:
                continue
            sign = 1.0 if t == 0 else -1.0
            k = sign * s / R
            g = 1.0 / (kappa * kappa - k * k)
            c = cos(a * k)
            sn = sin(a * k)
            sgp = (sn * cp - c * sp) / (k - kappa)
            sgm = (sn * cp + c * sp) / (k + kappa)
            o[s, 0] += g * c * c
            o[s, 1] += g * c * sn
            o[s, 2] += g * sn * sn
            o[s, 3] += sgp * g * c
            o[s, 4] += sgp * g * sn
            o[s, 5] += sgm * g * c
            o[s, 6] += sgm * g * sn
            o[s, 7] += sgp * g * sgp
            o[s, 8] += sgp * g * sgm
            o[s, 9] += sgm * g * sgm
    return out
