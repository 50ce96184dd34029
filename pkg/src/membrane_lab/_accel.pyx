# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel for the evolver's hot loop (see _accel_np for the contract)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

BACKEND = "cython"


def membrane_rhs(
    double[:, ::1] u,
    double[:, ::1] w,
    double[::1] bF,
    double[::1] bFp,
    double[::1] bFpp,
    double a,
    double b,
    double sign,
    double[::1] x2,
    double h1,
    double h2,
    int scheme_order,
):
    cdef Py_ssize_t n1 = u.shape[0]
    cdef Py_ssize_t n2 = u.shape[1]
    out_arr = np.zeros((n1, n2), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double ux1, ux2, ux1x1, ux2x2, ux1x2, wx1, wx2
    cdef double coef, F, Fp, Fpp, btt
    cdef double vt, vx1, vx2, vtx1, vtx2, vx1x1, vx1x2, vx2x2
    cdef double g2, delta, mtt, num, tg, speed
    cdef double r12h1 = 1.0 / (12.0 * h1)
    cdef double r12h2 = 1.0 / (12.0 * h2)
    cdef double r12h1h1 = 1.0 / (12.0 * h1 * h1)
    cdef double r12h2h2 = 1.0 / (12.0 * h2 * h2)
    cdef double r144 = 1.0 / (144.0 * h1 * h2)
    cdef double r2h1 = 1.0 / (2.0 * h1)
    cdef double r2h2 = 1.0 / (2.0 * h2)
    cdef double rh1h1 = 1.0 / (h1 * h1)
    cdef double rh2h2 = 1.0 / (h2 * h2)
    cdef double r4h1h2 = 1.0 / (4.0 * h1 * h2)
    cdef double min_delta = 1e300
    cdef double max_speed = 0.0
    cdef double c1, c2, c3, c4

    for i in range(2, n1 - 2):
        F = bF[i]
        Fp = bFp[i]
        Fpp = bFpp[i]
        for j in range(2, n2 - 2):
            if scheme_order == 4:
                ux1 = (u[i - 2, j] - 8.0 * u[i - 1, j] + 8.0 * u[i + 1, j] - u[i + 2, j]) * r12h1
                ux2 = (u[i, j - 2] - 8.0 * u[i, j - 1] + 8.0 * u[i, j + 1] - u[i, j + 2]) * r12h2
                ux1x1 = (
                    -u[i - 2, j] + 16.0 * u[i - 1, j] - 30.0 * u[i, j]
                    + 16.0 * u[i + 1, j] - u[i + 2, j]
                ) * r12h1h1
                ux2x2 = (
                    -u[i, j - 2] + 16.0 * u[i, j - 1] - 30.0 * u[i, j]
                    + 16.0 * u[i, j + 1] - u[i, j + 2]
                ) * r12h2h2
                c1 = u[i - 2, j - 2] - 8.0 * u[i - 2, j - 1] + 8.0 * u[i - 2, j + 1] - u[i - 2, j + 2]
                c2 = u[i - 1, j - 2] - 8.0 * u[i - 1, j - 1] + 8.0 * u[i - 1, j + 1] - u[i - 1, j + 2]
                c3 = u[i + 1, j - 2] - 8.0 * u[i + 1, j - 1] + 8.0 * u[i + 1, j + 1] - u[i + 1, j + 2]
                c4 = u[i + 2, j - 2] - 8.0 * u[i + 2, j - 1] + 8.0 * u[i + 2, j + 1] - u[i + 2, j + 2]
                ux1x2 = (c1 - 8.0 * c2 + 8.0 * c3 - c4) * r144
                wx1 = (w[i - 2, j] - 8.0 * w[i - 1, j] + 8.0 * w[i + 1, j] - w[i + 2, j]) * r12h1
                wx2 = (w[i, j - 2] - 8.0 * w[i, j - 1] + 8.0 * w[i, j + 1] - w[i, j + 2]) * r12h2
            else:
                ux1 = (u[i + 1, j] - u[i - 1, j]) * r2h1
                ux2 = (u[i, j + 1] - u[i, j - 1]) * r2h2
                ux1x1 = (u[i + 1, j] - 2.0 * u[i, j] + u[i - 1, j]) * rh1h1
                ux2x2 = (u[i, j + 1] - 2.0 * u[i, j] + u[i, j - 1]) * rh2h2
                ux1x2 = (
                    u[i + 1, j + 1] - u[i + 1, j - 1] - u[i - 1, j + 1] + u[i - 1, j - 1]
                ) * r4h1h2
                wx1 = (w[i + 1, j] - w[i - 1, j]) * r2h1
                wx2 = (w[i, j + 1] - w[i, j - 1]) * r2h2

            coef = a * x2[j] + b
            btt = coef * Fpp
            vt = w[i, j] + sign * coef * Fp
            vx1 = ux1 + coef * Fp
            vx2 = ux2 + a * F
            vtx1 = wx1 + sign * btt
            vtx2 = wx2 + sign * a * Fp
            vx1x1 = ux1x1 + btt
            vx1x2 = ux1x2 + a * Fp
            vx2x2 = ux2x2

            g2 = vx1 * vx1 + vx2 * vx2
            delta = 1.0 + g2 - vt * vt
            mtt = 1.0 + g2
            num = (
                2.0 * (-vt * vx1 * vtx1 - vt * vx2 * vtx2 + vx1 * vx2 * vx1x2)
                + (vx1 * vx1 - delta) * vx1x1
                + (vx2 * vx2 - delta) * vx2x2
            )
            out[i, j] = -num / mtt - btt

            if delta < min_delta:
                min_delta = delta
            tg = fabs(vt) * sqrt(g2)
            speed = (tg + sqrt(tg * tg + mtt * (delta if delta > 0.0 else 0.0))) / mtt
            if speed > max_speed:
                max_speed = speed

    return out_arr, min_delta, max_speed
