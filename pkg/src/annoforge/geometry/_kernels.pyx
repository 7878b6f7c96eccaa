# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled raster kernel.

Must stay semantically identical to _kernels_py.pixel_counts: the same
IEEE-754 expressions in the same form, so both backends produce identical
count grids (the parity test in tests/test_geometry_backends.py enforces
this). Keep -ffp-contract=off in setup.py so the compiler cannot fuse the
multiply-add into an fma.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()


def pixel_counts(double[::1] vx, double[::1] vy, int width, int height,
                 int supersample):
    cdef int s = supersample
    cdef Py_ssize_t n = vx.shape[0]
    cdef Py_ssize_t W = width * s
    cdef Py_ssize_t H = height * s

    counts_arr = np.zeros((height, width), dtype=np.int32)
    cdef int[:, ::1] counts = counts_arr
    row_arr = np.zeros(W, dtype=np.uint8)
    cdef unsigned char[::1] row_hits = row_arr
    cross_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] cross_buf = cross_arr
    bound_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] bound_buf = bound_arr
    hlo_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] horiz_lo = hlo_arr
    hhi_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] horiz_hi = hhi_arr

    cdef Py_ssize_t r, e, i, j, k, ptr, ncross, nbound, nhoriz, i0
    cdef double y, x, x1, y1, x2, y2, t, xc, xb, tmp, lo, hi
    cdef int parity_bit

    for r in range(H):
        y = (r + 0.5) / s
        ncross = 0
        nbound = 0
        nhoriz = 0
        for e in range(n):
            x1 = vx[e]
            y1 = vy[e]
            if e + 1 < n:
                x2 = vx[e + 1]
                y2 = vy[e + 1]
            else:
                x2 = vx[0]
                y2 = vy[0]
            if y1 == y2:
                if y1 == y:
                    if x1 <= x2:
                        horiz_lo[nhoriz] = x1
                        horiz_hi[nhoriz] = x2
                    else:
                        horiz_lo[nhoriz] = x2
                        horiz_hi[nhoriz] = x1
                    nhoriz += 1
                continue
            t = (y - y1) / (y2 - y1)
            xc = x1 + t * (x2 - x1)
            if (y1 > y) != (y2 > y):
                cross_buf[ncross] = xc
                ncross += 1
            if (y1 if y1 < y2 else y2) <= y <= (y1 if y1 > y2 else y2):
                bound_buf[nbound] = xc
                nbound += 1

        # insertion sort; polygons are small
        for e in range(1, ncross):
            tmp = cross_buf[e]
            k = e
            while k > 0 and cross_buf[k - 1] > tmp:
                cross_buf[k] = cross_buf[k - 1]
                k -= 1
            cross_buf[k] = tmp

        # parity sweep: crossings strictly right of the sample toggle parity
        ptr = 0
        for i in range(W):
            x = (i + 0.5) / s
            while ptr < ncross and cross_buf[ptr] <= x:
                ptr += 1
            row_hits[i] = <unsigned char>((ncross - ptr) & 1)

        # boundary samples on non-horizontal edges
        for k in range(nbound):
            xb = bound_buf[k]
            i0 = <Py_ssize_t>floor(xb * s)
            for i in range(i0 - 1, i0 + 2):
                if 0 <= i < W and (i + 0.5) / s == xb:
                    row_hits[i] = 1

        # boundary samples on horizontal edges at this exact row
        for k in range(nhoriz):
            lo = horiz_lo[k]
            hi = horiz_hi[k]
            for i in range(W):
                x = (i + 0.5) / s
                if lo <= x <= hi:
                    row_hits[i] = 1

        j = r // s
        for i in range(W):
            if row_hits[i]:
                counts[j, i // s] += 1

    return counts_arr
