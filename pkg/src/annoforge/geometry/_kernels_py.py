"""Numpy fallback for the raster kernel.

Semantics (shared bit-for-bit with the compiled kernel in _kernels.pyx):

Sample points form a regular sub-pixel grid: for supersample s, sample
(i, r) sits at x=(i+0.5)/s, y=(r+0.5)/s with i < width*s, r < height*s.
A sample is inside when the even-odd crossing parity is odd -- counting
edge/scanline intersections strictly to the right of the sample -- or when
it lies exactly on a polygon edge (boundary samples count as inside).
pixel_counts returns, per pixel, how many of its s*s samples are inside.

Determinism note: both kernels evaluate the same IEEE-754 expressions in
the same form (t = (y-y1)/(y2-y1); xc = x1 + t*(x2-x1)), so their outputs
are identical arrays, not merely close ones.
"""

from __future__ import annotations

import numpy as np

# cap on the (rows x edges x samples) broadcast so memory stays bounded
_CHUNK_ELEMS = 32_000_000


def pixel_counts(vx: np.ndarray, vy: np.ndarray, width: int, height: int,
                 supersample: int) -> np.ndarray:
    s = supersample
    W = width * s
    H = height * s
    n = len(vx)

    x1 = np.asarray(vx, dtype=np.float64)
    y1 = np.asarray(vy, dtype=np.float64)
    x2 = np.roll(x1, -1)
    y2 = np.roll(y1, -1)

    xs = (np.arange(W, dtype=np.float64) + 0.5) / s
    ys = (np.arange(H, dtype=np.float64) + 0.5) / s

    nonhoriz = y1 != y2
    denom = np.where(nonhoriz, y2 - y1, 1.0)
    ymin = np.minimum(y1, y2)
    ymax = np.maximum(y1, y2)

    hits = np.zeros((H, W), dtype=bool)

    rows_per_chunk = max(1, _CHUNK_ELEMS // (max(n, 1) * W))
    for r0 in range(0, H, rows_per_chunk):
        r1 = min(H, r0 + rows_per_chunk)
        Y = ys[r0:r1, None]                                   # (R, 1)
        T = (Y - y1[None, :]) / denom[None, :]                # (R, n)
        XC = x1[None, :] + T * (x2[None, :] - x1[None, :])    # (R, n)
        CROSS = (y1[None, :] > Y) != (y2[None, :] > Y)        # (R, n)
        # crossings strictly right of the sample toggle parity
        cross_x = np.where(CROSS, XC, -np.inf)
        gt = cross_x[:, :, None] > xs[None, None, :]          # (R, n, W)
        parity = gt.sum(axis=1, dtype=np.int64) & 1
        hits[r0:r1] |= parity.astype(bool)

        # samples exactly on a non-horizontal edge are inside
        SPAN = nonhoriz[None, :] & (ymin[None, :] <= Y) & (Y <= ymax[None, :])
        rr, ee = np.nonzero(SPAN)
        if rr.size:
            xb = XC[rr, ee]
            i0 = np.floor(xb * s).astype(np.int64)
            for delta in (-1, 0, 1):
                i = i0 + delta
                ok = (i >= 0) & (i < W) & ((i + 0.5) / s == xb)
                hits[r0 + rr[ok], i[ok]] = True

    # samples on a horizontal edge lying exactly on a sample row
    for e in np.nonzero(~nonhoriz)[0]:
        ye = y1[e]
        r0f = np.floor(ye * s)
        for delta in (-1.0, 0.0, 1.0):
            r = int(r0f + delta)
            if 0 <= r < H and (r + 0.5) / s == ye:
                lo, hi = (x1[e], x2[e]) if x1[e] <= x2[e] else (x2[e], x1[e])
                hits[r, (xs >= lo) & (xs <= hi)] = True

    return hits.reshape(height, s, width, s).sum(axis=(1, 3)).astype(np.int32)
