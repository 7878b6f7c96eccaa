"""Run-length codec for masks on the worker wire protocol.

counts are alternating run lengths of 0s and 1s in row-major order,
always starting with the 0-run (possibly of length 0).
"""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from .types import RasterMask


def mask_to_rle(mask: RasterMask) -> dict:
    flat = mask.bits.reshape(-1).astype(np.int8)
    counts: list[int] = []
    if flat.size == 0:
        return {"size": [mask.height, mask.width], "counts": []}
    change = np.nonzero(np.diff(flat))[0] + 1
    bounds = np.concatenate(([0], change, [flat.size]))
    runs = np.diff(bounds)
    if flat[0] == 1:
        counts.append(0)
    counts.extend(int(r) for r in runs)
    return {"size": [mask.height, mask.width], "counts": counts}


def rle_to_mask(rle: dict) -> RasterMask:
    try:
        height, width = int(rle["size"][0]), int(rle["size"][1])
        counts = [int(c) for c in rle["counts"]]
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise ValidationError(f"malformed RLE mask: {exc}") from exc
    if any(c < 0 for c in counts):
        raise ValidationError("RLE counts must be non-negative")
    total = sum(counts)
    if total != width * height:
        raise ValidationError(
            f"RLE counts sum to {total}, expected {width * height}")
    flat = np.zeros(width * height, dtype=bool)
    pos = 0
    value = False
    for run in counts:
        if value:
            flat[pos:pos + run] = True
        pos += run
        value = not value
    return RasterMask(flat.reshape(height, width))
