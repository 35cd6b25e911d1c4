"""Numpy implementations of the per-region pixel kernels.

These are the fallback used when the compiled extension is unavailable
(or when ``ADAPTSEG_KERNELS=python`` forces them).  Both backends must
agree exactly on integer-valued accumulations; sums of absolute
deviations may differ in the last bits because the summation order
differs.
"""

import numpy as np

BACKEND_NAME = "python"


def stats_1d(plane, idx):
    """Return (sum, sum of squares, min, max) of plane values at idx."""
    v = plane[idx]
    return float(v.sum()), float(v @ v), float(v.min()), float(v.max())


def abs_dev_sum(plane, idx, mean):
    """Sum of |mean - plane[i]| over the pixels in idx."""
    return float(np.abs(plane[idx] - mean).sum())


def sign_mask(plane, idx, mean):
    """uint8 mask aligned with idx: 1 where mean - plane[i] >= 0."""
    return (plane[idx] <= mean).astype(np.uint8)


def masked_sum(plane, idx, mask):
    """Sum of plane values at idx positions where mask is set."""
    return float(plane[idx[mask.view(np.bool_)]].sum())


def bbox(idx, width):
    """Bounding box (r0, r1, c0, c1), inclusive, of the pixels in idx."""
    rows = idx // width
    cols = idx - rows * width
    return int(rows.min()), int(rows.max()), int(cols.min()), int(cols.max())


def coord_counts(idx, width, axis, lo, nbins):
    """Pixel count per row (axis 0) or column (axis 1) bin, offset by lo."""
    coord = idx // width if axis == 0 else idx % width
    return np.bincount(coord - lo, minlength=nbins).astype(np.int64)


def coord_sums(plane, idx, width, axis, lo, nbins):
    """Per-row/column sums of plane values for the pixels in idx."""
    coord = idx // width if axis == 0 else idx % width
    return np.bincount(coord - lo, weights=plane[idx], minlength=nbins)
