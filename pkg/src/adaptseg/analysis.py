"""Quantitative analyses and synthetic test images.

quality_curve answers: if all 2**p - 2 non-empty 2-partitions of a
p-pixel region were equally likely, how often does the first-order
lower bound lambda**2/(2p) capture at least a fraction xi of the exact
indicator?  The capture ratio depends only on the side sizes,
ratio = 4*p_plus*p_minus / p**2, so the probability is a binomial tail
sum, computed here in exact integer arithmetic.

The generators build flat-color images whose segmentations are known in
advance: a 4-color scene (background plus rectangle, disc, triangle)
and a 7-color variant with one low-contrast square inclusion inside
each shape.  Together with a seeded noise generator they cover the
reference runs used by tests and benchmarks.
"""

import math
from dataclasses import dataclass

import numpy as np

from .image_io import image_from_array


@dataclass(frozen=True)
class QualityCurve:
    p: int
    points: tuple  # of (xi, probability)


def quality_probability(p, xi):
    """Pr{4*p_plus*p_minus/p**2 >= xi} over uniform non-empty 2-partitions.

    Exact: integer binomial sums with a single rounding in the final
    division.
    """
    if p < 2:
        raise ValueError("region size must be at least 2")
    favorable = 0
    for p_plus in range(1, p):
        if 4 * p_plus * (p - p_plus) >= xi * (p * p):
            favorable += math.comb(p, p_plus)
    return favorable / (2 ** p - 2)


def quality_curve(p, xi_grid):
    points = tuple((float(xi), quality_probability(p, xi)) for xi in xi_grid)
    return QualityCurve(p, points)


def monte_carlo_quality(p, xi, samples, seed=0):
    """Monte-Carlo estimate of quality_probability with its standard error.

    Side sizes of uniform random non-empty 2-partitions are binomial,
    conditioned away from the empty sides by rejection.
    """
    if p < 2:
        raise ValueError("region size must be at least 2")
    rng = np.random.default_rng(seed)
    threshold = xi * (p * p)
    favorable = 0
    got = 0
    while got < samples:
        batch = rng.binomial(p, 0.5, size=max(1024, samples - got))
        batch = batch[(batch > 0) & (batch < p)]
        if batch.size > samples - got:
            batch = batch[: samples - got]
        favorable += int(np.count_nonzero(4 * batch * (p - batch) >= threshold))
        got += batch.size
    estimate = favorable / samples
    stderr = math.sqrt(max(estimate * (1.0 - estimate), 1e-12) / samples)
    return estimate, stderr


def write_quality_csv(path, curve):
    lines = ["xi,probability"]
    lines += [f"{xi:.9g},{prob:.9g}" for xi, prob in curve.points]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


SIMPLE_COLORS = (
    (240, 170, 200),  # background, pink
    (40, 160, 70),    # rectangle, green
    (250, 220, 40),   # disc, yellow
    (40, 80, 220),    # triangle, blue
)

INCLUSION_COLORS = (
    (60, 180, 90),    # inside the rectangle
    (230, 200, 60),   # inside the disc
    (60, 100, 200),   # inside the triangle
)


def _shape_masks(size):
    """Boolean masks of the three shapes on a size x size grid.

    The shapes live in disjoint bands of the image, so they cannot
    overlap at any size.
    """
    r = np.arange(size)[:, None]
    c = np.arange(size)[None, :]
    rect = ((r >= round(0.08 * size)) & (r < round(0.30 * size))
            & (c >= round(0.10 * size)) & (c < round(0.45 * size)))
    cy, cx, rad = 0.22 * size, 0.72 * size, 0.14 * size
    disc = (r - cy) ** 2 + (c - cx) ** 2 <= rad * rad
    # triangle with apex up at (0.58, 0.50) and base corners at
    # (0.92, 0.25) and (0.92, 0.75), in (row, col) fractions
    p0 = (0.58 * size, 0.50 * size)
    p1 = (0.92 * size, 0.25 * size)
    p2 = (0.92 * size, 0.75 * size)

    def half_plane(a, b):
        return (b[1] - a[1]) * (r - a[0]) - (b[0] - a[0]) * (c - a[1])

    s0, s1, s2 = half_plane(p0, p1), half_plane(p1, p2), half_plane(p2, p0)
    triangle = ((s0 >= 0) & (s1 >= 0) & (s2 >= 0)) | ((s0 <= 0) & (s1 <= 0) & (s2 <= 0))
    return rect, disc, triangle


def _inclusion_masks(size):
    r = np.arange(size)[:, None]
    c = np.arange(size)[None, :]

    def square(r0, r1, c0, c1):
        return ((r >= round(r0 * size)) & (r < round(r1 * size))
                & (c >= round(c0 * size)) & (c < round(c1 * size)))

    return (
        square(0.15, 0.21, 0.20, 0.26),  # in the rectangle
        square(0.19, 0.25, 0.69, 0.75),  # in the disc
        square(0.78, 0.84, 0.47, 0.53),  # in the triangle
    )


def _validate_colors(colors, expected):
    colors = tuple(tuple(int(v) for v in col) for col in colors)
    if len(colors) != expected:
        raise ValueError(f"expected {expected} colors, got {len(colors)}")
    if len(set(colors)) != expected:
        raise ValueError("colors must be pairwise distinct")
    for col in colors:
        if len(col) != 3 or not all(0 <= v <= 255 for v in col):
            raise ValueError(f"invalid 8-bit color {col}")
    return colors


def generate_simple(size=256, colors=None):
    """Flat 4-color test scene: background plus rectangle, disc, triangle."""
    if size < 16:
        raise ValueError("size must be at least 16")
    colors = _validate_colors(colors or SIMPLE_COLORS, 4)
    masks = _shape_masks(size)
    for i in range(len(masks)):
        for j in range(i + 1, len(masks)):
            if np.any(masks[i] & masks[j]):
                raise ValueError("shapes overlap")
    arr = np.empty((size, size, 3), dtype=np.float64)
    arr[:, :] = colors[0]
    for mask, color in zip(masks, colors[1:]):
        if not np.any(mask):
            raise ValueError(f"size {size} too small: a shape came out empty")
        arr[mask] = color
    return image_from_array(arr)


def generate_perturbed(size=256, colors=None):
    """The 4-color scene plus a small low-contrast square inclusion inside
    each shape: 7 distinct colors total."""
    colors = _validate_colors(colors or SIMPLE_COLORS + INCLUSION_COLORS, 7)
    img = generate_simple(size, colors[:4])
    arr = np.stack([p.reshape(size, size) for p in img.planes], axis=2)
    shape_masks = _shape_masks(size)
    inclusion_masks = _inclusion_masks(size)
    for shape, inclusion, color in zip(shape_masks, inclusion_masks, colors[4:]):
        if not np.any(inclusion):
            raise ValueError(f"size {size} too small: an inclusion came out empty")
        if np.any(inclusion & ~shape):
            raise ValueError("inclusion leaks outside its shape")
        arr[inclusion] = color
    return image_from_array(arr)


def generate_noise(width, height, seed=0, channel_count=3):
    """Uniform random 8-bit image, reproducible from the seed."""
    if channel_count not in (1, 3):
        raise ValueError("channel_count must be 1 or 3")
    rng = np.random.default_rng(seed)
    if channel_count == 1:
        arr = rng.integers(0, 256, (height, width)).astype(np.float64)
    else:
        arr = rng.integers(0, 256, (height, width, 3)).astype(np.float64)
    return image_from_array(arr)
