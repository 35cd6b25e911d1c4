"""Pixel partitions with per-region sufficient statistics.

A Partition assigns every pixel a region id and keeps, for each region,
the per-channel statistics (count, sum, sum of squares, min, max) from
which means and least-squares misfits follow in O(1).  Splitting a
region recomputes child statistics from the pixels, so repeated splits
do not accumulate cancellation error.

Pixel values that came from 8-bit sources are whole numbers, and their
sums stay below 2**53 for any image this package targets, so sums and
sums of squares are exact integers stored in floats.  Misfits exploit
this: when the sums are integral the misfit is evaluated in exact
integer arithmetic with a single final rounding, which in particular
makes the misfit of a constant region exactly 0.0.
"""

import colorsys
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels


class InvalidCutError(ValueError):
    """A cutting that leaves one side of the region empty."""


@dataclass(frozen=True)
class AxisCut:
    """Half-plane cut: R+ gets rows (horizontal) or columns (vertical)
    with index < position."""

    axis: str  # "vertical" or "horizontal"
    position: int

    def describe(self):
        return f"{self.axis[0]}@{self.position}"


@dataclass(frozen=True)
class SignCut:
    """Cut by sign of the misfit gradient in one channel: pixel i goes to
    R+ iff mean - d_i >= 0, i.e. its value does not exceed the region mean."""

    channel: int

    def describe(self):
        return f"sign[{self.channel}]"


@dataclass(frozen=True, eq=False)
class ExplicitMask:
    """Arbitrary 2-partition given as a mask over the region's pixels in
    ascending pixel order; true (1) selects R+."""

    mask: np.ndarray

    def describe(self):
        return f"mask[{int(self.mask.sum())}+]"


def misfit_from_sums(count, sum_d, sum_d2):
    """Least-squares misfit of one channel: (1/2) * (sum d^2 - (sum d)^2 / p).

    Takes the exact integer route when both sums are whole numbers and
    small enough for the intermediate products to stay exact.
    """
    if sum_d.is_integer() and sum_d2.is_integer():
        s1 = int(sum_d)
        num = count * int(sum_d2) - s1 * s1
        if num <= 0:
            return 0.0
        if num.bit_length() <= 53:
            return num / (2.0 * count)
        return num / (2 * count)  # int/int division rounds once
    value = 0.5 * (sum_d2 - sum_d * sum_d / count)
    return value if value > 0.0 else 0.0


class RegionStats:
    """Per-region aggregates for every channel of the image."""

    __slots__ = ("pixel_count", "sum_d", "sum_d2", "min_d", "max_d", "misfit")

    def __init__(self, pixel_count, sum_d, sum_d2, min_d, max_d):
        self.pixel_count = pixel_count
        self.sum_d = sum_d  # tuple, one per channel
        self.sum_d2 = sum_d2
        self.min_d = min_d
        self.max_d = max_d
        self.misfit = sum(
            misfit_from_sums(pixel_count, sum_d[k], sum_d2[k])
            for k in range(len(sum_d))
        )

    def mean(self, channel):
        return self.sum_d[channel] / self.pixel_count

    def constant_in(self, channel):
        """True if every pixel has the same value in this channel (exact)."""
        return self.max_d[channel] == self.min_d[channel]

    @property
    def splittable(self):
        """True when the region has at least two pixels and varies in some
        channel, so a misfit-reducing cut exists."""
        if self.pixel_count < 2:
            return False
        return any(self.max_d[k] > self.min_d[k] for k in range(len(self.sum_d)))

    def misfit_channel(self, channel):
        return misfit_from_sums(
            self.pixel_count, self.sum_d[channel], self.sum_d2[channel]
        )


def stats_for_pixels(img, idx):
    """Compute RegionStats for the pixels listed in idx."""
    sums, sums2, mins, maxs = [], [], [], []
    for plane in img.planes:
        s1, s2, lo, hi = kernels.stats_1d(plane, idx)
        sums.append(s1)
        sums2.append(s2)
        mins.append(lo)
        maxs.append(hi)
    return RegionStats(len(idx), tuple(sums), tuple(sums2), tuple(mins), tuple(maxs))


class Partition:
    """Mutable pixel-to-region labeling over a fixed grid.

    Region ids are never reused: a split retires the parent id and
    assigns two fresh ids, R+ receiving the smaller.  Besides the label
    array the partition caches each region's pixel index array (ascending)
    and bounding box; index arrays are immutable once built and are
    shared by copies.
    """

    def __init__(self, width, height, labels, regions, pixels, next_id):
        self.width = width
        self.height = height
        self.labels = labels
        self.regions = regions  # id -> RegionStats
        self._pixels = pixels  # id -> int64 index array, ascending
        self._bbox = {}
        self.next_id = next_id

    @classmethod
    def single_region(cls, img):
        n = img.pixel_count
        labels = np.zeros(n, dtype=np.int64)
        idx = np.arange(n, dtype=np.int64)
        regions = {0: stats_for_pixels(img, idx)}
        return cls(img.width, img.height, labels, regions, {0: idx}, 1)

    @property
    def region_count(self):
        return len(self.regions)

    def region_pixels(self, region_id):
        return self._pixels[region_id]

    def bbox(self, region_id):
        """Row/column bounding box (r0, r1, c0, c1), inclusive."""
        box = self._bbox.get(region_id)
        if box is None:
            box = kernels.bbox(self._pixels[region_id], self.width)
            self._bbox[region_id] = box
        return box

    def total_misfit(self):
        """Sum of region misfits; equals the global least-squares misfit J
        at the optimal (mean) colors.  Exact summation."""
        return math.fsum(r.misfit for r in self.regions.values())

    def cut_mask(self, region_id, cut, img):
        """Mask over the region's pixels (ascending order), 1 = R+."""
        idx = self._pixels[region_id]
        if isinstance(cut, AxisCut):
            if cut.axis == "horizontal":
                coord = idx // self.width
            elif cut.axis == "vertical":
                coord = idx % self.width
            else:
                raise ValueError(f"unknown axis {cut.axis!r}")
            return (coord < cut.position).astype(np.uint8)
        if isinstance(cut, SignCut):
            mean = self.regions[region_id].mean(cut.channel)
            return kernels.sign_mask(img.planes[cut.channel], idx, mean)
        if isinstance(cut, ExplicitMask):
            mask = np.asarray(cut.mask, dtype=np.uint8)
            if mask.shape != idx.shape:
                raise ValueError("mask length does not match region size")
            return mask
        raise TypeError(f"unsupported cut {cut!r}")

    def split(self, region_id, cut, img):
        """Split a region; returns (id of R+, id of R-).

        Raises KeyError for an unknown region and InvalidCutError when the
        cut leaves one side empty.
        """
        idx = self._pixels[region_id]
        mask = self.cut_mask(region_id, cut, img)
        n_plus = int(mask.sum())
        if n_plus == 0 or n_plus == len(idx):
            raise InvalidCutError(
                f"cut {cut.describe()} leaves one side of region {region_id} empty"
            )
        keep = mask.view(np.bool_)
        idx_plus = idx[keep]
        idx_minus = idx[~keep]
        id_plus = self.next_id
        id_minus = self.next_id + 1
        self.next_id += 2
        self.labels[idx_plus] = id_plus
        self.labels[idx_minus] = id_minus
        del self.regions[region_id]
        del self._pixels[region_id]
        self._bbox.pop(region_id, None)
        self.regions[id_plus] = stats_for_pixels(img, idx_plus)
        self.regions[id_minus] = stats_for_pixels(img, idx_minus)
        self._pixels[id_plus] = idx_plus
        self._pixels[id_minus] = idx_minus
        return id_plus, id_minus

    def paint(self, img):
        """Per-pixel segmented colors: every pixel gets its region's mean.

        Returns one flat float64 plane per channel.
        """
        out = [np.empty(img.pixel_count, dtype=np.float64) for _ in img.planes]
        for region_id, stats in self.regions.items():
            idx = self._pixels[region_id]
            for k in range(len(out)):
                out[k][idx] = stats.mean(k)
        return out

    def copy(self):
        """Snapshot copy.  The label array is duplicated; pixel index arrays
        and stats are immutable and shared."""
        clone = Partition(
            self.width,
            self.height,
            self.labels.copy(),
            dict(self.regions),
            dict(self._pixels),
            self.next_id,
        )
        clone._bbox = dict(self._bbox)
        return clone

    def check_integrity(self):
        """Debug helper: verify label/point-set consistency and counts."""
        seen = 0
        for region_id, idx in self._pixels.items():
            if not np.all(self.labels[idx] == region_id):
                raise AssertionError(f"label mismatch for region {region_id}")
            if self.regions[region_id].pixel_count != len(idx):
                raise AssertionError(f"count mismatch for region {region_id}")
            seen += len(idx)
        if seen != self.labels.shape[0]:
            raise AssertionError("regions do not cover the pixel grid")


def _group_pixels(inverse, group_count):
    """Index arrays per group id from an inverse-index array, ascending."""
    order = np.argsort(inverse, kind="stable").astype(np.int64)
    counts = np.bincount(inverse, minlength=group_count)
    groups = np.split(order, np.cumsum(counts)[:-1])
    return groups


def superimpose(a, b, img):
    """Common refinement of two partitions of the same grid.

    Pixels share a region in the result iff they share regions in both
    inputs.  Fresh ids are assigned in lexicographic (a-label, b-label)
    order starting from 0.
    """
    if a.width != b.width or a.height != b.height:
        raise ValueError("partitions cover different grids")
    key = a.labels * np.int64(b.next_id) + b.labels
    uniq, inverse = np.unique(key, return_inverse=True)
    labels = inverse.astype(np.int64)
    groups = _group_pixels(inverse, len(uniq))
    regions = {}
    pixels = {}
    for region_id, idx in enumerate(groups):
        regions[region_id] = stats_for_pixels(img, idx)
        pixels[region_id] = idx
    return Partition(a.width, a.height, labels, regions, pixels, len(uniq))


def superimposed_region_count(partitions):
    """Number of regions in the common refinement, without building it."""
    if len(partitions) == 1:
        return partitions[0].region_count
    key = partitions[0].labels.astype(np.int64)
    for part in partitions[1:]:
        key = key * np.int64(part.next_id) + part.labels
    return int(np.unique(key).size)


def label_visualization(partition):
    """Distinct color per region id for label-map export.

    Returns an (n, 3) uint8 array.  Colors cycle hue by the golden ratio
    so neighboring ids get well-separated hues; purely cosmetic but
    deterministic.
    """
    n = partition.labels.shape[0]
    out = np.zeros((n, 3), dtype=np.uint8)
    for region_id in partition.regions:
        hue = (region_id * 0.6180339887498949) % 1.0
        r, g, b = colorsys.hsv_to_rgb(hue, 0.65, 0.95)
        idx = partition.region_pixels(region_id)
        out[idx, 0] = int(r * 255)
        out[idx, 1] = int(g * 255)
        out[idx, 2] = int(b * 255)
    return out
