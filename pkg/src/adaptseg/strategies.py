"""Cutting strategies: produce the best candidate cut for one region.

Two strategies are provided.  BestInFamily scores every axis-aligned
cut of the region's bounding box by its exact indicator and keeps the
winner; it can go blind on data whose row and column side-means all
coincide (a 2x2 checkerboard is the minimal example).  OverallBest uses
the analytic sign cut, which maximizes the first-order indicator over
all 2-partitions of the region and is never blind: any region that
varies in a scored channel yields a positive exact indicator.

Tie rules are fixed so identical inputs give identical candidates:
family cuts prefer vertical over horizontal and then the smaller
position; the channel picked for a sign cut is the earliest among
equals (R, G, B).
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from . import indicators
from .partition import AxisCut, SignCut


@dataclass(frozen=True)
class BestInFamily:
    """Exhaustive exact scoring of axis cuts; positions is "all" for every
    interior bounding-box boundary or "midpoints" for the two half-way
    cuts only."""

    positions: str = "all"

    @property
    def label(self):
        return "family-all" if self.positions == "all" else "family-midpoints"


@dataclass(frozen=True)
class OverallBest:
    label = "overall-best"


@dataclass(frozen=True)
class CandidateSplit:
    """Best cut found for a region; delta_j is the exact indicator summed
    over the scored channels.  delta_j == 0.0 means the region is
    unsplittable under the strategy and cut is None.  channel is the
    index whose sign defines a SignCut, None for family cuts."""

    region: int
    cut: object
    delta_j: float
    lambda_star: tuple
    channel: int


def _axis_best(img, partition, region_id, axis, lo, hi, channels, midpoint_only):
    """Best cut along one axis; returns (delta_j, position) or None.

    Side counts and sums per cut position come from prefix sums of
    per-row (or per-column) bins, one pixel pass per channel.
    """
    if hi <= lo:
        return None
    stats = partition.regions[region_id]
    idx = partition.region_pixels(region_id)
    p = stats.pixel_count
    nbins = hi - lo + 1
    axis_code = 0 if axis == "horizontal" else 1
    counts = kernels.coord_counts(idx, partition.width, axis_code, lo, nbins)
    p_plus = np.cumsum(counts)[:-1]  # pixels strictly before each boundary
    p_minus = p - p_plus
    valid = (p_plus > 0) & (p_minus > 0)
    if not np.any(valid):
        return None
    delta = np.zeros(nbins - 1, dtype=np.float64)
    for k in channels:
        sums = kernels.coord_sums(img.planes[k], idx, partition.width,
                                  axis_code, lo, nbins)
        s_plus = np.cumsum(sums)[:-1]
        s_minus = stats.sum_d[k] - s_plus
        t = s_plus * p_minus - s_minus * p_plus
        with np.errstate(divide="ignore", invalid="ignore"):
            delta += np.where(valid, t * t / (2.0 * p * p_plus * p_minus), 0.0)
    delta[~valid] = -1.0
    if midpoint_only:
        pos = lo + (hi - lo + 1) // 2
        j = pos - lo - 1
        if not valid[j]:
            return None
        return float(delta[j]), pos
    j = int(np.argmax(delta))  # first occurrence wins ties
    if delta[j] < 0.0:
        return None
    return float(delta[j]), lo + 1 + j


def best_cut_in_family(img, partition, region_id, config, channels):
    """Exhaustively score the axis-cut family and keep the exact-indicator
    maximizer.  Returns an unsplittable candidate (delta_j = 0) when no
    valid cut exists or every cut leaves the side means equal."""
    r0, r1, c0, c1 = partition.bbox(region_id)
    midpoint_only = config.positions == "midpoints"
    best = None
    best_axis = None
    for axis, lo, hi in (("vertical", c0, c1), ("horizontal", r0, r1)):
        found = _axis_best(img, partition, region_id, axis, lo, hi,
                           channels, midpoint_only)
        if found is None:
            continue
        if best is None or found[0] > best[0]:
            best = found
            best_axis = axis
    if best is None or best[0] <= 0.0:
        return CandidateSplit(region_id, None, 0.0, None, None)
    return CandidateSplit(region_id, AxisCut(best_axis, best[1]),
                          best[0], None, None)


def best_cut_overall(img, partition, region_id, channels):
    """Analytic candidate: sign cut in the channel with the largest
    lambda_star, scored by its exact indicator over all given channels."""
    stats = partition.regions[region_id]
    lams = []
    for k in channels:
        _, lam = indicators.optimal_sign_cut(img, partition, region_id, k)
        lams.append(lam)
    k_best = indicators.best_channel(lams)
    if lams[k_best] <= 0.0:
        return CandidateSplit(region_id, None, 0.0, tuple(lams), None)
    channel = channels[k_best]
    cut = SignCut(channel)
    idx = partition.region_pixels(region_id)
    mask = partition.cut_mask(region_id, cut, img)
    p_plus = int(mask.sum())
    if p_plus == 0 or p_plus == stats.pixel_count:
        # Only reachable with non-integral data when the rounded mean
        # collides with the channel extremum; fall back to a strict
        # comparison so the non-constant region still splits.
        plane_vals = img.planes[channel][idx]
        mask = (plane_vals < stats.mean(channel)).astype(np.uint8)
        p_plus = int(mask.sum())
        if p_plus == 0 or p_plus == stats.pixel_count:
            return CandidateSplit(region_id, None, 0.0, tuple(lams), None)
        from .partition import ExplicitMask

        cut = ExplicitMask(mask)
    sums_plus = {k: kernels.masked_sum(img.planes[k], idx, mask) for k in channels}
    delta = indicators.exact_indicator(stats, p_plus, sums_plus, channels)
    return CandidateSplit(region_id, cut, delta, tuple(lams), channel)


def evaluate(img, partition, region_id, strategy, channels):
    """Dispatch to the configured strategy."""
    if isinstance(strategy, OverallBest):
        return best_cut_overall(img, partition, region_id, channels)
    if isinstance(strategy, BestInFamily):
        return best_cut_in_family(img, partition, region_id, strategy, channels)
    raise TypeError(f"unknown cutting strategy {strategy!r}")
