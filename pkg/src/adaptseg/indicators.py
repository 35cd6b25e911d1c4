"""Refinement indicators for candidate region cuts.

Two routes to the value of a cut:

* the exact indicator, the decrease of the least-squares misfit J if the
  cut is committed and both sides get their optimal (mean) color;
* the first-order indicator lambda, the difference of misfit-gradient
  sums over the two sides, evaluated at the current region mean.

For any 2-partition of a region of p pixels into non-empty sides of
p_plus and p_minus pixels, the two are tied per channel by

    delta_j = lambda**2 * p / (8 * p_plus * p_minus)

and since p = p_plus + p_minus this is never below lambda**2 / (2*p).
The two routes are computed independently here so the relation can be
verified rather than assumed.

The per-channel 2-partition maximizing |lambda| is analytic: put every
pixel whose value does not exceed the region mean in R+ ("sign cut"),
giving lambda_star = sum |mean - d_i| over the region.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels


@dataclass(frozen=True)
class IndicatorResult:
    """Indicators of one cut: total exact value over the scored channels,
    per-channel first-order values, and the side sizes."""

    delta_j: float
    lambda_per_channel: tuple
    p_plus: int
    p_minus: int


def exact_indicator_channel(p_plus, s_plus, p_minus, s_minus):
    """Exact misfit decrease in one channel from side counts and sums.

    Equals (p_plus*p_minus)/(2p) * (m_plus - m_minus)^2.  With integral
    sums (8-bit data) the value is computed as a ratio of exact integers,
    rounded once.
    """
    if p_plus <= 0 or p_minus <= 0:
        raise ValueError("both sides of a cut must be non-empty")
    if s_plus.is_integer() and s_minus.is_integer():
        t = int(s_plus) * p_minus - int(s_minus) * p_plus
        num = t * t
        den = 2 * (p_plus + p_minus) * p_plus * p_minus
        if num == 0:
            return 0.0
        if num.bit_length() <= 53 and den.bit_length() <= 53:
            return num / float(den)
        return num / den
    p = p_plus + p_minus
    diff = s_plus / p_plus - s_minus / p_minus
    return (p_plus * p_minus) / (2.0 * p) * diff * diff


def exact_indicator(parent, p_plus, sums_plus, channels):
    """Exact indicator of a cut over a channel subset.

    parent is the region's RegionStats; the R- side sums follow from the
    parent sums, which keeps one pixel pass per evaluation.
    """
    p_minus = parent.pixel_count - p_plus
    total = 0.0
    for k in channels:
        total += exact_indicator_channel(
            p_plus, sums_plus[k], p_minus, parent.sum_d[k] - sums_plus[k]
        )
    return total


def first_order_indicator(img, partition, region_id, cut, channel):
    """First-order indicator: gradient sum over R+ minus gradient sum
    over R-, the gradient of the misfit at the current mean color being
    mean - d_i at pixel i.

    The sums are evaluated as p_side * mean - sum_d(side) (the mean
    factored out of each side), which is the same gradient sum with one
    rounding per side instead of one per pixel.
    """
    stats = partition.regions[region_id]
    idx = partition.region_pixels(region_id)
    mask = partition.cut_mask(region_id, cut, img)
    p_plus = int(mask.sum())
    p_minus = stats.pixel_count - p_plus
    s_plus = kernels.masked_sum(img.planes[channel], idx, mask)
    s_minus = stats.sum_d[channel] - s_plus
    mean = stats.mean(channel)
    return mean * (p_plus - p_minus) + (s_minus - s_plus)


def indicators_for_cut(img, partition, region_id, cut, channels):
    """Evaluate both indicator routes for one cut.

    Returns an IndicatorResult with delta_j summed over the scored
    channels and one lambda per scored channel.  Raises ValueError if the
    cut leaves a side empty.
    """
    stats = partition.regions[region_id]
    idx = partition.region_pixels(region_id)
    mask = partition.cut_mask(region_id, cut, img)
    p_plus = int(mask.sum())
    p_minus = stats.pixel_count - p_plus
    if p_plus == 0 or p_minus == 0:
        raise ValueError("cut leaves one side empty")
    delta = 0.0
    lambdas = []
    mean_diff = p_plus - p_minus
    for k in channels:
        s_plus = kernels.masked_sum(img.planes[k], idx, mask)
        s_minus = stats.sum_d[k] - s_plus
        delta += exact_indicator_channel(p_plus, s_plus, p_minus, s_minus)
        lambdas.append(stats.mean(k) * mean_diff + (s_minus - s_plus))
    return IndicatorResult(delta, tuple(lambdas), p_plus, p_minus)


def optimal_sign_cut(img, partition, region_id, channel):
    """The analytic best cut for one channel.

    Returns (SignCut, lambda_star) with lambda_star = sum |mean - d_i|.
    A region constant in the channel yields lambda_star = 0.0; the cut is
    then invalid (it would leave R- empty) and must not be applied.
    """
    from .partition import SignCut

    stats = partition.regions[region_id]
    cut = SignCut(channel)
    if stats.constant_in(channel):
        return cut, 0.0
    idx = partition.region_pixels(region_id)
    lam = kernels.abs_dev_sum(img.planes[channel], idx, stats.mean(channel))
    return cut, lam


def best_channel(lambda_stars):
    """Index of the largest lambda_star; ties go to the earliest channel
    (R before G before B)."""
    best = 0
    for k in range(1, len(lambda_stars)):
        if lambda_stars[k] > lambda_stars[best]:
            best = k
    return best
