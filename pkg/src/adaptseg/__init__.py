"""Adaptive image segmentation by greedy optimal region splitting.

The segmented image is piecewise constant: each region of a pixel
partition carries one color, chosen as the region mean, which minimizes
the least-squares misfit to the data for that partition.  Refinement
proceeds by splitting, at each iteration, the region whose best cut
yields the largest exact misfit decrease.  Regions may be cut either by
the best axis-aligned cut of a family, or analytically by the sign of
the misfit gradient, which maximizes the first-order indicator over all
possible 2-partitions of the region.
"""

from .engine import Segmentation, StopCriterion
from .image_io import ImageBuffer, load_image, save_image
from .strategies import BestInFamily, OverallBest

__version__ = "0.1.0"

__all__ = [
    "ImageBuffer",
    "load_image",
    "save_image",
    "Segmentation",
    "StopCriterion",
    "BestInFamily",
    "OverallBest",
    "__version__",
]
