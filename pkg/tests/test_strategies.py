import numpy as np
import pytest

from adaptseg.image_io import image_from_array
from adaptseg.partition import AxisCut, Partition, SignCut
from adaptseg.strategies import (BestInFamily, OverallBest,
                                 best_cut_in_family, best_cut_overall,
                                 evaluate)
from oracles import delta_j_direct, lambdas_for_all_masks

from conftest import random_image


def single(arr):
    img = image_from_array(np.asarray(arr, dtype=np.float64))
    return img, Partition.single_region(img)


def test_family_two_pixel_example():
    a, b = 30.0, 70.0
    img, part = single([[a, b]])
    cand = best_cut_in_family(img, part, 0, BestInFamily("all"), (0,))
    assert cand.cut == AxisCut("vertical", 1)
    assert cand.delta_j == pytest.approx(0.25 * (a - b) ** 2, rel=1e-12)
    assert cand.delta_j == pytest.approx(
        delta_j_direct([img.planes[0]], [1, 0]), rel=1e-12)


def test_family_constant_region():
    img, part = single([[5.0, 5.0], [5.0, 5.0]])
    cand = best_cut_in_family(img, part, 0, BestInFamily("all"), (0,))
    assert cand.delta_j == 0.0
    assert cand.cut is None


def test_family_checkerboard_blindness():
    img, part = single([[10.0, 200.0], [200.0, 10.0]])
    cand = best_cut_in_family(img, part, 0, BestInFamily("all"), (0,))
    assert cand.delta_j == 0.0  # both axis cuts have equal side means
    assert cand.cut is None
    overall = best_cut_overall(img, part, 0, (0,))
    assert overall.delta_j > 0.0  # the sign cut still sees the structure


def test_family_picks_true_boundary():
    arr = np.full((8, 8), 20.0)
    arr[:, 5:] = 220.0
    img, part = single(arr)
    cand = best_cut_in_family(img, part, 0, BestInFamily("all"), (0,))
    assert cand.cut == AxisCut("vertical", 5)
    assert cand.delta_j == pytest.approx(
        delta_j_direct([img.planes[0]],
                       (np.arange(64) % 8 < 5).astype(np.uint8)),
        rel=1e-12)


def test_family_exhaustive_against_brute_force(rng):
    img = random_image(rng, 7, 5, 3)
    part = Partition.single_region(img)
    cand = best_cut_in_family(img, part, 0, BestInFamily("all"), (0, 1, 2))
    best = -1.0
    best_cut = None
    n = 35
    cols = np.arange(n) % 7
    rows = np.arange(n) // 7
    for pos in range(1, 7):
        mask = (cols < pos).astype(np.uint8)
        dj = delta_j_direct(img.planes, mask)
        if dj > best:
            best, best_cut = dj, AxisCut("vertical", pos)
    for pos in range(1, 5):
        mask = (rows < pos).astype(np.uint8)
        dj = delta_j_direct(img.planes, mask)
        if dj > best:
            best, best_cut = dj, AxisCut("horizontal", pos)
    assert cand.cut == best_cut
    assert cand.delta_j == pytest.approx(best, rel=1e-9)


def test_family_midpoints_mode(rng):
    img = random_image(rng, 8, 6, 1)
    part = Partition.single_region(img)
    cand = best_cut_in_family(img, part, 0, BestInFamily("midpoints"), (0,))
    assert cand.cut in (AxisCut("vertical", 4), AxisCut("horizontal", 3))
    dv = delta_j_direct([img.planes[0]],
                        (np.arange(48) % 8 < 4).astype(np.uint8))
    dh = delta_j_direct([img.planes[0]],
                        (np.arange(48) // 8 < 3).astype(np.uint8))
    want = AxisCut("vertical", 4) if dv >= dh else AxisCut("horizontal", 3)
    assert cand.cut == want
    assert cand.delta_j == pytest.approx(max(dv, dh), rel=1e-9)


def test_family_tie_prefers_smaller_position():
    from adaptseg.indicators import indicators_for_cut

    # mirror-symmetric row: cuts at 1 and 3 tie, 2 scores zero
    img, part = single([[10.0, 0.0, 0.0, 10.0]])
    cand = best_cut_in_family(img, part, 0, BestInFamily("all"), (0,))
    assert cand.cut == AxisCut("vertical", 1)
    mirrored = indicators_for_cut(img, part, 0, AxisCut("vertical", 3), (0,))
    assert mirrored.delta_j == pytest.approx(cand.delta_j, rel=1e-12)
    assert cand.delta_j > 0.0


def test_family_tie_prefers_vertical():
    from adaptseg.indicators import indicators_for_cut

    # transpose-symmetric grid: the two midline cuts tie
    img, part = single([[0.0, 5.0], [5.0, 10.0]])
    cand = best_cut_in_family(img, part, 0, BestInFamily("all"), (0,))
    assert cand.cut == AxisCut("vertical", 1)
    other = indicators_for_cut(img, part, 0, AxisCut("horizontal", 1), (0,))
    assert other.delta_j == pytest.approx(cand.delta_j, rel=1e-12)
    assert cand.delta_j == 12.5


def test_overall_examples():
    img, part = single([[0.0, 0.0, 10.0, 10.0]])
    cand = best_cut_overall(img, part, 0, (0,))
    assert cand.cut == SignCut(0)
    assert cand.delta_j == 50.0
    assert cand.lambda_star == (20.0,)
    assert cand.channel == 0


def test_overall_only_green_varies(rng):
    arr = np.zeros((4, 4, 3))
    arr[..., 0] = 80.0
    arr[..., 2] = 10.0
    arr[..., 1] = rng.integers(0, 256, (4, 4)).astype(np.float64)
    img = image_from_array(arr)
    part = Partition.single_region(img)
    cand = best_cut_overall(img, part, 0, (0, 1, 2))
    assert cand.channel == 1
    assert cand.lambda_star[0] == 0.0 and cand.lambda_star[2] == 0.0
    assert cand.delta_j > 0.0


def test_overall_constant_region():
    img, part = single([[3.0, 3.0], [3.0, 3.0]])
    cand = best_cut_overall(img, part, 0, (0,))
    assert cand.delta_j == 0.0
    assert cand.cut is None


def test_overall_lambda_matches_enumeration(rng):
    for _ in range(5):
        p = int(rng.integers(2, 13))
        vals = rng.integers(0, 256, p).astype(np.float64)
        if vals.min() == vals.max():
            continue
        img, part = single(vals.reshape(1, -1))
        cand = best_cut_overall(img, part, 0, (0,))
        _, lams = lambdas_for_all_masks(vals)
        assert cand.lambda_star[0] == pytest.approx(
            np.abs(lams).max(), rel=1e-12)


def test_overall_positive_whenever_nonconstant(rng):
    for _ in range(20):
        img = random_image(rng, int(rng.integers(2, 9)), int(rng.integers(1, 9)), 3)
        part = Partition.single_region(img)
        stats = part.regions[0]
        cand = best_cut_overall(img, part, 0, (0, 1, 2))
        nonconstant = any(not stats.constant_in(k) for k in range(3))
        if nonconstant:
            assert cand.delta_j > 0.0
        else:
            assert cand.delta_j == 0.0


def test_evaluate_dispatch_and_determinism(rng):
    img = random_image(rng, 9, 9, 3)
    part = Partition.single_region(img)
    for strategy in (OverallBest(), BestInFamily("all"), BestInFamily("midpoints")):
        a = evaluate(img, part, 0, strategy, (0, 1, 2))
        b = evaluate(img, part, 0, strategy, (0, 1, 2))
        assert a == b
    with pytest.raises(TypeError):
        evaluate(img, part, 0, object(), (0, 1, 2))


def test_strategy_labels():
    assert BestInFamily("all").label == "family-all"
    assert BestInFamily("midpoints").label == "family-midpoints"
    assert OverallBest().label == "overall-best"
