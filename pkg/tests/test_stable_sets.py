import random
from fractions import Fraction

import pytest

from mdimlab import (
    block_stable_sample,
    dispersion_series,
    exact_separated_number,
    grid_shift,
    preimage_neighborhood_sample,
    preimage_stable_sample,
    sample_cloud,
    tail_ball_sample,
    truncated_stable_sample,
)
from mdimlab.bowen import block_stable_contains
from mdimlab.errors import BudgetExceeded, ValidationError
from mdimlab.stable_sets import SymbolicConstraint
from mdimlab.systems import IntervalMap, canonical_word

from conftest import full_cloud, random_finite_system


def test_block_stable_reflexive_and_diameter():
    gs = grid_shift(4, 16)
    cloud = sample_cloud(gs, "uniform_random", 100, 1, word_length=4)
    x = cloud.points[0]
    fam = block_stable_sample(gs, cloud, x, gs.diameter(), 0, 1)
    assert len(fam.realization) == len(cloud)
    small = block_stable_sample(gs, cloud, x, Fraction(1, 2), 0, 1)
    assert x in small.realization.points


def test_symbolic_description_agrees_with_filter_on_big_cloud():
    """The exact constraint evaluator and the orbit-walking predicate agree
    on every point of a 1000-word cloud."""
    gs = grid_shift(2, 16)
    cloud = sample_cloud(gs, "uniform_random", 1000, 3, word_length=5)
    x = ()
    eps = Fraction(1, 2)
    desc = SymbolicConstraint(base_point=x, epsilon=eps, window=(0, 0))
    for y in cloud.points:
        assert desc.contains(gs, y) == block_stable_contains(gs, x, y, eps, 0, 0)
    # realization re-verifies internally as well
    fam = block_stable_sample(gs, cloud, x, eps, 0, 0)
    assert 0 < len(fam.realization) < len(cloud)


def test_coordinate_bands():
    desc = SymbolicConstraint(base_point=(), epsilon=Fraction(1, 4), window=(2, 3))
    bands = dict(desc.coordinate_bands(6))
    assert bands[0] is None and bands[1] is None
    assert bands[2] == Fraction(1, 4) and bands[3] == Fraction(1, 4)
    assert bands[4] == Fraction(1, 2) and bands[5] == 1


def test_truncated_nesting_and_stabilization():
    gs = grid_shift(2, 16)
    cloud = sample_cloud(gs, "uniform_random", 300, 5, word_length=4)
    x = cloud.points[0]
    eps = Fraction(1, 2)
    sizes = []
    prev = None
    for depth in (1, 2, 4, 6):
        fam = truncated_stable_sample(gs, cloud, x, eps, depth)
        members = set(fam.realization.points)
        if prev is not None:
            assert members <= prev
        prev = members
        sizes.append(len(members))
    # truncation stabilizes once the window passes the sampled word length
    assert sizes[-2] == sizes[-1]


def test_truncated_depth_one_is_closed_ball():
    fs = random_finite_system(91, max_points=8)
    cloud = full_cloud(fs)
    eps = Fraction(1, 4)
    fam = truncated_stable_sample(fs, cloud, 0, eps, 1)
    from mdimlab import distance

    expect = [p for p in cloud.points if distance(fs, 0, p) <= eps]
    assert list(fam.realization.points) == expect


def test_preimage_stable_shift_cardinality():
    gs = grid_shift(2, 12)
    cloud = sample_cloud(gs, "uniform_random", 200, 7, word_length=4)
    x = ()
    eps = Fraction(1, 2)
    stable = truncated_stable_sample(gs, cloud, x, eps, 3)
    fam = preimage_stable_sample(gs, x, eps, 2, 3, cloud=cloud)
    k = gs.alphabet_size
    assert len(fam.realization) == k ** 2 * len(stable.realization)
    assert fam.variant == ("preimage_of_stable", 2, 3)


def test_preimage_zero_steps_is_stable_set():
    gs = grid_shift(2, 12)
    cloud = sample_cloud(gs, "uniform_random", 100, 9, word_length=4)
    x = ()
    eps = Fraction(1, 2)
    fam0 = preimage_stable_sample(gs, x, eps, 0, 3, cloud=cloud)
    stable = truncated_stable_sample(gs, cloud, x, eps, 3)
    assert set(fam0.realization.points) == set(stable.realization.points)


def test_preimage_budget_gate():
    gs = grid_shift(8, 12)
    cloud = sample_cloud(gs, "uniform_random", 100, 11, word_length=4)
    with pytest.raises(BudgetExceeded):
        preimage_stable_sample(gs, (), Fraction(1, 2), 4, 3, cloud=cloud, budget=1000)


def test_preimage_injective_finite_map():
    # a permutation: preimage family size equals stable family size
    pts = [Fraction(c, 16) for c in (0, 3, 7, 12)]
    matrix = tuple(tuple(abs(a - b) for b in pts) for a in pts)
    from mdimlab import FiniteSystem

    fs = FiniteSystem(distance_matrix=matrix, image=(1, 2, 3, 0))
    fam = preimage_stable_sample(fs, 0, Fraction(1, 8), 2, 3)
    stable = truncated_stable_sample(fs, full_cloud(fs), 0, Fraction(1, 8), 3)
    assert len(fam.realization) == len(stable.realization)


def test_preimage_ball_doubling():
    im = IntervalMap(map_name="doubling")
    cloud = sample_cloud(im, "uniform_random", 400, 13)
    fam = preimage_neighborhood_sample(im, 0.5, 0.1, 1, cloud=cloud)
    assert all(0.2 < y < 0.3 or 0.7 < y < 0.8 for y in fam.realization.points)
    assert len(fam.realization) > 0


def test_tail_ball_sample():
    gs = grid_shift(4, 16)
    cloud = sample_cloud(gs, "uniform_random", 200, 15, word_length=4)
    x = cloud.points[0]
    fam = tail_ball_sample(gs, cloud, x, Fraction(1, 2), 3)
    from mdimlab import bowen_distance

    for y in fam.realization.points:
        assert bowen_distance(gs, x, y, 3) < Fraction(1, 2)


def test_dispersion_finite_system_bounded_counts():
    fs = random_finite_system(92, max_points=8)
    cells = dispersion_series(fs, 0, Fraction(1, 4), Fraction(1, 8), (1, 4),
                              "tail_ball")
    for c in cells:
        assert c.separated.value <= fs.point_count
        assert c.spanning.value <= fs.point_count


def test_dispersion_construction_matches_bruteforce_small():
    """Brute-force cross-check of the construction lower bounds at small n:
    enumerate the product family, check every member lies in the target
    preimage family and that the family is exactly (n, delta)-separated
    (its own exact separated count equals its cardinality)."""
    import itertools

    from mdimlab import apply, bowen_distance, distance
    from mdimlab.systems import cloud_from_points
    from mdimlab.witnesses import preimage_ball_product

    gs = grid_shift(2, 14)
    x = (1,)
    eps = Fraction(1, 2)
    dlt = Fraction(1, 2)
    cells = dispersion_series(gs, x, eps, dlt, (1, 3), "preimage_ball",
                              mode="construction")
    for cell in cells:
        product = preimage_ball_product(gs, x, eps, cell.n, dlt)
        members = [product.member(combo) for combo in
                   itertools.product(*[range(len(s)) for s in product.coord_symbols])]
        assert len(members) == cell.separated.value == product.cardinality()
        for y in members:
            assert distance(gs, apply(gs, y, cell.n), x) < eps
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                assert bowen_distance(gs, members[i], members[j], cell.n) >= dlt
        fam_cloud = cloud_from_points(gs, members)
        exact = exact_separated_number(fam_cloud, cell.n, dlt, exact_limit=256)
        assert exact.value == len(members)


def test_dispersion_validation():
    fs = random_finite_system(93, max_points=6)
    with pytest.raises(ValidationError):
        dispersion_series(fs, 0, Fraction(1, 4), Fraction(1, 8), (1, 3), "sideways")
    with pytest.raises(ValidationError):
        dispersion_series(fs, 0, Fraction(1, 4), Fraction(1, 8), (3, 1), "tail_ball")
    gs = grid_shift(2, 14)
    with pytest.raises(ValidationError):
        dispersion_series(gs, (), Fraction(1, 2), Fraction(1, 2), (1, 2),
                          "tail_ball", mode="exact")  # no cloud on a shift
