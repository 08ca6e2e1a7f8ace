import random
from fractions import Fraction

import pytest

from mdimlab import (
    BowenQuery,
    ball_members,
    block_stable_contains,
    bowen_distance,
    distance,
    grid_shift,
    sample_cloud,
)
from mdimlab.bowen import pairwise_bowen
from mdimlab.errors import HorizonExceeded, ValidationError
from mdimlab.systems import SymbolicShift, canonical_word

from conftest import full_cloud, random_finite_system


def test_bowen_distance_base_case(three_point_system):
    fs = three_point_system
    assert bowen_distance(fs, 0, 2, 1) == distance(fs, 0, 2)
    # orbit p0 -> p1 -> p2: d2(p0,p1) = max(d(p0,p1), d(p1,p2)) = 1/2
    assert bowen_distance(fs, 0, 1, 2) == Fraction(1, 2)


def test_bowen_distance_shift_constant():
    sh = SymbolicShift(levels=(Fraction(0), Fraction(1)), horizon=8)
    x = ()
    y = (1,)
    for n in range(1, 6):
        assert bowen_distance(sh, x, y, n) == 1


def test_bowen_distance_monotone_in_n():
    rng = random.Random(11)
    fs = random_finite_system(11)
    for _ in range(20):
        x, y = rng.randrange(fs.point_count), rng.randrange(fs.point_count)
        prev = None
        for n in range(1, 5):
            d = bowen_distance(fs, x, y, n)
            if prev is not None:
                assert d >= prev
            prev = d


def test_bowen_triangle_inequality():
    rng = random.Random(12)
    fs = random_finite_system(12)
    for _ in range(30):
        x, y, z = (rng.randrange(fs.point_count) for _ in range(3))
        for n in (1, 3):
            assert bowen_distance(fs, x, y, n) <= (
                bowen_distance(fs, x, z, n) + bowen_distance(fs, z, y, n))


def test_block_stable_examples():
    gs = grid_shift(2, 16)
    x, y = (), (2,)  # levels 0 and 1 at coordinate 0
    assert block_stable_contains(gs, x, x, Fraction(1, 100), 0, 3)
    assert block_stable_contains(gs, x, y, Fraction(1, 2), 1, 2)
    assert not block_stable_contains(gs, x, y, Fraction(1, 2), 0, 2)
    diam = gs.diameter()
    assert block_stable_contains(gs, x, y, diam, 0, 2)


def test_block_equals_closed_ball_brute_force():
    """Closed ball with window [0, N-1] equals the intersection of the N
    single-step conditions."""
    rng = random.Random(13)
    gs = grid_shift(3, 10)
    pts = [canonical_word(rng.randrange(4) for _ in range(5)) for _ in range(40)]
    x = pts[0]
    eps = Fraction(1, 3)
    n = 3
    for y in pts:
        stepwise = all(
            distance(gs, canonical_word(x[j:]), canonical_word(y[j:])) <= eps
            for j in range(n)
        )
        assert block_stable_contains(gs, x, y, eps, 0, n - 1) == stepwise
        assert (bowen_distance(gs, x, y, n) <= eps) == stepwise


def test_ball_members_examples(three_point_system):
    fs = three_point_system
    cloud = full_cloud(fs)
    q = BowenQuery(n=2, epsilon=Fraction(1, 2), closure="closed")
    assert ball_members(fs, cloud, 0, q).points == (0, 1)
    big = BowenQuery(n=2, epsilon=Fraction(10), closure="open")
    assert ball_members(fs, cloud, 0, big).points == cloud.points
    tiny = BowenQuery(n=1, epsilon=Fraction(1, 100), closure="closed")
    assert ball_members(fs, cloud, 0, tiny).points == (0,)


def test_ball_members_nesting():
    rng = random.Random(14)
    fs = random_finite_system(14)
    cloud = full_cloud(fs)
    center = rng.randrange(fs.point_count)
    for eps in (Fraction(1, 8), Fraction(1, 4)):
        prev = None
        for n in (1, 2, 3):
            members = set(ball_members(fs, cloud, center,
                                       BowenQuery(n=n, epsilon=eps)).points)
            if prev is not None:
                assert members <= prev
            prev = members
    for n in (1, 2):
        prev = None
        for eps in (Fraction(1, 16), Fraction(1, 8), Fraction(1, 4)):
            members = set(ball_members(fs, cloud, center,
                                       BowenQuery(n=n, epsilon=eps)).points)
            if prev is not None:
                assert prev <= members
            prev = members


def test_window_nesting():
    gs = grid_shift(4, 12)
    rng = random.Random(15)
    pts = [canonical_word(rng.randrange(5) for _ in range(4)) for _ in range(30)]
    x = pts[0]
    eps = Fraction(1, 4)
    inner = {y for y in pts if block_stable_contains(gs, x, y, eps, 1, 4)}
    outer = {y for y in pts if block_stable_contains(gs, x, y, eps, 1, 2)}
    assert inner <= outer
    smaller = {y for y in pts if block_stable_contains(gs, x, y, eps / 2, 1, 2)}
    assert smaller <= outer


def test_horizon_soundness_gate():
    gs = grid_shift(4, 6)
    with pytest.raises(HorizonExceeded):
        block_stable_contains(gs, (), (1,), Fraction(1, 32), 0, 3)
    with pytest.raises(HorizonExceeded):
        bowen_distance(gs, (), (1,), 8)


def test_pairwise_matrix_matches_direct():
    fs = random_finite_system(16)
    cloud = full_cloud(fs)
    matrix = pairwise_bowen(fs, cloud.points, 3)
    for i in range(len(cloud)):
        for j in range(len(cloud)):
            assert matrix[i][j] == bowen_distance(fs, cloud.points[i], cloud.points[j], 3)


def test_query_validation():
    with pytest.raises(ValidationError):
        BowenQuery(n=0, epsilon=Fraction(1, 2))
    with pytest.raises(ValidationError):
        BowenQuery(n=2, epsilon=Fraction(0))
    with pytest.raises(ValidationError):
        BowenQuery(n=2, epsilon=Fraction(1, 2), closure="half")
    with pytest.raises(ValidationError):
        BowenQuery(n=2, epsilon=Fraction(1, 2), window=(3, 1))
