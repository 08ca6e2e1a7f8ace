"""Shared instance generators for the test suite.

Random finite systems are built from 1-D or 2-D rational embeddings so the
triangle inequality holds exactly by construction; coordinates are made
distinct so the metric axioms hold strictly.
"""
from __future__ import annotations

import random
from fractions import Fraction

import pytest

from mdimlab import FiniteSystem, sample_cloud, table_potential


def random_finite_system(seed: int, max_points: int = 12, min_points: int = 3,
                         planar: bool = False) -> FiniteSystem:
    rng = random.Random(seed)
    count = rng.randint(min_points, max_points)
    if planar:
        spots = set()
        while len(spots) < count:
            spots.add((rng.randrange(129), rng.randrange(129)))
        coords = sorted(spots)
        pts = [(Fraction(a, 256), Fraction(b, 256)) for a, b in coords]
        matrix = tuple(
            tuple(abs(p[0] - q[0]) + abs(p[1] - q[1]) for q in pts) for p in pts
        )
    else:
        spots = set()
        while len(spots) < count:
            spots.add(rng.randrange(1025))
        pts = [Fraction(c, 1024) for c in sorted(spots)]
        matrix = tuple(tuple(abs(a - b) for b in pts) for a in pts)
    image = tuple(rng.randrange(count) for _ in range(count))
    return FiniteSystem(distance_matrix=matrix, image=image)


def random_table(system: FiniteSystem, seed: int, scale: int = 8):
    rng = random.Random(seed)
    return table_potential(
        [Fraction(rng.randrange(-scale, scale + 1), scale)
         for _ in range(system.point_count)]
    )


def full_cloud(system: FiniteSystem):
    return sample_cloud(system, "grid", system.point_count, 0)


def min_positive_distance(system: FiniteSystem) -> Fraction:
    m = system.distance_matrix
    return min(m[i][j] for i in range(len(m)) for j in range(len(m)) if i != j)


@pytest.fixture
def three_point_system() -> FiniteSystem:
    """The worked three-point example: d01=1/5, d12=1/2, d02=13/20, p0->p1->p2."""
    return FiniteSystem(
        distance_matrix=(
            (Fraction(0), Fraction(1, 5), Fraction(13, 20)),
            (Fraction(1, 5), Fraction(0), Fraction(1, 2)),
            (Fraction(13, 20), Fraction(1, 2), Fraction(0)),
        ),
        image=(1, 2, 2),
    )
