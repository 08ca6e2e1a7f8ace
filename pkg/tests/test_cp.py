import math
import random
from fractions import Fraction

import pytest

from mdimlab import (
    bowen_cover_sum,
    critical_exponent,
    max_weighted_separated_sum,
    packing_decomposed_sum,
    packing_sum,
    sample_cloud,
    zero_potential,
)
from mdimlab.cp import classify_trend
from mdimlab.errors import BracketInvalid, PartitionIncomplete, ValidationError
from mdimlab.oracles import oracle_bowen_cover_sum, oracle_packing_sum
from mdimlab.pressure import growth_rate

from conftest import full_cloud, min_positive_distance, random_finite_system, random_table

REL = 1e-9


def close(a, b):
    return abs(a - b) <= REL * max(1.0, abs(a), abs(b))


def test_singleton_sums():
    fs = random_finite_system(70, max_points=5)
    single = sample_cloud(fs, "grid", 1, 0)
    z = zero_potential()
    s = 0.8
    # cover: longest ball is cheapest; packing: shortest ball maximizes
    assert close(bowen_cover_sum(single, s, 2, 5, Fraction(1, 4), z).value,
                 math.exp(-5 * s))
    assert close(packing_sum(single, s, 2, 5, Fraction(1, 4), z).value,
                 math.exp(-2 * s))


def test_zero_exponent_cover_vs_spanning():
    fs = random_finite_system(71, max_points=7)
    cloud = full_cloud(fs)
    z = zero_potential()
    from mdimlab import exact_spanning_number

    for eps in (Fraction(1, 8), Fraction(1, 4)):
        cost = bowen_cover_sum(cloud, 0.0, 2, 4, eps, z).value
        assert cost <= exact_spanning_number(cloud, 2, eps).value + REL


def test_all_far_packing_counts_points():
    fs = random_finite_system(72, max_points=6)
    cloud = full_cloud(fs)
    z = zero_potential()
    eps = min_positive_distance(fs) / 4  # closed balls at tiny radius are disjoint
    total = packing_sum(cloud, 0.0, 2, 2, eps, z).value
    assert total == fs.point_count


@pytest.mark.parametrize("seed", [5, 105])
def test_cp_sums_match_oracles(seed):
    fs = random_finite_system(seed, max_points=8, min_points=5)
    cloud = full_cloud(fs)
    f = random_table(fs, seed + 2)
    for s in (-0.5, 0.0, 0.7):
        for eps in (Fraction(1, 8), Fraction(1, 4)):
            a = bowen_cover_sum(cloud, s, 2, 3, eps, f).value
            b = oracle_bowen_cover_sum(cloud, s, 2, 3, eps, f, limit=16)
            assert close(a, b)
            c = packing_sum(cloud, s, 2, 3, eps, f).value
            d = oracle_packing_sum(cloud, s, 2, 3, eps, f, limit=16)
            assert close(c, d)


def test_sums_decrease_in_s():
    fs = random_finite_system(73, max_points=7)
    cloud = full_cloud(fs)
    f = random_table(fs, 74)
    eps = Fraction(1, 8)
    for kernel in (bowen_cover_sum, packing_sum):
        values = [kernel(cloud, s, 2, 3, eps, f).value for s in (-1.0, 0.0, 1.0)]
        assert values[0] > values[1] > values[2]


def test_bowen_nondecreasing_packing_nonincreasing_in_N():
    fs = random_finite_system(75, max_points=7)
    cloud = full_cloud(fs)
    z = zero_potential()
    eps = Fraction(1, 8)
    n_max = 5
    covers = [bowen_cover_sum(cloud, 0.4, N, n_max, eps, z).value for N in (2, 3, 4)]
    packs = [packing_sum(cloud, 0.4, N, n_max, eps, z).value for N in (2, 3, 4)]
    assert covers == sorted(covers)
    assert packs == sorted(packs, reverse=True)


def test_prop_24_finite_step_inequality():
    """Cover sums at radius 3*eps bounded by packing sums at eps with the
    exponent shifted by log(3) * sup|f|, exact mode."""
    for seed in (81, 82, 83):
        fs = random_finite_system(seed, max_points=10)
        cloud = full_cloud(fs)
        f = random_table(fs, seed + 1)
        shift = math.log(3.0) * float(f.sup_norm(fs))
        for s in (-0.6, 0.0, 0.5, 1.1):
            for N in (2, 3):
                for eps in (Fraction(1, 16), Fraction(1, 8)):
                    lhs = bowen_cover_sum(cloud, s, N, N, 3 * eps, f).value
                    rhs = packing_sum(cloud, s - shift, N, N, eps, f).value
                    assert lhs <= rhs * (1 + REL), (seed, s, N, eps, lhs, rhs)


def test_packing_below_separated_sum():
    """Packing critical-style domination: the packing sum at (s=0, N) never
    exceeds the weighted separated sum at the same scale and length."""
    fs = random_finite_system(84, max_points=8)
    cloud = full_cloud(fs)
    f = random_table(fs, 85)
    eps = Fraction(1, 8)
    for N in (2, 3):
        pack = packing_sum(cloud, 0.0, N, N, eps, f).value
        q = max_weighted_separated_sum(cloud, N, eps, f).value
        assert pack <= q * (1 + REL)


def test_classify_trend():
    assert classify_trend([8.0, 4.0, 2.0]) == "vanishing"
    assert classify_trend([1.0, 2.5, 7.0]) == "exploding"
    assert classify_trend([1.0, 1.1, 1.0]) == "indeterminate"
    with pytest.raises(ValidationError):
        classify_trend([1.0])


def test_critical_exponent_singleton_brackets_zero():
    fs = random_finite_system(86, max_points=5)
    single = sample_cloud(fs, "grid", 1, 0)
    z = zero_potential()
    for which in ("bowen", "packing"):
        ce = critical_exponent(single, which, Fraction(1, 8), z, (-4.0, 4.0), (2, 3, 4))
        assert ce.bracket[0] <= 0.0 <= ce.bracket[1]
        assert ce.bracket[0] <= ce.value <= ce.bracket[1]


def test_critical_exponent_bracket_invalid():
    fs = random_finite_system(87, max_points=5)
    single = sample_cloud(fs, "grid", 1, 0)
    with pytest.raises(BracketInvalid):
        critical_exponent(single, "packing", Fraction(1, 8), zero_potential(),
                          (1.0, 4.0), (2, 3, 4))  # both ends vanish
    with pytest.raises(ValidationError):
        critical_exponent(single, "packing", Fraction(1, 8), zero_potential(),
                          (-4.0, 4.0), (2, 3))  # N grid too small


def test_critical_exponent_constant_shift_of_classification():
    """Cost factorization: adding a constant c to f shifts every trend
    classification by exactly c * log(1/eps) in s."""
    fs = random_finite_system(88, max_points=6)
    cloud = full_cloud(fs)
    eps = Fraction(1, 8)
    c = Fraction(1, 2)
    gap = float(c) * math.log(8.0)
    z = zero_potential()
    from mdimlab import constant_potential

    fc = constant_potential(c)
    for s in (-1.0, 0.0, 0.9, 2.2):
        base = [packing_sum(cloud, s, N, N, eps, z).value for N in (2, 3, 4)]
        shifted = [packing_sum(cloud, s + gap, N, N, eps, fc).value for N in (2, 3, 4)]
        assert classify_trend(base) == classify_trend(shifted)
        for b, t in zip(base, shifted):
            assert close(b, t)


def test_packing_decomposed_examples():
    fs = random_finite_system(89, max_points=6, min_points=4)
    cloud = full_cloud(fs)
    z = zero_potential()
    eps = min_positive_distance(fs) / 4
    s = 0.5
    trivial = packing_decomposed_sum(cloud, [list(range(len(cloud)))], s, 2, eps, z)
    direct = packing_sum(cloud, s, 2, 2, eps, z)
    assert close(trivial.value, direct.value)
    singles = packing_decomposed_sum(cloud, [[i] for i in range(len(cloud))],
                                     s, 2, eps, z)
    # all balls disjoint at tiny radius: per-singleton closed form, but the
    # trivial partition is always included in the minimum
    assert singles.value <= len(cloud) * math.exp(-2 * s) + REL
    with pytest.raises(PartitionIncomplete):
        packing_decomposed_sum(cloud, [[0]], s, 2, eps, z)


def test_packing_decomposed_dominates_all_partitions():
    """On <= 5 points the value over every partition of the cloud is found by
    enumeration; the kernel value with any supplied partition dominates the
    best achievable (it only probes the supplied one plus trivial)."""
    fs = random_finite_system(90, max_points=5, min_points=4)
    cloud = full_cloud(fs)
    z = zero_potential()
    eps = Fraction(1, 8)
    s = 0.3

    def partitions(indices):
        if not indices:
            yield []
            return
        head, *rest = indices
        for part in partitions(rest):
            for i in range(len(part)):
                yield part[:i] + [[head] + part[i]] + part[i + 1:]
            yield [[head]] + part

    best = None
    for part in partitions(list(range(len(cloud)))):
        total = sum(packing_sum(cloud.restrict(sorted(p)), s, 2, 2, eps, z).value
                    for p in part)
        if best is None or total < best:
            best = total
    probe = packing_decomposed_sum(cloud, [[i] for i in range(len(cloud))], s, 2, eps, z)
    assert probe.value >= best - REL
