import json
import random
from fractions import Fraction

import pytest

from mdimlab import (
    FiniteSystem,
    IntervalMap,
    SymbolicShift,
    apply,
    birkhoff_sum,
    constant_potential,
    continuity_modulus,
    coordinate_projection,
    distance,
    distance_to_point,
    grid_shift,
    load_system,
    preimages,
    sample_cloud,
    table_potential,
    zero_potential,
)
from mdimlab.errors import (
    HorizonExceeded,
    InvalidPoint,
    PreimagesUnsupported,
    SchemeUnsupported,
    ValidationError,
)
from mdimlab.systems import FLOAT_TOLERANCE, canonical_word, validate_point

from conftest import full_cloud, random_finite_system, random_table


def test_apply_doubling():
    im = IntervalMap(map_name="doubling")
    assert apply(im, 0.3, 1) == pytest.approx(0.6, abs=1e-12)


def test_apply_identity_everywhere(three_point_system):
    gs = grid_shift(2, 6)
    assert apply(three_point_system, 1, 0) == 1
    assert apply(gs, (1, 2), 0) == (1, 2)
    assert apply(IntervalMap(map_name="tent"), 0.3, 0) == 0.3


def test_apply_shift_drops_and_pads():
    sh = SymbolicShift(levels=(Fraction(0), Fraction(1, 3), Fraction(2, 3)), horizon=6)
    assert apply(sh, (2, 0, 1, 1), 2) == (1, 1)
    with pytest.raises(HorizonExceeded):
        apply(sh, (2, 0, 1, 1), 7)


def test_apply_composes_additively():
    rng = random.Random(0)
    sh = grid_shift(3, 10)
    im = IntervalMap(map_name="logistic", logistic_r=3.7)
    for _ in range(50):
        word = canonical_word(rng.randrange(4) for _ in range(8))
        a, b = rng.randrange(5), rng.randrange(5)
        assert apply(sh, apply(sh, word, a), b) == apply(sh, word, a + b)
        x = rng.random()
        y1 = apply(im, apply(im, x, a), b)
        y2 = apply(im, x, a + b)
        assert abs(y1 - y2) <= 1e-9


def test_distance_examples(three_point_system):
    gs = grid_shift(2, 8)
    # x0 level 0, y0 level 1 (symbol 2): single-term sum 2^0 * |0-1| = 1
    assert distance(gs, (), (2,)) == 1
    assert distance(gs, (1, 2), (1, 2)) == 0
    assert distance(three_point_system, 0, 1) == Fraction(1, 5)


def test_metric_axioms_sampled():
    rng = random.Random(1)
    systems = [random_finite_system(5), grid_shift(4, 8),
               IntervalMap(map_name="tent")]
    for system in systems:
        if isinstance(system, FiniteSystem):
            pts = [rng.randrange(system.point_count) for _ in range(9)]
        elif isinstance(system, SymbolicShift):
            pts = [canonical_word(rng.randrange(5) for _ in range(6)) for _ in range(9)]
        else:
            pts = [rng.random() for _ in range(9)]
        for i in range(0, 9, 3):
            x, y, z = pts[i], pts[i + 1], pts[i + 2]
            assert distance(system, x, y) == distance(system, y, x)
            assert distance(system, x, y) <= distance(system, x, z) + distance(system, z, y)
            d_self = distance(system, x, x)
            assert d_self == 0 or (isinstance(system, IntervalMap) and d_self <= FLOAT_TOLERANCE)


def test_finite_system_validation():
    with pytest.raises(ValidationError):
        FiniteSystem(distance_matrix=((Fraction(0), Fraction(1)),
                                      (Fraction(2), Fraction(0))), image=(0, 1))
    with pytest.raises(ValidationError):  # triangle violation
        FiniteSystem(distance_matrix=(
            (Fraction(0), Fraction(1, 5), Fraction(9, 10)),
            (Fraction(1, 5), Fraction(0), Fraction(1, 2)),
            (Fraction(9, 10), Fraction(1, 2), Fraction(0))), image=(0, 1, 2))
    with pytest.raises(ValidationError):  # non-total map
        FiniteSystem(distance_matrix=((Fraction(0),),), image=(3,))


def test_preimages_examples(three_point_system):
    im = IntervalMap(map_name="doubling")
    assert preimages(im, 0.4) == (0.2, 0.7)
    sh = SymbolicShift(levels=(Fraction(0), Fraction(1, 2), Fraction(1)), horizon=6)
    pre = preimages(sh, (1, 2))
    assert len(pre) == 3 and all(apply(sh, y, 1) == (1, 2) for y in pre)
    assert preimages(three_point_system, 2) == (1, 2)
    assert preimages(three_point_system, 0) == ()
    with pytest.raises(PreimagesUnsupported):
        preimages(IntervalMap(map_name="logistic", logistic_r=3.5), 0.5)


def test_preimages_at_full_horizon_fail():
    sh = grid_shift(2, 3)
    with pytest.raises(HorizonExceeded):
        preimages(sh, (1, 1, 1))


def test_sample_cloud_determinism_and_grid():
    fs = random_finite_system(2)
    full = sample_cloud(fs, "grid", fs.point_count, 0)
    assert full.points == tuple(range(fs.point_count))
    a = sample_cloud(fs, "uniform_random", 20, 9)
    b = sample_cloud(fs, "uniform_random", 20, 9)
    assert a.points == b.points
    gs = grid_shift(4, 8)
    lex = sample_cloud(gs, "grid", 25, 0, word_length=3)
    words = [tuple(w) + (0,) * (3 - len(w)) for w in lex.points]
    assert words == sorted(words)
    assert len(lex) == 25
    with pytest.raises(SchemeUnsupported):
        sample_cloud(fs, "sobol", 4, 0)


def test_orbit_scheme():
    im = IntervalMap(map_name="doubling")
    orb = sample_cloud(im, "orbit", 5, 3)
    for a, b in zip(orb.points, orb.points[1:]):
        assert apply(im, a, 1) == pytest.approx(b)


def test_birkhoff_examples():
    fs = random_finite_system(3)
    c = constant_potential(Fraction(2, 3))
    assert birkhoff_sum(fs, c, 0, 5) == Fraction(10, 3)
    sh = SymbolicShift(levels=(Fraction(0), Fraction(1)), horizon=8)
    f = coordinate_projection()
    assert birkhoff_sum(sh, f, (1, 0, 1), 3) == 2
    assert birkhoff_sum(sh, f, (1, 0, 1), 1) == f.evaluate(sh, (1, 0, 1))


def test_birkhoff_cocycle_and_sup_norm_bound():
    rng = random.Random(4)
    fs = random_finite_system(6)
    f = random_table(fs, 7)
    sup = f.sup_norm(fs)
    for _ in range(30):
        x = rng.randrange(fs.point_count)
        n, m = rng.randint(1, 4), rng.randint(1, 4)
        lhs = birkhoff_sum(fs, f, x, n + m)
        rhs = birkhoff_sum(fs, f, x, n) + birkhoff_sum(fs, f, apply(fs, x, n), m)
        assert lhs == rhs
        assert abs(birkhoff_sum(fs, f, x, n)) <= n * sup


def test_continuity_modulus():
    fs = random_finite_system(8)
    cloud = full_cloud(fs)
    emp, ana = continuity_modulus(fs, zero_potential(), cloud, Fraction(1, 4))
    assert emp == 0 and ana == 0
    gs = grid_shift(8, 8)
    gcloud = sample_cloud(gs, "uniform_random", 40, 1, word_length=4)
    emp, ana = continuity_modulus(gs, coordinate_projection(), gcloud, Fraction(1, 4))
    assert ana == Fraction(1, 4)
    assert emp <= ana
    f = random_table(fs, 9)
    emp2, ana2 = continuity_modulus(fs, f, cloud, Fraction(1, 3))
    assert emp2 <= ana2  # full cloud: empirical scan equals the exact table bound
    assert emp2 == ana2


def test_potential_sup_norms():
    gs = grid_shift(4, 6)
    assert coordinate_projection().sup_norm(gs) == 1
    assert constant_potential(Fraction(-3, 2)).sup_norm(gs) == Fraction(3, 2)
    anchor = (2,)
    dp = distance_to_point(anchor)
    sup = dp.sup_norm(gs)
    rng = random.Random(5)
    for _ in range(50):
        w = canonical_word(rng.randrange(5) for _ in range(6))
        assert dp.evaluate(gs, w) <= sup


def test_validate_point_errors():
    fs = random_finite_system(10)
    with pytest.raises(InvalidPoint):
        validate_point(fs, fs.point_count)
    gs = grid_shift(2, 4)
    with pytest.raises(InvalidPoint):
        validate_point(gs, (3,))
    with pytest.raises(InvalidPoint):
        validate_point(gs, (1, 0))  # non-canonical trailing zero
    with pytest.raises(InvalidPoint):
        validate_point(IntervalMap(map_name="tent"), 1.5)


def test_json_loading(tmp_path):
    doc = {
        "kind": "SymbolicShift",
        "alphabet_size": 3,
        "level_values": ["0", "1/3", "1"],
        "horizon": 7,
    }
    sh = load_system(doc)
    assert sh.alphabet_size == 3 and sh.horizon == 7
    grid_doc = {"kind": "grid_shift", "grid_resolution": 8, "horizon": 5}
    gs = load_system(grid_doc)
    assert gs.grid_resolution == 8
    fin = {
        "kind": "finite_system",
        "point_count": 2,
        "distance_matrix": [["0", "1/2"], ["1/2", "0"]],
        "map": [1, 0],
    }
    fs = load_system(fin)
    assert fs.point_count == 2
    path = tmp_path / "sys.json"
    path.write_text(json.dumps({"kind": "interval_map", "interval_map": "logistic",
                                "logistic_r": "7/2"}))
    im = load_system(str(path))
    assert im.map_name == "logistic" and im.logistic_r == 3.5
    with pytest.raises(ValidationError):
        load_system({"kind": "finite_system", "distance_matrix": [["0"]],
                     "map": [0], "point_count": 5})
