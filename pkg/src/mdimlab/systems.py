"""Concrete dynamical systems, potentials, and seeded sample clouds.

Point representations
---------------------
* ``FiniteSystem``: points are integer indices ``0..point_count-1``.
* ``SymbolicShift`` / grid shifts: a point is a tuple of symbol indices with
  trailing zero symbols stripped (canonical form). Semantically the word is
  the one-sided sequence obtained by extending with symbol 0 forever; the
  horizon ``H`` caps the representable length, so the shift map is total for
  up to ``H`` steps and every metric evaluation is exact rational arithmetic.
* ``IntervalMap``: points are floats in [0, 1]; equality tests use
  ``FLOAT_TOLERANCE``. This is the only non-exact system kind.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple, Union

from .errors import (
    HorizonExceeded,
    InvalidPoint,
    PreimagesUnsupported,
    SchemeUnsupported,
    ValidationError,
)
from .util import ceil_log2, parse_rational

FLOAT_TOLERANCE = 2.0 ** -40

Word = Tuple[int, ...]
Point = Union[int, Word, float]


def canonical_word(symbols) -> Word:
    """Strip trailing zero symbols; the canonical finite form of a word."""
    w = tuple(int(s) for s in symbols)
    end = len(w)
    while end > 0 and w[end - 1] == 0:
        end -= 1
    return w[:end]


@dataclass(frozen=True)
class FiniteSystem:
    """A finite metric space with a total self-map, distances as rationals."""

    distance_matrix: Tuple[Tuple[Fraction, ...], ...]
    image: Tuple[int, ...]

    def __post_init__(self):
        m = self.distance_matrix
        count = len(m)
        if count == 0:
            raise ValidationError("FiniteSystem needs at least one point")
        if any(len(row) != count for row in m):
            raise ValidationError("distance matrix must be square")
        for i in range(count):
            if m[i][i] != 0:
                raise ValidationError(f"distance matrix diagonal nonzero at {i}")
            for j in range(count):
                if m[i][j] < 0:
                    raise ValidationError(f"negative distance at ({i},{j})")
                if m[i][j] != m[j][i]:
                    raise ValidationError(f"distance matrix asymmetric at ({i},{j})")
                if i != j and m[i][j] == 0:
                    raise ValidationError(f"zero distance between distinct points ({i},{j})")
        for i in range(count):
            for j in range(count):
                for k in range(count):
                    if m[i][j] > m[i][k] + m[k][j]:
                        raise ValidationError(
                            f"triangle inequality fails: d({i},{j}) > d({i},{k})+d({k},{j})"
                        )
        if len(self.image) != count or any(not (0 <= t < count) for t in self.image):
            raise ValidationError("map must assign every point a valid image")

    @property
    def kind(self) -> str:
        return "finite"

    @property
    def point_count(self) -> int:
        return len(self.image)

    def diameter(self) -> Fraction:
        return max(max(row) for row in self.distance_matrix)

    def describe(self) -> str:
        return f"finite[{self.point_count}]"


@dataclass(frozen=True)
class SymbolicShift:
    """One-sided full shift on a finite level alphabet, truncated at a horizon.

    Metric: d(x, y) = sum_i 2^-i |v[x_i] - v[y_i]| with levels v in [0, 1].
    ``grid_resolution`` is set when the levels are the uniform grid j/g
    (the discretized [0,1]^N shift); it unlocks grid-aligned witness
    constructions but changes no semantics.
    """

    levels: Tuple[Fraction, ...]
    horizon: int
    grid_resolution: Optional[int] = None

    def __post_init__(self):
        if len(self.levels) < 2:
            raise ValidationError("alphabet size must be >= 2")
        if self.horizon < 1:
            raise ValidationError("horizon must be a positive integer")
        for v in self.levels:
            if not (0 <= v <= 1):
                raise ValidationError(f"level value {v} outside [0,1]")
        if len(set(self.levels)) != len(self.levels):
            raise ValidationError("level values must be distinct")
        if self.grid_resolution is not None:
            g = self.grid_resolution
            expected = tuple(Fraction(j, g) for j in range(g + 1))
            if self.levels != expected:
                raise ValidationError("grid shift levels must equal (0, 1/g, ..., 1)")

    @property
    def kind(self) -> str:
        return "grid_shift" if self.grid_resolution is not None else "symbolic_shift"

    @property
    def alphabet_size(self) -> int:
        return len(self.levels)

    def diameter(self) -> Fraction:
        spread = max(self.levels) - min(self.levels)
        return spread * (2 - Fraction(1, 2 ** (self.horizon - 1)))

    def describe(self) -> str:
        if self.grid_resolution is not None:
            return f"grid_shift[g={self.grid_resolution},H={self.horizon}]"
        return f"shift[k={self.alphabet_size},H={self.horizon}]"


def grid_shift(resolution: int, horizon: int) -> SymbolicShift:
    if resolution < 1:
        raise ValidationError("grid resolution must be >= 1")
    levels = tuple(Fraction(j, resolution) for j in range(resolution + 1))
    return SymbolicShift(levels=levels, horizon=horizon, grid_resolution=resolution)


_INTERVAL_MAPS = ("doubling", "tent", "logistic")


@dataclass(frozen=True)
class IntervalMap:
    """Doubling / tent / logistic map on [0,1] with the Euclidean metric."""

    map_name: str
    logistic_r: Optional[float] = None

    def __post_init__(self):
        if self.map_name not in _INTERVAL_MAPS:
            raise ValidationError(f"unknown interval map {self.map_name!r}")
        if self.map_name == "logistic":
            r = self.logistic_r
            if r is None or not (0 < r <= 4):
                raise ValidationError("logistic map needs a parameter r in (0, 4]")
        elif self.logistic_r is not None:
            raise ValidationError("logistic_r only applies to the logistic map")

    @property
    def kind(self) -> str:
        return "interval_map"

    def diameter(self) -> float:
        return 1.0

    def describe(self) -> str:
        if self.map_name == "logistic":
            return f"interval[logistic,r={self.logistic_r:g}]"
        return f"interval[{self.map_name}]"


SystemSpec = Union[FiniteSystem, SymbolicShift, IntervalMap]


def is_shift(system: SystemSpec) -> bool:
    return isinstance(system, SymbolicShift)


def validate_point(system: SystemSpec, x: Point) -> Point:
    if isinstance(system, FiniteSystem):
        if not isinstance(x, int) or isinstance(x, bool) or not (0 <= x < system.point_count):
            raise InvalidPoint(f"{x!r} is not a point index of {system.describe()}")
        return x
    if isinstance(system, SymbolicShift):
        if not isinstance(x, tuple):
            raise InvalidPoint(f"{x!r} is not a word of {system.describe()}")
        if len(x) > system.horizon:
            raise InvalidPoint(f"word of length {len(x)} exceeds horizon {system.horizon}")
        k = system.alphabet_size
        if any(not isinstance(s, int) or not (0 <= s < k) for s in x):
            raise InvalidPoint(f"word {x!r} has symbols outside 0..{k - 1}")
        if x and x[-1] == 0:
            raise InvalidPoint(f"word {x!r} is not canonical (trailing zero symbols)")
        return x
    if not isinstance(x, (int, float)) or isinstance(x, bool) or not (0.0 <= float(x) <= 1.0):
        raise InvalidPoint(f"{x!r} is not in [0,1]")
    return float(x)


def step(system: SystemSpec, x: Point) -> Point:
    """One application of the map T."""
    if isinstance(system, FiniteSystem):
        return system.image[x]
    if isinstance(system, SymbolicShift):
        return canonical_word(x[1:]) if x else ()
    x = float(x)
    if system.map_name == "doubling":
        y = 2.0 * x
        return y - 1.0 if y >= 1.0 else y
    if system.map_name == "tent":
        return 2.0 * x if x <= 0.5 else 2.0 * (1.0 - x)
    return system.logistic_r * x * (1.0 - x)


def apply(system: SystemSpec, x: Point, k: int) -> Point:
    """Iterate the map: T^k x. apply(.,.,0) is the identity."""
    if k < 0:
        raise ValidationError("iteration count must be nonnegative")
    x = validate_point(system, x)
    if isinstance(system, SymbolicShift):
        if k > system.horizon:
            raise HorizonExceeded(
                f"T^{k} needs horizon >= {k}, have {system.horizon}"
            )
        return canonical_word(x[k:]) if k < len(x) else ()
    for _ in range(k):
        x = step(system, x)
    return x


def distance(system: SystemSpec, x: Point, y: Point):
    """Base metric d(x, y); exact (Fraction) except for IntervalMap."""
    x = validate_point(system, x)
    y = validate_point(system, y)
    if isinstance(system, FiniteSystem):
        return system.distance_matrix[x][y]
    if isinstance(system, SymbolicShift):
        levels = system.levels
        zero = levels[0]
        acc = Fraction(0)
        length = max(len(x), len(y))
        for i in range(length):
            vx = levels[x[i]] if i < len(x) else zero
            vy = levels[y[i]] if i < len(y) else zero
            if vx != vy:
                acc += Fraction(abs(vx - vy), 2 ** i)
        return acc
    return abs(float(x) - float(y))


def points_equal(system: SystemSpec, x: Point, y: Point) -> bool:
    if isinstance(system, IntervalMap):
        return abs(float(x) - float(y)) <= FLOAT_TOLERANCE
    return x == y


def preimages(system: SystemSpec, x: Point) -> Tuple[Point, ...]:
    """All y with T(y) = x, exactly. Empty result means no preimages."""
    x = validate_point(system, x)
    if isinstance(system, FiniteSystem):
        return tuple(i for i, t in enumerate(system.image) if t == x)
    if isinstance(system, SymbolicShift):
        if len(x) >= system.horizon:
            raise HorizonExceeded(
                f"preimage word would exceed horizon {system.horizon}"
            )
        return tuple(canonical_word((s,) + x) for s in range(system.alphabet_size))
    if system.map_name == "doubling":
        x = float(x)
        return tuple(sorted({x / 2.0, (x + 1.0) / 2.0}))
    if system.map_name == "tent":
        x = float(x)
        lo, hi = x / 2.0, 1.0 - x / 2.0
        return (lo,) if abs(hi - lo) <= FLOAT_TOLERANCE else (lo, hi)
    raise PreimagesUnsupported("logistic map preimages are not enumerated")


def require_horizon(system: SystemSpec, n: int, epsilon: Fraction) -> None:
    """Horizon soundness gate for d_n decisions at radius epsilon.

    For shifts, deciding d_n-membership at radius eps is only robust when
    H >= n + ceil(log2(10/eps)): the tail beyond the horizon then weighs
    less than eps/10. Violations fail loudly instead of silently truncating.
    """
    if not isinstance(system, SymbolicShift):
        return
    eps = Fraction(epsilon)
    if eps <= 0:
        raise ValidationError("epsilon must be positive")
    need = n + max(0, ceil_log2(Fraction(10) / eps))
    if system.horizon < need:
        raise HorizonExceeded(
            f"horizon {system.horizon} < {need} required for n={n}, eps={eps}"
        )


# -- potentials --------------------------------------------------------------

_POTENTIAL_KINDS = ("constant", "coordinate_projection", "distance_to_point", "table")


@dataclass(frozen=True)
class Potential:
    """A continuous observable with an exact sup-norm and modulus bound.

    All four kinds are builtin, so ``sup_norm`` and the analytic modulus
    upper bound are exact rather than sampled.
    """

    pot_kind: str
    constant: Fraction = Fraction(0)
    anchor: Optional[Point] = None
    table: Optional[Tuple[Fraction, ...]] = None

    def __post_init__(self):
        if self.pot_kind not in _POTENTIAL_KINDS:
            raise ValidationError(f"unknown potential kind {self.pot_kind!r}")

    def describe(self) -> str:
        if self.pot_kind == "constant":
            return f"const[{self.constant}]" if self.constant else "zero"
        return self.pot_kind

    def evaluate(self, system: SystemSpec, x: Point):
        x = validate_point(system, x)
        if self.pot_kind == "constant":
            return self.constant
        if self.pot_kind == "coordinate_projection":
            if not isinstance(system, SymbolicShift):
                raise ValidationError("coordinate_projection only applies to shifts")
            return system.levels[x[0]] if x else system.levels[0]
        if self.pot_kind == "distance_to_point":
            return distance(system, x, self.anchor)
        if not isinstance(system, FiniteSystem):
            raise ValidationError("table potentials only apply to finite systems")
        if len(self.table) != system.point_count:
            raise ValidationError("table length does not match point count")
        return self.table[x]

    def sup_norm(self, system: SystemSpec):
        if self.pot_kind == "constant":
            return abs(self.constant)
        if self.pot_kind == "coordinate_projection":
            return max(abs(v) for v in system.levels)
        if self.pot_kind == "distance_to_point":
            return _max_distance_to(system, self.anchor)
        return max(abs(v) for v in self.table)

    def modulus_upper(self, system: SystemSpec, epsilon):
        """Analytic upper bound for gamma(eps) = sup{|f(x)-f(y)| : d(x,y) < eps}."""
        if self.pot_kind == "constant":
            return Fraction(0)
        if self.pot_kind == "coordinate_projection":
            # |x0 - y0| <= d(x, y): the i=0 term carries weight 1.
            return Fraction(epsilon)
        if self.pot_kind == "distance_to_point":
            # 1-Lipschitz in the base metric.
            return Fraction(epsilon) if not isinstance(system, IntervalMap) else float(epsilon)
        best = Fraction(0)
        m = system.distance_matrix
        for i in range(system.point_count):
            for j in range(i + 1, system.point_count):
                if m[i][j] < epsilon:
                    gap = abs(self.table[i] - self.table[j])
                    if gap > best:
                        best = gap
        return best


def _max_distance_to(system: SystemSpec, anchor: Point):
    anchor = validate_point(system, anchor)
    if isinstance(system, FiniteSystem):
        return max(system.distance_matrix[anchor])
    if isinstance(system, SymbolicShift):
        levels = system.levels
        vmin, vmax = min(levels), max(levels)
        zero = levels[0]
        acc = Fraction(0)
        for i in range(system.horizon):
            va = levels[anchor[i]] if i < len(anchor) else zero
            acc += Fraction(max(va - vmin, vmax - va), 2 ** i)
        return acc
    a = float(anchor)
    return max(a, 1.0 - a)


def constant_potential(c) -> Potential:
    return Potential(pot_kind="constant", constant=parse_rational(c))


def zero_potential() -> Potential:
    return Potential(pot_kind="constant", constant=Fraction(0))


def coordinate_projection() -> Potential:
    return Potential(pot_kind="coordinate_projection")


def distance_to_point(anchor: Point) -> Potential:
    return Potential(pot_kind="distance_to_point", anchor=anchor)


def table_potential(values) -> Potential:
    return Potential(pot_kind="table", table=tuple(parse_rational(v) for v in values))


def birkhoff_sum(system: SystemSpec, f: Potential, x: Point, n: int):
    """S_n f(x) = f(x) + f(Tx) + ... + f(T^{n-1}x)."""
    if n < 1:
        raise ValidationError("birkhoff_sum needs n >= 1")
    if isinstance(system, SymbolicShift) and n - 1 > system.horizon:
        raise HorizonExceeded(f"orbit of length {n} not representable at horizon {system.horizon}")
    total = Fraction(0) if not isinstance(system, IntervalMap) else 0.0
    y = validate_point(system, x)
    for _ in range(n):
        total += f.evaluate(system, y)
        y = step(system, y)
    return total


# -- sample clouds -----------------------------------------------------------

_SCHEMES = ("grid", "uniform_random", "orbit")


@dataclass(frozen=True)
class SampleCloud:
    """A finite, seeded, reproducible sample standing in for a subset Z."""

    system: SystemSpec
    scheme: str
    size: int
    seed: int
    points: Tuple[Point, ...]
    label: str = "Z"

    def __len__(self) -> int:
        return len(self.points)

    def restrict(self, keep_indices, label: Optional[str] = None) -> "SampleCloud":
        """Sub-cloud with the given indices, order preserved."""
        pts = tuple(self.points[i] for i in keep_indices)
        return SampleCloud(
            system=self.system,
            scheme="derived",
            size=len(pts),
            seed=self.seed,
            points=pts,
            label=label if label is not None else self.label,
        )


def cloud_from_points(system: SystemSpec, points, label: str = "Z", seed: int = 0) -> SampleCloud:
    pts = tuple(validate_point(system, p) for p in points)
    return SampleCloud(system=system, scheme="explicit", size=len(pts), seed=seed, points=pts, label=label)


def _lex_words(system: SymbolicShift, size: int, length: int):
    k = system.alphabet_size
    out = []
    word = [0] * length
    total = k ** length
    for _ in range(min(size, total)):
        out.append(canonical_word(word))
        for pos in range(length - 1, -1, -1):  # odometer, rightmost fastest
            word[pos] += 1
            if word[pos] < k:
                break
            word[pos] = 0
    return out


def sample_cloud(
    system: SystemSpec,
    scheme: str,
    size: int,
    seed: int,
    label: str = "Z",
    word_length: Optional[int] = None,
) -> SampleCloud:
    """Deterministic cloud generation; identical inputs give identical clouds.

    ``word_length`` (shifts only) caps sampled word lengths so that room is
    left under the horizon for preimage prepending; defaults to the horizon.
    """
    if size < 1:
        raise ValidationError("cloud size must be >= 1")
    if scheme not in _SCHEMES:
        raise SchemeUnsupported(f"unknown sampling scheme {scheme!r}")
    rng = random.Random(seed)
    points: list
    if isinstance(system, FiniteSystem):
        count = system.point_count
        if scheme == "grid":
            points = list(range(min(size, count)))
        elif scheme == "uniform_random":
            points = [rng.randrange(count) for _ in range(size)]
        else:
            x = rng.randrange(count)
            points = [x]
            for _ in range(size - 1):
                x = step(system, x)
                points.append(x)
    elif isinstance(system, SymbolicShift):
        length = system.horizon if word_length is None else word_length
        if not (1 <= length <= system.horizon):
            raise ValidationError(f"word_length must be in 1..{system.horizon}")
        if scheme == "grid":
            points = _lex_words(system, size, length)
        elif scheme == "uniform_random":
            k = system.alphabet_size
            points = [
                canonical_word(rng.randrange(k) for _ in range(length))
                for _ in range(size)
            ]
        else:
            if size - 1 > system.horizon:
                raise HorizonExceeded(
                    f"orbit of length {size} not representable at horizon {system.horizon}"
                )
            k = system.alphabet_size
            x = canonical_word(rng.randrange(k) for _ in range(length))
            points = [x]
            for _ in range(size - 1):
                x = step(system, x)
                points.append(x)
    else:
        if scheme == "grid":
            points = [0.0] if size == 1 else [i / (size - 1) for i in range(size)]
        elif scheme == "uniform_random":
            points = [rng.random() for _ in range(size)]
        else:
            x = rng.random()
            points = [x]
            for _ in range(size - 1):
                x = step(system, x)
                points.append(x)
    return SampleCloud(system=system, scheme=scheme, size=size, seed=seed,
                       points=tuple(points), label=label)


def continuity_modulus(system: SystemSpec, f: Potential, cloud: SampleCloud, epsilon):
    """Empirical modulus of continuity over cloud pairs closer than epsilon.

    Returns ``(empirical_lower, analytic_upper)``. The empirical value is a
    lower bound of the true gamma(eps); the analytic value an upper bound
    (exact for table potentials on finite systems).
    """
    if len(cloud) == 0:
        raise ValidationError("continuity_modulus needs a nonempty cloud")
    pts = cloud.points
    zero = 0.0 if isinstance(system, IntervalMap) else Fraction(0)
    best = zero
    for i in range(len(pts)):
        fi = f.evaluate(system, pts[i])
        for j in range(i + 1, len(pts)):
            if distance(system, pts[i], pts[j]) < epsilon:
                gap = abs(fi - f.evaluate(system, pts[j]))
                if gap > best:
                    best = gap
    return best, f.modulus_upper(system, epsilon)


# -- JSON loading ------------------------------------------------------------

_KIND_ALIASES = {
    "finitesystem": "finite",
    "finite": "finite",
    "finite_system": "finite",
    "symbolicshift": "symbolic_shift",
    "symbolic_shift": "symbolic_shift",
    "gridshift": "grid_shift",
    "grid_shift": "grid_shift",
    "intervalmap": "interval_map",
    "interval_map": "interval_map",
}


def system_from_dict(data: dict) -> SystemSpec:
    """Build a system from its JSON document; rationals are "p/q" strings."""
    if not isinstance(data, dict) or "kind" not in data:
        raise ValidationError("system document must be an object with a 'kind' field")
    kind = _KIND_ALIASES.get(str(data["kind"]).lower())
    if kind is None:
        raise ValidationError(f"unknown system kind {data['kind']!r}")
    if kind == "finite":
        matrix = data.get("distance_matrix")
        image = data.get("map")
        if matrix is None or image is None:
            raise ValidationError("finite system needs 'distance_matrix' and 'map'")
        rows = tuple(tuple(parse_rational(v) for v in row) for row in matrix)
        spec = FiniteSystem(distance_matrix=rows, image=tuple(int(t) for t in image))
        declared = data.get("point_count")
        if declared is not None and int(declared) != spec.point_count:
            raise ValidationError("point_count disagrees with the distance matrix")
        return spec
    if kind == "grid_shift":
        return grid_shift(int(data["grid_resolution"]), int(data["horizon"]))
    if kind == "symbolic_shift":
        levels = tuple(parse_rational(v) for v in data["level_values"])
        declared = data.get("alphabet_size")
        if declared is not None and int(declared) != len(levels):
            raise ValidationError("alphabet_size disagrees with level_values")
        return SymbolicShift(levels=levels, horizon=int(data["horizon"]))
    name = str(data.get("interval_map", ""))
    r = data.get("logistic_r")
    return IntervalMap(map_name=name, logistic_r=float(parse_rational(r)) if r is not None else None)


def load_system(path_or_dict) -> SystemSpec:
    if isinstance(path_or_dict, dict):
        return system_from_dict(path_or_dict)
    with open(path_or_dict, "r", encoding="utf-8") as fh:
        return system_from_dict(json.load(fh))
