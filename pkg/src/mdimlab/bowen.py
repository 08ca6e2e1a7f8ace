"""Bowen distances, Bowen balls, and block-stable membership predicates.

The paper-facing conventions, fixed once here and stated by every caller:

* stable sets use the closed comparison  d(T^j x, T^j y) <= eps,
* spanning / open Bowen balls use the strict comparison  d_n < eps,
* separated sets require  d_n >= eps.

With rational arithmetic these boundaries are decided exactly, which is the
whole point of the exact systems.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Tuple

from .errors import HorizonExceeded, ValidationError
from .systems import (
    SampleCloud,
    SystemSpec,
    SymbolicShift,
    apply,
    distance,
    require_horizon,
    validate_point,
)

MEMO_LIMIT = 4096


@dataclass(frozen=True)
class BowenQuery:
    """Parameters of one ball/stable-set membership question."""

    n: int
    epsilon: Fraction
    closure: str = "open"  # open -> d_n < eps; closed -> d_n <= eps
    window: Optional[Tuple[int, int]] = None  # [m, n] inclusive block, overrides n

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValidationError("epsilon must be positive")
        if self.closure not in ("open", "closed"):
            raise ValidationError("closure must be 'open' or 'closed'")
        if self.window is not None:
            m, n = self.window
            if not (0 <= m <= n):
                raise ValidationError("window must satisfy 0 <= m <= n")
        elif self.n < 1:
            raise ValidationError("orbit length n must be >= 1")


def bowen_distance(system: SystemSpec, x, y, n: int):
    """d_n(x, y) = max over 0 <= j < n of d(T^j x, T^j y)."""
    if n < 1:
        raise ValidationError("bowen_distance needs n >= 1")
    if isinstance(system, SymbolicShift) and n - 1 > system.horizon:
        raise HorizonExceeded(f"d_{n} needs {n - 1} shifts, horizon is {system.horizon}")
    x = validate_point(system, x)
    y = validate_point(system, y)
    best = None
    for j in range(n):
        d = distance(system, apply(system, x, j), apply(system, y, j))
        if best is None or d > best:
            best = d
    return best


def block_distance(system: SystemSpec, x, y, m: int, n: int):
    """max over j in [m, n] (inclusive) of d(T^j x, T^j y)."""
    if m > n or m < 0:
        raise ValidationError("block window must satisfy 0 <= m <= n")
    best = None
    for j in range(m, n + 1):
        d = distance(system, apply(system, x, j), apply(system, y, j))
        if best is None or d > best:
            best = d
    return best


def block_stable_contains(system: SystemSpec, x, y, epsilon, m: int, n: int) -> bool:
    """Is y in the (m,n)-block of the eps-stable set of x (closed comparisons)?"""
    require_horizon(system, n + 1, epsilon)
    eps = epsilon
    for j in range(m, n + 1):
        if distance(system, apply(system, x, j), apply(system, y, j)) > eps:
            return False
    return True


def ball_contains(system: SystemSpec, center, y, query: BowenQuery) -> bool:
    if query.window is not None:
        m, n = query.window
        require_horizon(system, n + 1, query.epsilon)
        d = block_distance(system, center, y, m, n)
    else:
        require_horizon(system, query.n, query.epsilon)
        d = bowen_distance(system, center, y, query.n)
    if query.closure == "open":
        return d < query.epsilon
    return d <= query.epsilon


def ball_members(system: SystemSpec, cloud: SampleCloud, center, query: BowenQuery) -> SampleCloud:
    """Filter a cloud by Bowen-ball membership; ordering preserved."""
    center = validate_point(system, center)
    keep = [i for i, p in enumerate(cloud.points) if ball_contains(system, center, p, query)]
    shape = f"B_{query.n}" if query.window is None else f"W[{query.window[0]},{query.window[1]}]"
    return cloud.restrict(keep, label=f"{cloud.label}&{shape}({query.closure},{query.epsilon})")


@lru_cache(maxsize=128)
def _pairwise_cached(system: SystemSpec, points: Tuple, n: int):
    size = len(points)
    rows = [[None] * size for _ in range(size)]
    zero = distance(system, points[0], points[0]) if size else None
    for i in range(size):
        rows[i][i] = zero
        for j in range(i + 1, size):
            d = bowen_distance(system, points[i], points[j], n)
            rows[i][j] = d
            rows[j][i] = d
    return tuple(tuple(row) for row in rows)


def pairwise_bowen(system: SystemSpec, points: Tuple, n: int):
    """Pairwise d_n matrix; memoized for clouds up to MEMO_LIMIT points."""
    points = tuple(points)
    if len(points) <= MEMO_LIMIT:
        return _pairwise_cached(system, points, n)
    size = len(points)
    rows = [[None] * size for _ in range(size)]
    for i in range(size):
        rows[i][i] = distance(system, points[i], points[i])
        for j in range(i + 1, size):
            d = bowen_distance(system, points[i], points[j], n)
            rows[i][j] = d
            rows[j][i] = d
    return rows
