"""Materialized stable-set families and dispersion series.

Families are realized two ways and cross-checked:

* as filtered sample clouds (any system kind), every member re-verified
  against the defining predicate at realization time;
* for shifts, additionally as an exact symbolic constraint description:
  the window inequalities evaluated directly on word coordinates, a code
  path independent of the orbit-walking predicate in ``bowen``.

The sup over base points that the paper takes over the whole space is
always replaced by a max over a seeded base-point sample; callers receive
that as a recorded caveat, never silently.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

from .bowen import BowenQuery, ball_members, block_stable_contains, bowen_distance
from .covering import (
    CountBound,
    max_weighted_separated_sum,
    min_weighted_spanning_sum,
)
from .errors import BudgetExceeded, InvariantViolation, ValidationError
from .systems import (
    FiniteSystem,
    IntervalMap,
    Potential,
    SampleCloud,
    SymbolicShift,
    SystemSpec,
    Word,
    apply,
    cloud_from_points,
    distance,
    preimages,
    require_horizon,
    validate_point,
    zero_potential,
)
from .witnesses import (
    block_stable_product,
    net_spanning,
    preimage_ball_product,
    preimage_stable_product,
    separated_bound,
    spanning_bound,
    tail_ball_product,
    whole_space_product,
)

PREIMAGE_BUDGET = 10 ** 6


@dataclass(frozen=True)
class SymbolicConstraint:
    """Exact membership description of a block stable set on a shift.

    Membership of y: for every window index j in [m, n_w], the weighted sum
    of coordinate level gaps  sum_i 2^-i |v(y_{j+i}) - v(x_{j+i})|  stays
    within epsilon (closed comparison; strict for open Bowen balls).
    ``coordinate_bands`` is a derived per-coordinate necessary condition,
    reported for readability: coordinate j is unconstrained below m and
    banded within epsilon * 2^{max(0, j - n_w)} of the base orbit above.
    """

    base_point: Word
    epsilon: Fraction
    window: Tuple[int, int]
    strict: bool = False

    def contains(self, system: SymbolicShift, y: Word) -> bool:
        x = self.base_point
        m, n_w = self.window
        levels = system.levels
        zero = levels[0]
        for j in range(m, n_w + 1):
            length = max(len(x), len(y)) - j
            acc = Fraction(0)
            for i in range(max(0, length)):
                vx = levels[x[j + i]] if j + i < len(x) else zero
                vy = levels[y[j + i]] if j + i < len(y) else zero
                if vx != vy:
                    acc += Fraction(abs(vx - vy), 2 ** i)
            if acc > self.epsilon or (self.strict and acc == self.epsilon):
                return False
        return True

    def coordinate_bands(self, up_to: int) -> Tuple[Tuple[int, Optional[Fraction]], ...]:
        m, n_w = self.window
        out = []
        for j in range(up_to):
            if j < m:
                out.append((j, None))  # unconstrained
            else:
                out.append((j, self.epsilon * 2 ** max(0, j - n_w)))
        return tuple(out)


@dataclass(frozen=True)
class StableFamily:
    """A realized special set: block/truncated stable set, tail ball, or
    preimage family, with its membership predicate parameters."""

    base_point: object
    epsilon: Fraction
    variant: Tuple
    realization: Optional[SampleCloud]
    description: Optional[SymbolicConstraint] = None
    caveats: Tuple[str, ...] = ()

    def size(self) -> Optional[int]:
        return None if self.realization is None else len(self.realization)


def _verify_members(system, family: StableFamily) -> None:
    """Re-check every realized member against the defining predicate."""
    cloud = family.realization
    if cloud is None:
        return
    kind = family.variant[0]
    x = family.base_point
    eps = family.epsilon
    for y in cloud.points:
        if kind == "block":
            _, m, n_w = family.variant
            ok = block_stable_contains(system, x, y, eps, m, n_w)
        elif kind == "truncated":
            _, depth = family.variant
            ok = block_stable_contains(system, x, y, eps, 0, depth - 1)
        elif kind == "tail_ball":
            _, n = family.variant
            ok = bowen_distance(system, x, y, n) < eps
        elif kind == "preimage_of_ball":
            _, n = family.variant
            ok = distance(system, apply(system, y, n), x) < eps
        elif kind == "preimage_of_stable":
            _, n, depth = family.variant
            ok = block_stable_contains(system, x, apply(system, y, n), eps, 0, depth - 1)
        else:
            raise ValidationError(f"unknown family variant {kind!r}")
        if not ok:
            raise InvariantViolation(f"realized member fails the {kind} predicate")
        if isinstance(system, SymbolicShift) and family.description is not None:
            if kind in ("block", "truncated") and not family.description.contains(system, y):
                raise InvariantViolation("symbolic description disagrees with the filter")


def block_stable_sample(system: SystemSpec, cloud: SampleCloud, x, epsilon,
                        m: int, n_w: int) -> StableFamily:
    """Cloud members of the (m, n_w)-block of the eps-stable set of x."""
    if m > n_w:
        raise ValidationError("block window needs m <= n_w")
    x = validate_point(system, x)
    keep = [i for i, y in enumerate(cloud.points)
            if block_stable_contains(system, x, y, epsilon, m, n_w)]
    realized = cloud.restrict(keep, label=f"{cloud.label}&W[{m},{n_w}](eps={epsilon})")
    description = None
    if isinstance(system, SymbolicShift):
        description = SymbolicConstraint(base_point=x, epsilon=Fraction(epsilon),
                                         window=(m, n_w))
    family = StableFamily(base_point=x, epsilon=Fraction(epsilon),
                          variant=("block", m, n_w), realization=realized,
                          description=description,
                          caveats=("realized on a finite sample cloud",))
    _verify_members(system, family)
    return family


def truncated_stable_sample(system: SystemSpec, cloud: SampleCloud, x, epsilon,
                            depth: int) -> StableFamily:
    """Depth-N truncation of the eps-stable set: the [0, N-1] block."""
    if depth < 1:
        raise ValidationError("truncation depth must be >= 1")
    inner = block_stable_sample(system, cloud, x, epsilon, 0, depth - 1)
    family = StableFamily(base_point=inner.base_point, epsilon=inner.epsilon,
                          variant=("truncated", depth), realization=inner.realization,
                          description=inner.description,
                          caveats=inner.caveats + (f"stable set truncated at depth {depth}",))
    _verify_members(system, family)
    return family


def _iterated_preimages(system, targets, n: int, budget: int):
    current = list(targets)
    for _ in range(n):
        nxt = []
        for y in current:
            nxt.extend(preimages(system, y))
            if len(nxt) > budget:
                raise BudgetExceeded(f"preimage family exceeds budget {budget}")
        current = nxt
    return current


def preimage_stable_sample(system: SystemSpec, x, epsilon, n: int, n_trunc: int,
                           cloud: Optional[SampleCloud] = None,
                           budget: int = PREIMAGE_BUDGET) -> StableFamily:
    """The n-fold preimage family of the depth-n_trunc truncated stable set."""
    x = validate_point(system, x)
    caveats = (f"stable set truncated at depth {n_trunc}",)
    if isinstance(system, FiniteSystem):
        members = [z for z in range(system.point_count)
                   if block_stable_contains(system, x, apply(system, z, n),
                                            epsilon, 0, n_trunc - 1)]
        realized = cloud_from_points(system, members,
                                     label=f"T^-{n}W(eps={epsilon},N={n_trunc})")
    else:
        if cloud is None:
            raise ValidationError("preimage enumeration on this system needs a ground cloud")
        base = [y for y in cloud.points
                if block_stable_contains(system, x, y, epsilon, 0, n_trunc - 1)]
        if isinstance(system, SymbolicShift):
            k = system.alphabet_size
            if len(base) * (k ** n) > budget:
                raise BudgetExceeded(
                    f"preimage family of size {len(base)}*{k}^{n} exceeds budget {budget}")
        members = _iterated_preimages(system, base, n, budget)
        realized = cloud_from_points(system, members,
                                     label=f"T^-{n}W(eps={epsilon},N={n_trunc})")
        caveats = caveats + ("stable set realized on a finite sample cloud",)
    family = StableFamily(base_point=x, epsilon=Fraction(epsilon) if not isinstance(system, IntervalMap) else epsilon,
                          variant=("preimage_of_stable", n, n_trunc),
                          realization=realized, caveats=caveats)
    _verify_members(system, family)
    return family


def preimage_neighborhood_sample(system: SystemSpec, x, epsilon, n: int,
                                 cloud: Optional[SampleCloud] = None,
                                 budget: int = PREIMAGE_BUDGET) -> StableFamily:
    """The n-fold preimage family of the static open ball B(x, eps)."""
    x = validate_point(system, x)
    caveats: Tuple[str, ...] = ()
    if isinstance(system, FiniteSystem):
        members = [z for z in range(system.point_count)
                   if distance(system, apply(system, z, n), x) < epsilon]
        realized = cloud_from_points(system, members, label=f"T^-{n}B(eps={epsilon})")
    else:
        if cloud is None:
            raise ValidationError("preimage enumeration on this system needs a ground cloud")
        base = [y for y in cloud.points if distance(system, y, x) < epsilon]
        if isinstance(system, SymbolicShift):
            k = system.alphabet_size
            if len(base) * (k ** n) > budget:
                raise BudgetExceeded(
                    f"preimage family of size {len(base)}*{k}^{n} exceeds budget {budget}")
        members = _iterated_preimages(system, base, n, budget)
        realized = cloud_from_points(system, members, label=f"T^-{n}B(eps={epsilon})")
        caveats = ("ball realized on a finite sample cloud",)
    family = StableFamily(base_point=x, epsilon=Fraction(epsilon) if not isinstance(system, IntervalMap) else epsilon,
                          variant=("preimage_of_ball", n), realization=realized,
                          caveats=caveats)
    _verify_members(system, family)
    return family


def tail_ball_sample(system: SystemSpec, cloud: SampleCloud, x, epsilon, n: int) -> StableFamily:
    """Cloud members of the open Bowen ball B_n(x, eps)."""
    x = validate_point(system, x)
    realized = ball_members(system, cloud, x,
                            BowenQuery(n=n, epsilon=Fraction(epsilon), closure="open"))
    family = StableFamily(base_point=x, epsilon=Fraction(epsilon),
                          variant=("tail_ball", n), realization=realized,
                          caveats=("realized on a finite sample cloud",))
    _verify_members(system, family)
    return family


# -- dispersion series --------------------------------------------------------

_VARIANTS = ("preimage_stable", "preimage_ball", "tail_ball", "whole_space", "block_stable")


@dataclass(frozen=True)
class DispersionCell:
    """Per-n spanning/separated bounds for one realized family."""

    n: int
    spanning: CountBound
    separated: CountBound
    family_size: Optional[int]


def _family_for(system, variant, x, epsilon, n, cloud, n_trunc, block_window, budget):
    if variant == "tail_ball":
        return tail_ball_sample(system, cloud, x, epsilon, n)
    if variant == "preimage_ball":
        return preimage_neighborhood_sample(system, x, epsilon, n, cloud=cloud, budget=budget)
    if variant == "preimage_stable":
        return preimage_stable_sample(system, x, epsilon, n, n_trunc, cloud=cloud, budget=budget)
    if variant == "block_stable":
        m, n_w = block_window
        return block_stable_sample(system, cloud, x, epsilon, m, n_w)
    return StableFamily(base_point=x, epsilon=Fraction(epsilon), variant=("whole_space",),
                        realization=cloud)


def _construction_cell(system: SymbolicShift, variant, x, epsilon, delta, n,
                       n_trunc, block_window, f, verify_seed) -> DispersionCell:
    if variant == "tail_ball":
        product = tail_ball_product(system, x, Fraction(epsilon), n, Fraction(delta))
    elif variant == "preimage_ball":
        product = preimage_ball_product(system, x, Fraction(epsilon), n, Fraction(delta))
    elif variant == "preimage_stable":
        product = preimage_stable_product(system, x, Fraction(epsilon), n,
                                          Fraction(delta), n_trunc)
    elif variant == "block_stable":
        m, n_w = block_window
        product = block_stable_product(system, x, Fraction(epsilon), m, n_w, n,
                                       Fraction(delta))
    else:
        product = whole_space_product(system, n, Fraction(delta))
    sep = separated_bound(product, f=f, verify_seed=verify_seed)
    net = net_spanning(system, n, Fraction(delta))
    span = spanning_bound(net, f=f, verify_seed=verify_seed)
    return DispersionCell(n=n, spanning=span, separated=sep, family_size=None)


def dispersion_series(
    system: SystemSpec,
    x,
    epsilon,
    delta,
    n_window: Tuple[int, int],
    variant: str,
    mode: str = "auto",
    cloud: Optional[SampleCloud] = None,
    f: Optional[Potential] = None,
    n_trunc: int = 4,
    block_window: Tuple[int, int] = (0, 2),
    budget: int = PREIMAGE_BUDGET,
    exact_limit: Optional[int] = None,
    verify_seed: int = 0,
) -> Tuple[DispersionCell, ...]:
    """Per-n spanning/separated bounds of a dispersion family at scale delta.

    ``mode`` is exact / greedy / construction / auto. Auto picks the
    construction witnesses on shift systems (sampled clouds saturate and
    full preimage enumeration blows the budget) and exact kernels
    elsewhere. The spanning bound in construction mode covers the whole
    space, hence also every family and their sup over base points.
    """
    if variant not in _VARIANTS:
        raise ValidationError(f"unknown dispersion variant {variant!r}")
    if mode not in ("auto", "exact", "greedy", "construction"):
        raise ValidationError(f"unknown dispersion mode {mode!r}")
    n_min, n_max = n_window
    if n_min < 1 or n_min > n_max:
        raise ValidationError("bad n window")
    if mode == "auto":
        mode = "construction" if isinstance(system, SymbolicShift) else "exact"
    if mode != "construction" and cloud is None:
        if isinstance(system, FiniteSystem):
            cloud = cloud_from_points(system, range(system.point_count))
        else:
            raise ValidationError(f"{mode} mode needs a ground cloud on this system")
    f = f if f is not None else zero_potential()
    cells = []
    for n in range(n_min, n_max + 1):
        require_horizon(system, n, delta)
        if mode == "construction":
            if not isinstance(system, SymbolicShift):
                raise ValidationError("construction mode applies to shift systems only")
            cells.append(_construction_cell(system, variant, x, epsilon, delta, n,
                                            n_trunc, block_window, f, verify_seed))
            continue
        family = _family_for(system, variant, x, epsilon, n, cloud, n_trunc,
                             block_window, budget)
        realized = family.realization
        if realized is None or len(realized) == 0:
            tag = "exact" if mode == "exact" else "lower"
            empty = CountBound(value=1.0, bound_type=tag, method="brute_force" if mode == "exact" else "greedy",
                               notes=("empty family: count clamped to 1",))
            cells.append(DispersionCell(n=n, spanning=empty, separated=empty,
                                        family_size=0))
            continue
        if mode == "exact":
            span = min_weighted_spanning_sum(realized, n, delta, f, mode="exact",
                                             exact_limit=exact_limit)
            sep = max_weighted_separated_sum(realized, n, delta, f, mode="exact",
                                             exact_limit=exact_limit)
        else:
            span = min_weighted_spanning_sum(realized, n, delta, f, mode="greedy")
            sep = max_weighted_separated_sum(realized, n, delta, f, mode="greedy")
        cells.append(DispersionCell(n=n, spanning=span, separated=sep,
                                    family_size=len(realized)))
    return tuple(cells)
