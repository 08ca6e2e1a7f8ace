"""Combinatorial kernels over Bowen balls: spanning, separated, weighted sums.

All kernels operate on a finite cloud with bitmask set representations.
Conventions (see bowen):

* spanning uses open balls, d_n < eps,
* separated requires pairwise d_n >= eps,
* exact results come from branch-and-bound with a greedy incumbent and are
  re-verified against their witness before being returned,
* tie-breaking is always lowest-index-first over the cloud's stored order,
  so reruns are bit-identical.

Spanning centers default to the cloud itself. The paper allows centers
anywhere in the phase space, so cloud-restricted spanning values are upper
bounds of the unrestricted minimum; the restriction is recorded in ``notes``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Tuple

from .bowen import bowen_distance, pairwise_bowen
from .errors import (
    CoverIncomplete,
    InstanceTooLarge,
    InvariantViolation,
    ValidationError,
)
from .systems import (
    Potential,
    SampleCloud,
    SystemSpec,
    apply,
    birkhoff_sum,
    distance,
    require_horizon,
    validate_point,
)
from .util import fsum_sorted, log_value

EXACT_LIMIT = 14
JOIN_LIMIT = 4096


@dataclass(frozen=True)
class CountBound:
    """A counted or summed quantity with its certainty direction.

    ``bound_type`` is one of exact/upper/lower; ``method`` one of
    brute_force/greedy/construction. Exact bounds carry a witness that
    re-verifies independently. ``log_value`` backs rate computations when
    the linear value would be large.
    """

    value: float
    bound_type: str
    method: str
    witness: Optional[Tuple] = None
    log_value: Optional[float] = None
    notes: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.bound_type not in ("exact", "upper", "lower"):
            raise ValidationError(f"bad bound_type {self.bound_type!r}")
        if self.method not in ("brute_force", "greedy", "construction"):
            raise ValidationError(f"bad method {self.method!r}")

    def log(self) -> float:
        if self.log_value is not None:
            return self.log_value
        return log_value(self.value)


def _limit(override: Optional[int]) -> int:
    return EXACT_LIMIT if override is None else override


def _weight_exponents(system, points, n, epsilon, f: Potential):
    """log of (1/eps)^{S_n f(x)} for each point; exact S_n f, float log."""
    log_inv_eps = -log_value(Fraction(epsilon)) if not isinstance(epsilon, float) else -math.log(epsilon)
    return [float(birkhoff_sum(system, f, p, n)) * log_inv_eps for p in points]


def _coverage_masks(system, cloud_points, centers, n, epsilon):
    """Open-ball coverage bitmask over cloud indices for each center."""
    if centers is cloud_points:
        matrix = pairwise_bowen(system, cloud_points, n)
        masks = []
        for i in range(len(cloud_points)):
            mask = 0
            row = matrix[i]
            for j in range(len(cloud_points)):
                if row[j] < epsilon:
                    mask |= 1 << j
            masks.append(mask)
        return masks
    masks = []
    for c in centers:
        mask = 0
        for j, p in enumerate(cloud_points):
            if bowen_distance(system, c, p, n) < epsilon:
                mask |= 1 << j
        masks.append(mask)
    return masks


def _conflict_masks(system, cloud_points, n, epsilon):
    """Conflict graph bitmasks: edge iff d_n < eps (cannot both be kept)."""
    matrix = pairwise_bowen(system, cloud_points, n)
    size = len(cloud_points)
    adj = [0] * size
    for i in range(size):
        for j in range(i + 1, size):
            if matrix[i][j] < epsilon:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
    return adj


def verify_separated_witness(system, points, n, epsilon) -> bool:
    """Independent pairwise re-check of an (n, eps)-separated witness."""
    pts = list(points)
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if bowen_distance(system, pts[i], pts[j], n) < epsilon:
                return False
    return True


def verify_spanning_witness(system, centers, cloud_points, n, epsilon) -> bool:
    """Independent re-check that open balls around centers cover the cloud."""
    for p in cloud_points:
        if not any(bowen_distance(system, c, p, n) < epsilon for c in centers):
            return False
    return True


# -- greedy ------------------------------------------------------------------

def greedy_maximal_separated(cloud: SampleCloud, n: int, epsilon) -> Tuple[CountBound, CountBound]:
    """Greedy maximal (n, eps)-separated subset, lowest-index-first.

    Returns ``(sep_lower, span_upper)``: the separated count is at least |F|
    and, because a maximal separated set spans, the spanning count is at
    most |F|. The witness is verified both ways before returning.
    """
    system = cloud.system
    require_horizon(system, n, epsilon)
    if len(cloud) == 0:
        raise ValidationError("greedy_maximal_separated needs a nonempty cloud")
    matrix = pairwise_bowen(system, cloud.points, n)
    kept: list = []
    for i in range(len(cloud)):
        if all(matrix[i][j] >= epsilon for j in kept):
            kept.append(i)
    witness = tuple(cloud.points[i] for i in kept)
    if not verify_separated_witness(system, witness, n, epsilon):
        raise InvariantViolation("greedy separated witness failed re-verification")
    if not verify_spanning_witness(system, witness, cloud.points, n, epsilon):
        raise InvariantViolation("greedy maximal set failed the spanning re-check")
    sep = CountBound(value=len(kept), bound_type="lower", method="greedy", witness=witness)
    span = CountBound(value=len(kept), bound_type="upper", method="greedy", witness=witness,
                      notes=("maximal separated set used as spanning set",))
    return sep, span


def greedy_weighted_cover(masks, weights, universe):
    """Cover by best weight-per-newly-covered ratio; lowest index breaks ties."""
    covered = 0
    chosen = []
    while covered != universe:
        best_i, best_ratio, best_gain = None, None, 0
        for i, mask in enumerate(masks):
            gain = bin(mask & ~covered).count("1")
            if gain == 0:
                continue
            ratio = weights[i] / gain
            if best_i is None or ratio < best_ratio or (ratio == best_ratio and gain > best_gain):
                best_i, best_ratio, best_gain = i, ratio, gain
        if best_i is None:
            raise CoverIncomplete("candidates cannot cover the cloud")
        chosen.append(best_i)
        covered |= masks[best_i]
    return chosen


def greedy_weighted_independent(adj, weights):
    """Highest weight first (ties: lowest index); returns chosen indices."""
    order = sorted(range(len(weights)), key=lambda i: (-weights[i], i))
    banned = 0
    chosen = []
    for i in order:
        if not (banned >> i) & 1:
            chosen.append(i)
            banned |= adj[i] | (1 << i)
    return sorted(chosen)


# -- exact branch and bound ---------------------------------------------------

def min_weight_cover_exact(masks, weights, universe):
    """Exact minimum-weight set cover (DFS on elements, incumbent pruning)."""
    n_elems = universe.bit_length()
    coverers = [[] for _ in range(n_elems)]
    for i, mask in enumerate(masks):
        m = mask & universe
        while m:
            low = m & -m
            coverers[low.bit_length() - 1].append(i)
            m ^= low
    min_cover_weight = [0.0] * n_elems
    for e in range(n_elems):
        if (universe >> e) & 1:
            if not coverers[e]:
                raise CoverIncomplete("an element is covered by no candidate")
            min_cover_weight[e] = min(weights[i] for i in coverers[e])

    greedy_choice = greedy_weighted_cover(masks, weights, universe)
    best_cost = fsum_sorted(weights[i] for i in greedy_choice)
    best_sets = sorted(greedy_choice)

    def lower_bound(covered):
        rem = universe & ~covered
        lb = 0.0
        while rem:
            low = rem & -rem
            w = min_cover_weight[low.bit_length() - 1]
            if w > lb:
                lb = w
            rem ^= low
        return lb

    def dfs(covered, cost, chosen):
        nonlocal best_cost, best_sets
        if covered == universe:
            if cost < best_cost:
                best_cost = cost
                best_sets = sorted(chosen)
            return
        if cost + lower_bound(covered) >= best_cost:
            return
        rem = universe & ~covered
        branch_e, branch_deg = None, None
        m = rem
        while m:
            low = m & -m
            e = low.bit_length() - 1
            deg = sum(1 for i in coverers[e] if masks[i] & ~covered)
            if branch_deg is None or deg < branch_deg:
                branch_e, branch_deg = e, deg
            m ^= low
        for i in coverers[branch_e]:
            gain = masks[i] & ~covered
            if not gain:
                continue
            chosen.append(i)
            dfs(covered | masks[i], cost + weights[i], chosen)
            chosen.pop()

    dfs(0, 0.0, [])
    return best_sets, fsum_sorted(weights[i] for i in best_sets)


def max_weight_independent_exact(adj, weights):
    """Exact maximum-weight independent set.

    Branch and bound over the candidate mask: conflict-free candidates are
    taken greedily without branching, the bound is the total weight still in
    the candidate set, and branching pivots on the candidate with the most
    remaining conflicts (ties to the lowest index, so runs are
    deterministic).
    """
    size = len(weights)
    best_weight = -1.0
    best_set: list = []

    def mask_weight(mask):
        total = 0.0
        m = mask
        while m:
            low = m & -m
            total += weights[low.bit_length() - 1]
            m ^= low
        return total

    def dfs(cand, weight, chosen):
        nonlocal best_weight, best_set
        # take conflict-free candidates outright; they join every optimum
        while True:
            m = cand
            grabbed = False
            while m:
                low = m & -m
                v = low.bit_length() - 1
                if not adj[v] & cand:
                    chosen.append(v)
                    weight += weights[v]
                    cand ^= low
                    grabbed = True
                m ^= low
            if not grabbed:
                break
        if weight > best_weight:
            best_weight = weight
            best_set = sorted(chosen)
        if not cand or weight + mask_weight(cand) <= best_weight:
            return
        pivot, pivot_deg = -1, -1
        m = cand
        while m:
            low = m & -m
            v = low.bit_length() - 1
            deg = bin(adj[v] & cand).count("1")
            if deg > pivot_deg:
                pivot, pivot_deg = v, deg
            m ^= low
        mark = len(chosen)
        chosen.append(pivot)
        dfs(cand & ~(adj[pivot] | (1 << pivot)), weight + weights[pivot], chosen)
        del chosen[mark:]
        dfs(cand & ~(1 << pivot), weight, chosen)
        del chosen[mark:]

    dfs((1 << size) - 1, 0.0, [])
    return best_set, fsum_sorted(weights[i] for i in best_set)


# -- public kernels -----------------------------------------------------------

def exact_spanning_number(
    cloud: SampleCloud,
    n: int,
    epsilon,
    candidate_centers: Optional[Sequence] = None,
    exact_limit: Optional[int] = None,
) -> CountBound:
    """Exact minimum cover of the cloud by open Bowen balls around candidates.

    With the default candidates (the cloud itself) this is the relative
    spanning number, an upper bound of the unrestricted r_n.
    """
    system = cloud.system
    require_horizon(system, n, epsilon)
    limit = _limit(exact_limit)
    if len(cloud) > limit:
        raise InstanceTooLarge(f"cloud size {len(cloud)} exceeds exact limit {limit}")
    notes: Tuple[str, ...]
    if candidate_centers is None:
        centers = cloud.points
        notes = ("relative spanning: centers restricted to the cloud",)
    else:
        centers = tuple(validate_point(system, c) for c in candidate_centers)
        notes = ("spanning centers restricted to the candidate list",)
    masks = _coverage_masks(system, cloud.points, centers, n, epsilon)
    universe = (1 << len(cloud)) - 1
    chosen, _ = min_weight_cover_exact(masks, [1.0] * len(centers), universe)
    witness = tuple(centers[i] for i in chosen)
    if not verify_spanning_witness(system, witness, cloud.points, n, epsilon):
        raise InvariantViolation("exact spanning witness failed re-verification")
    return CountBound(value=len(chosen), bound_type="exact", method="brute_force",
                      witness=witness, notes=notes)


def exact_separated_number(
    cloud: SampleCloud,
    n: int,
    epsilon,
    exact_limit: Optional[int] = None,
) -> CountBound:
    """Exact maximum (n, eps)-separated subset via the conflict graph."""
    system = cloud.system
    require_horizon(system, n, epsilon)
    limit = _limit(exact_limit)
    if len(cloud) > limit:
        raise InstanceTooLarge(f"cloud size {len(cloud)} exceeds exact limit {limit}")
    adj = _conflict_masks(system, cloud.points, n, epsilon)
    chosen, _ = max_weight_independent_exact(adj, [1.0] * len(cloud))
    witness = tuple(cloud.points[i] for i in chosen)
    if not verify_separated_witness(system, witness, n, epsilon):
        raise InvariantViolation("exact separated witness failed re-verification")
    return CountBound(value=len(chosen), bound_type="exact", method="brute_force",
                      witness=witness)


def min_weighted_spanning_sum(
    cloud: SampleCloud,
    n: int,
    epsilon,
    f: Potential,
    mode: str = "exact",
    candidate_centers: Optional[Sequence] = None,
    exact_limit: Optional[int] = None,
) -> CountBound:
    """P_n-type sum: cover the cloud minimizing sum of (1/eps)^{S_n f(center)}.

    Exact mode solves min-weight set cover; greedy mode covers by best
    weight-per-newly-covered ratio and is an upper bound. With f = 0 the
    value equals the spanning number.
    """
    system = cloud.system
    require_horizon(system, n, epsilon)
    if mode not in ("exact", "greedy"):
        raise ValidationError("mode must be 'exact' or 'greedy'")
    if candidate_centers is None:
        centers = cloud.points
        notes = ("relative spanning: centers restricted to the cloud",)
    else:
        centers = tuple(validate_point(system, c) for c in candidate_centers)
        notes = ("spanning centers restricted to the candidate list",)
    exponents = _weight_exponents(system, centers, n, epsilon, f)
    weights = [math.exp(e) for e in exponents]
    masks = _coverage_masks(system, cloud.points, centers, n, epsilon)
    universe = (1 << len(cloud)) - 1
    if mode == "exact":
        limit = _limit(exact_limit)
        if len(cloud) > limit:
            raise InstanceTooLarge(f"cloud size {len(cloud)} exceeds exact limit {limit}")
        chosen, cost = min_weight_cover_exact(masks, weights, universe)
        witness = tuple(centers[i] for i in chosen)
        if not verify_spanning_witness(system, witness, cloud.points, n, epsilon):
            raise InvariantViolation("weighted spanning witness failed re-verification")
        return CountBound(value=cost, bound_type="exact", method="brute_force",
                          witness=witness, notes=notes)
    chosen = greedy_weighted_cover(masks, weights, universe)
    cost = fsum_sorted(weights[i] for i in chosen)
    witness = tuple(centers[i] for i in chosen)
    return CountBound(value=cost, bound_type="upper", method="greedy",
                      witness=witness, notes=notes)


def max_weighted_separated_sum(
    cloud: SampleCloud,
    n: int,
    epsilon,
    f: Potential,
    mode: str = "exact",
    exact_limit: Optional[int] = None,
) -> CountBound:
    """Q_n-type sum: max of sum of (1/eps)^{S_n f(x)} over separated subsets."""
    system = cloud.system
    require_horizon(system, n, epsilon)
    if mode not in ("exact", "greedy"):
        raise ValidationError("mode must be 'exact' or 'greedy'")
    exponents = _weight_exponents(system, cloud.points, n, epsilon, f)
    weights = [math.exp(e) for e in exponents]
    adj = _conflict_masks(system, cloud.points, n, epsilon)
    if mode == "exact":
        limit = _limit(exact_limit)
        if len(cloud) > limit:
            raise InstanceTooLarge(f"cloud size {len(cloud)} exceeds exact limit {limit}")
        chosen, total = max_weight_independent_exact(adj, weights)
        witness = tuple(cloud.points[i] for i in chosen)
        if not verify_separated_witness(system, witness, n, epsilon):
            raise InvariantViolation("weighted separated witness failed re-verification")
        return CountBound(value=total, bound_type="exact", method="brute_force", witness=witness)
    chosen = greedy_weighted_independent(adj, weights)
    total = fsum_sorted(weights[i] for i in chosen)
    witness = tuple(cloud.points[i] for i in chosen)
    return CountBound(value=total, bound_type="lower", method="greedy", witness=witness)


# -- open covers and subcover counts ------------------------------------------

@dataclass(frozen=True)
class CoverElement:
    """One open-cover element: a metric ball or an explicit point set."""

    center: Optional[object] = None
    radius: Optional[Fraction] = None
    members: Optional[frozenset] = None

    def contains(self, system: SystemSpec, p) -> bool:
        if self.members is not None:
            return p in self.members
        return distance(system, self.center, p) < self.radius


@dataclass(frozen=True)
class OpenCoverSpec:
    """A finite open cover with verified diameter and Lebesgue bounds."""

    elements: Tuple[CoverElement, ...]
    diameter_bound: Fraction
    lebesgue_bound: Optional[Fraction] = None

    def verify_on_cloud(self, system: SystemSpec, cloud: SampleCloud) -> bool:
        pts = cloud.points
        for p in pts:
            if not any(el.contains(system, p) for el in self.elements):
                return False
        for el in self.elements:
            inside = [p for p in pts if el.contains(system, p)]
            for i in range(len(inside)):
                for j in range(i + 1, len(inside)):
                    if distance(system, inside[i], inside[j]) > self.diameter_bound:
                        return False
        if self.lebesgue_bound is not None:
            for p in pts:
                near = [q for q in pts if distance(system, p, q) < self.lebesgue_bound]
                if not any(all(el.contains(system, q) for q in near) for el in self.elements):
                    return False
        return True


def cover_from_net(cloud: SampleCloud, epsilon) -> OpenCoverSpec:
    """Open cover from an eps/4-net: diameter <= eps, Lebesgue number >= eps/4."""
    system = cloud.system
    eps = epsilon
    quarter = eps / 4
    half = eps / 2
    centers = []
    for p in cloud.points:
        if not any(distance(system, p, c) < quarter for c in centers):
            centers.append(p)
    elements = tuple(CoverElement(center=c, radius=half) for c in centers)
    cover = OpenCoverSpec(elements=elements, diameter_bound=eps, lebesgue_bound=quarter)
    if not cover.verify_on_cloud(system, cloud):
        raise InvariantViolation("net cover failed its own verification")
    return cover


def min_subcover_count(
    cover: OpenCoverSpec,
    n: int,
    cloud: SampleCloud,
    mode: str = "exact",
    join_limit: Optional[int] = None,
) -> CountBound:
    """N(U^n | cloud): minimum subfamily of the n-fold join covering the cloud.

    A join element is an n-tuple of cover indices; a point lies in it iff
    T^j of the point lies in the j-th element for every j < n.
    """
    system = cloud.system
    if mode not in ("exact", "greedy"):
        raise ValidationError("mode must be 'exact' or 'greedy'")
    k = len(cover.elements)
    if k == 0:
        raise CoverIncomplete("empty cover")
    limit = JOIN_LIMIT if join_limit is None else join_limit
    if k ** n > limit:
        raise InstanceTooLarge(f"join size {k}^{n} exceeds limit {limit}")
    pts = cloud.points
    pullback = []
    for j in range(n):
        shifted = [apply(system, p, j) for p in pts]
        row = []
        for el in cover.elements:
            mask = 0
            for idx, q in enumerate(shifted):
                if el.contains(system, q):
                    mask |= 1 << idx
            row.append(mask)
        pullback.append(row)
    universe = (1 << len(pts)) - 1
    for j in range(n):
        union = 0
        for mask in pullback[j]:
            union |= mask
        if union != universe:
            raise CoverIncomplete(f"cover misses cloud points at iterate {j}")
    cell_masks = []
    seen = set()
    for combo in itertools.product(range(k), repeat=n):
        mask = universe
        for j in range(n):
            mask &= pullback[j][combo[j]]
            if not mask:
                break
        if mask and mask not in seen:
            seen.add(mask)
            cell_masks.append(mask)
    weights = [1.0] * len(cell_masks)
    if mode == "exact":
        chosen, _ = min_weight_cover_exact(cell_masks, weights, universe)
        return CountBound(value=len(chosen), bound_type="exact", method="brute_force",
                          witness=tuple(chosen))
    chosen = greedy_weighted_cover(cell_masks, weights, universe)
    return CountBound(value=len(chosen), bound_type="upper", method="greedy",
                      witness=tuple(chosen))
