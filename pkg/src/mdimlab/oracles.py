"""Exhaustive small-instance oracles.

Deliberately dumb: plain subset enumeration with no search-tree pruning,
sharing no solver code with the branch-and-bound kernels in ``covering``
and ``cp``. Membership masks are precomputed once so the 2^N loops stay
affordable. These are the independent side of every dual-route check and
also back the ``oracle`` CLI subcommand.
"""
from __future__ import annotations

import math
from itertools import combinations
from typing import Optional, Sequence

from .bowen import bowen_distance
from .errors import CoverIncomplete, InstanceTooLarge
from .systems import Potential, SampleCloud, birkhoff_sum
from .util import fsum_sorted, log_value

ORACLE_LIMIT = 14


def _check_size(count: int, limit: Optional[int]) -> None:
    cap = ORACLE_LIMIT if limit is None else limit
    if count > cap:
        raise InstanceTooLarge(f"{count} items exceed the oracle limit {cap}")


def _open_cover_masks(system, centers, targets, n, epsilon):
    masks = []
    for c in centers:
        mask = 0
        for idx, p in enumerate(targets):
            if bowen_distance(system, c, p, n) < epsilon:
                mask |= 1 << idx
        masks.append(mask)
    return masks


def _conflicts(system, points, n, epsilon):
    adj = [0] * len(points)
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if bowen_distance(system, points[i], points[j], n) < epsilon:
                adj[i] |= 1 << j
                adj[j] |= 1 << i
    return adj


def _independent(adj, mask) -> bool:
    m = mask
    while m:
        low = m & -m
        if adj[low.bit_length() - 1] & mask:
            return False
        m ^= low
    return True


def oracle_spanning_number(cloud: SampleCloud, n: int, epsilon,
                           candidate_centers: Optional[Sequence] = None,
                           limit: Optional[int] = None) -> int:
    """Minimum cover size, found by increasing-size subset enumeration."""
    system = cloud.system
    centers = tuple(candidate_centers) if candidate_centers is not None else cloud.points
    _check_size(len(centers), limit)
    _check_size(len(cloud), limit)
    masks = _open_cover_masks(system, centers, cloud.points, n, epsilon)
    universe = (1 << len(cloud)) - 1
    for size in range(1, len(centers) + 1):
        for combo in combinations(range(len(centers)), size):
            acc = 0
            for i in combo:
                acc |= masks[i]
            if acc == universe:
                return size
    raise CoverIncomplete("no subset of the candidates covers the cloud")


def oracle_separated_number(cloud: SampleCloud, n: int, epsilon,
                            limit: Optional[int] = None) -> int:
    """Maximum separated subset size over all 2^N subsets."""
    system = cloud.system
    _check_size(len(cloud), limit)
    adj = _conflicts(system, cloud.points, n, epsilon)
    best = 0
    for mask in range(1, 1 << len(cloud)):
        size = bin(mask).count("1")
        if size > best and _independent(adj, mask):
            best = size
    return best


def _weights(system, points, n, epsilon, f: Potential):
    log_inv = -log_value(epsilon)
    return [math.exp(float(birkhoff_sum(system, f, p, n)) * log_inv) for p in points]


def oracle_min_weighted_spanning(cloud: SampleCloud, n: int, epsilon, f: Potential,
                                 candidate_centers: Optional[Sequence] = None,
                                 limit: Optional[int] = None) -> float:
    """Minimum total weight over all covering subsets of the candidates."""
    system = cloud.system
    centers = tuple(candidate_centers) if candidate_centers is not None else cloud.points
    _check_size(len(centers), limit)
    _check_size(len(cloud), limit)
    weights = _weights(system, centers, n, epsilon, f)
    masks = _open_cover_masks(system, centers, cloud.points, n, epsilon)
    universe = (1 << len(cloud)) - 1
    best = None
    for mask in range(1, 1 << len(centers)):
        acc = 0
        chosen = []
        m = mask
        while m:
            low = m & -m
            i = low.bit_length() - 1
            acc |= masks[i]
            chosen.append(i)
            m ^= low
        if acc != universe:
            continue
        total = fsum_sorted(weights[i] for i in chosen)
        if best is None or total < best:
            best = total
    if best is None:
        raise CoverIncomplete("no subset of the candidates covers the cloud")
    return best


def oracle_max_weighted_separated(cloud: SampleCloud, n: int, epsilon, f: Potential,
                                  limit: Optional[int] = None) -> float:
    """Maximum total weight over all separated subsets."""
    system = cloud.system
    _check_size(len(cloud), limit)
    weights = _weights(system, cloud.points, n, epsilon, f)
    adj = _conflicts(system, cloud.points, n, epsilon)
    best = 0.0
    for mask in range(1, 1 << len(cloud)):
        if not _independent(adj, mask):
            continue
        chosen = [i for i in range(len(cloud)) if (mask >> i) & 1]
        total = fsum_sorted(weights[i] for i in chosen)
        if total > best:
            best = total
    return best


def _variable_length_candidates(cloud, s, N, N_max, epsilon, f, limit):
    system = cloud.system
    candidates = [(p, m) for p in cloud.points for m in range(N, N_max + 1)]
    _check_size(len(candidates), limit)
    log_inv = -log_value(epsilon)
    costs = [
        math.exp(-m * float(s) + float(birkhoff_sum(system, f, p, m)) * log_inv)
        for p, m in candidates
    ]
    return candidates, costs


def oracle_bowen_cover_sum(cloud: SampleCloud, s, N: int, N_max: int,
                           epsilon, f: Potential, limit: Optional[int] = None) -> float:
    """Minimum variable-length weighted cover cost over all candidate subsets.

    Candidates are (point, length) pairs, length in [N, N_max], with cost
    e^{-length*s + log(1/eps) * S_length f(point)}; balls are open.
    """
    system = cloud.system
    candidates, costs = _variable_length_candidates(cloud, s, N, N_max, epsilon, f, limit)
    masks = []
    for p, m in candidates:
        mask = 0
        for idx, q in enumerate(cloud.points):
            if bowen_distance(system, p, q, m) < epsilon:
                mask |= 1 << idx
        masks.append(mask)
    universe = (1 << len(cloud)) - 1
    best = None
    for mask in range(1, 1 << len(candidates)):
        acc = 0
        chosen = []
        m = mask
        while m:
            low = m & -m
            i = low.bit_length() - 1
            acc |= masks[i]
            chosen.append(i)
            m ^= low
        if acc != universe:
            continue
        total = fsum_sorted(costs[i] for i in chosen)
        if best is None or total < best:
            best = total
    if best is None:
        raise CoverIncomplete("no candidate family covers the cloud")
    return best


def oracle_packing_sum(cloud: SampleCloud, s, N: int, N_max: int,
                       epsilon, f: Potential, limit: Optional[int] = None) -> float:
    """Maximum weighted sum over candidate families of closed balls that are
    pairwise disjoint on the cloud, over all subsets."""
    system = cloud.system
    candidates, costs = _variable_length_candidates(cloud, s, N, N_max, epsilon, f, limit)
    members = []
    for p, m in candidates:
        mask = 0
        for idx, q in enumerate(cloud.points):
            if bowen_distance(system, p, q, m) <= epsilon:
                mask |= 1 << idx
        members.append(mask)
    best = 0.0
    for mask in range(1, 1 << len(candidates)):
        chosen = []
        acc = 0
        ok = True
        m = mask
        while m:
            low = m & -m
            i = low.bit_length() - 1
            if members[i] & acc:
                ok = False
                break
            acc |= members[i]
            chosen.append(i)
            m ^= low
        if not ok:
            continue
        total = fsum_sorted(costs[i] for i in chosen)
        if total > best:
            best = total
    return best
