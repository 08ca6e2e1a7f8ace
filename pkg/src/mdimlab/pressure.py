"""Scale-indexed rate quantities: growth rates, pressures, scale entropies.

Every rate here is a finite-window estimate of a limsup, never the limit:
``endpoint_slope`` is the primary statistic, ``least_squares`` a diagnostic.
A rate inherits the certainty direction of the counts it was computed from;
series mixing exact and greedy bounds are rejected.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from .covering import CountBound, max_weighted_separated_sum, min_weighted_spanning_sum
from .errors import MixedBoundTypes, NonpositiveValue, ValidationError, WindowTooSmall
from .systems import Potential, SampleCloud, zero_potential
from .util import least_squares, log_value


@dataclass(frozen=True)
class RateEstimate:
    """A finite-window exponential growth rate with fit metadata."""

    value: float
    method: str
    window: Tuple[int, int]
    residual: float
    bound_type: str = "exact"

    def __post_init__(self):
        if self.window[0] >= self.window[1]:
            raise ValidationError("rate window must satisfy n_min < n_max")


def growth_rate(series, method: str = "endpoint_slope",
                window: Optional[Tuple[int, int]] = None,
                bound_type: str = "exact") -> RateEstimate:
    """Exponential growth rate of a positive sequence over an n-window.

    ``series`` is a list of (n, value) pairs; values may be int, Fraction,
    float, or CountBound (bound types must then agree).
    """
    if method not in ("endpoint_slope", "least_squares"):
        raise ValidationError(f"unknown rate method {method!r}")
    pairs = []
    seen_tags = set()
    for n, value in series:
        if isinstance(value, CountBound):
            seen_tags.add(value.bound_type)
            logv = value.log()
        else:
            try:
                logv = log_value(value)
            except ValidationError as exc:
                raise NonpositiveValue(f"series value {value} at n={n} is not positive") from exc
        pairs.append((int(n), logv))
    if len(seen_tags) > 1:
        raise MixedBoundTypes(f"series mixes bound directions: {sorted(seen_tags)}")
    if seen_tags:
        bound_type = next(iter(seen_tags))
    pairs.sort()
    if window is None:
        window = (pairs[0][0], pairs[-1][0])
    n_min, n_max = window
    pairs = [(n, lv) for n, lv in pairs if n_min <= n <= n_max]
    if len(pairs) < 2:
        raise WindowTooSmall(f"need >= 2 series entries inside window {window}")
    if method == "endpoint_slope":
        (n0, l0), (n1, l1) = pairs[0], pairs[-1]
        value = (l1 - l0) / (n1 - n0)
        _, _, residual = least_squares([n for n, _ in pairs], [lv for _, lv in pairs]) \
            if len(pairs) > 2 else (0.0, 0.0, 0.0)
    else:
        value, _, residual = least_squares([n for n, _ in pairs], [lv for _, lv in pairs])
    return RateEstimate(value=value, method=method, window=(pairs[0][0], pairs[-1][0]),
                        residual=residual, bound_type=bound_type)


@dataclass(frozen=True)
class PressurePair:
    """Bracketing rate pair from spanning and separated weighted sums.

    ``spanning``/``separated`` keep kernel provenance; ``lower``/``upper``
    order the two by value so that lower <= upper holds structurally.
    """

    spanning: RateEstimate
    separated: RateEstimate
    spanning_series: Tuple[Tuple[int, CountBound], ...]
    separated_series: Tuple[Tuple[int, CountBound], ...]

    @property
    def lower(self) -> RateEstimate:
        return self.spanning if self.spanning.value <= self.separated.value else self.separated

    @property
    def upper(self) -> RateEstimate:
        return self.separated if self.spanning.value <= self.separated.value else self.spanning


def pressure_at_scale(
    cloud: SampleCloud,
    f: Potential,
    epsilon,
    window: Tuple[int, int] = (2, 8),
    mode: str = "exact",
    method: str = "endpoint_slope",
    exact_limit: Optional[int] = None,
) -> PressurePair:
    """Pressure bracket at scale eps, restricted to the cloud.

    Computes the minimal weighted spanning sum and the maximal weighted
    separated sum for each n in the window and returns both growth rates.
    In exact mode the spanning value never exceeds the separated value at
    any n (a maximal separated set spans), so the pair brackets the
    cloud-restricted pressure between the two conventions.
    """
    n_min, n_max = window
    if n_min >= n_max or n_min < 1:
        raise WindowTooSmall(f"bad pressure window {window}")
    span_series = []
    sep_series = []
    for n in range(n_min, n_max + 1):
        span_series.append((n, min_weighted_spanning_sum(
            cloud, n, epsilon, f, mode=mode, exact_limit=exact_limit)))
        sep_series.append((n, max_weighted_separated_sum(
            cloud, n, epsilon, f, mode=mode, exact_limit=exact_limit)))
    span_rate = growth_rate(span_series, method=method)
    sep_rate = growth_rate(sep_series, method=method)
    return PressurePair(spanning=span_rate, separated=sep_rate,
                        spanning_series=tuple(span_series),
                        separated_series=tuple(sep_series))


def scale_entropy(
    cloud: SampleCloud,
    epsilon,
    window: Tuple[int, int] = (2, 8),
    mode: str = "exact",
    method: str = "endpoint_slope",
    exact_limit: Optional[int] = None,
) -> PressurePair:
    """Scale entropy bracket: pressure_at_scale with the zero potential."""
    return pressure_at_scale(cloud, zero_potential(), epsilon, window=window,
                             mode=mode, method=method, exact_limit=exact_limit)
