"""Scale-ladder regression into metric mean dimension estimates and
finite-scale theorem probes.

Every report is explicit about what it is NOT: rates are finite-window
estimates of limsups, sups over the phase space are maxes over seeded
base-point samples, and slope brackets carry the direction of every input
bound. Equality theorems are probed with a soft tolerance; only the
finite-scale inequalities that provably hold (subset monotonicity in exact
mode) are asserted hard.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

from .covering import exact_separated_number, exact_spanning_number
from .cp import critical_exponent
from .errors import (
    EmptyNeighborhood,
    InvariantViolation,
    LadderTooShort,
    MismatchedLadders,
    ValidationError,
)
from .pressure import PressurePair, RateEstimate, growth_rate, pressure_at_scale
from .stable_sets import DispersionCell, block_stable_sample, dispersion_series
from .systems import (
    FiniteSystem,
    Potential,
    SampleCloud,
    SymbolicShift,
    SystemSpec,
    canonical_word,
    cloud_from_points,
    distance,
    validate_point,
    zero_potential,
)
from .util import least_squares, log_value

DEFAULT_WINDOW = (2, 8)
SLOPE_TOLERANCE = 0.2
BASE_SAMPLE_SIZE = 32


def validate_ladder(ladder, min_rungs: int = 4) -> Tuple[Fraction, ...]:
    """Ladders are geometric with ratio 1/2, strictly decreasing."""
    rungs = tuple(Fraction(e) for e in ladder)
    if len(rungs) < min_rungs:
        raise LadderTooShort(f"ladder needs >= {min_rungs} rungs, got {len(rungs)}")
    for a, b in zip(rungs, rungs[1:]):
        if b * 2 != a:
            raise ValidationError(f"ladder must be geometric with ratio 1/2: {a} -> {b}")
    return rungs


def geometric_ladder(start, rungs: int) -> Tuple[Fraction, ...]:
    top = Fraction(start)
    return tuple(top / (2 ** i) for i in range(rungs))


@dataclass(frozen=True)
class LadderRung:
    scale: Fraction
    rate_lower: RateEstimate
    rate_upper: RateEstimate


@dataclass(frozen=True)
class MdimReport:
    """Slope bracket of rate-vs-log(1/scale) over a geometric ladder."""

    quantity: str
    ladder: Tuple[LadderRung, ...]
    slope_lower: float
    slope_upper: float
    window: Tuple[int, int]
    caveats: Tuple[str, ...] = ()
    residual_lower: float = 0.0
    residual_upper: float = 0.0
    extras: Tuple[Tuple[str, str], ...] = ()

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.slope_lower + self.slope_upper)

    def bracket_overlaps(self, other: "MdimReport", pad: float = 0.0) -> bool:
        return (self.slope_lower - pad <= other.slope_upper
                and other.slope_lower - pad <= self.slope_upper)


def _fit_slopes(rungs: Sequence[LadderRung]):
    xs = [-log_value(r.scale) for r in rungs]  # log(1/scale)
    lo_fit = least_squares(xs, [r.rate_lower.value for r in rungs])
    hi_fit = least_squares(xs, [r.rate_upper.value for r in rungs])
    slope_lo = min(lo_fit[0], hi_fit[0])
    slope_hi = max(lo_fit[0], hi_fit[0])
    return slope_lo, slope_hi, lo_fit[2], hi_fit[2]


def _rung_from_pair(scale: Fraction, pair: PressurePair) -> LadderRung:
    return LadderRung(scale=scale, rate_lower=pair.lower, rate_upper=pair.upper)


def sample_base_points(system: SystemSpec, count: int = BASE_SAMPLE_SIZE,
                       seed: int = 0, word_length: Optional[int] = None):
    """Seeded stand-in for the paper's sup over all base points."""
    if isinstance(system, FiniteSystem):
        pts = list(range(system.point_count))
        if count >= len(pts):
            return tuple(pts)
        rng = random.Random(seed)
        return tuple(sorted(rng.sample(pts, count)))
    if isinstance(system, SymbolicShift):
        length = word_length if word_length is not None else max(1, system.horizon // 2)
        rng = random.Random(seed)
        k = system.alphabet_size
        return tuple(canonical_word(rng.randrange(k) for _ in range(length))
                     for _ in range(count))
    rng = random.Random(seed)
    return tuple(rng.random() for _ in range(count))


def _auto_mode(system: SystemSpec, mode: str) -> str:
    if mode != "auto":
        return mode
    return "construction" if isinstance(system, SymbolicShift) else "exact"


def mdim_estimate(
    system: SystemSpec,
    cloud: Optional[SampleCloud],
    f: Potential,
    epsilon_ladder,
    window: Tuple[int, int] = DEFAULT_WINDOW,
    mode: str = "auto",
    exact_limit: Optional[int] = None,
    verify_seed: int = 0,
) -> MdimReport:
    """Upper metric mean dimension estimate from a pressure ladder.

    On shift systems bound mode certifies both ladder curves with witness
    constructions (a sampled cloud only sees the cloud-restricted pressure);
    elsewhere the pressure kernels run on the cloud per rung.
    """
    rungs = validate_ladder(epsilon_ladder)
    mode = _auto_mode(system, mode)
    caveats = []
    ladder = []
    if mode == "construction":
        if not isinstance(system, SymbolicShift):
            raise ValidationError("construction mode applies to shift systems only")
        caveats.append("whole-space bounds from witness constructions")
        for eps in rungs:
            cells = dispersion_series(system, (), eps, eps, window, "whole_space",
                                      mode="construction", f=f, verify_seed=verify_seed)
            ladder.append(_rungs_from_cells(eps, cells, window))
    else:
        if cloud is None:
            raise ValidationError("cloud required outside construction mode")
        caveats.append("pressure restricted to the sample cloud")
        if mode == "greedy":
            caveats.append("greedy bounds: spanning side upper, separated side lower")
        for eps in rungs:
            pair = pressure_at_scale(cloud, f, eps, window=window, mode=mode,
                                     exact_limit=exact_limit)
            ladder.append(_rung_from_pair(eps, pair))
    slope_lo, slope_hi, res_lo, res_hi = _fit_slopes(ladder)
    quantity = "mdim_upper" if f.pot_kind == "constant" and f.constant == 0 else "mdim_with_potential"
    return MdimReport(quantity=quantity, ladder=tuple(ladder), slope_lower=slope_lo,
                      slope_upper=slope_hi, window=window, caveats=tuple(caveats),
                      residual_lower=res_lo, residual_upper=res_hi)


def _rungs_from_cells(scale: Fraction, cells: Tuple[DispersionCell, ...],
                      window: Tuple[int, int]) -> LadderRung:
    lo_series = [(c.n, c.separated) for c in cells]
    hi_series = [(c.n, c.spanning) for c in cells]
    rate_lo = growth_rate(lo_series)
    rate_hi = growth_rate(hi_series)
    if rate_lo.value > rate_hi.value:
        rate_lo, rate_hi = rate_hi, rate_lo
    return LadderRung(scale=scale, rate_lower=rate_lo, rate_upper=rate_hi)


def _max_over_base(per_base_cells, window) -> LadderRung:
    """Combine per-base dispersion series: max count over base points per n."""
    scale, cells_by_base = per_base_cells
    ns = sorted({c.n for cells in cells_by_base for c in cells})
    lo_series = []
    hi_series = []
    lo_tag = "exact"
    hi_tag = "exact"
    for n in ns:
        sep_logs = []
        span_logs = []
        for cells in cells_by_base:
            for c in cells:
                if c.n == n:
                    sep_logs.append(c.separated.log())
                    span_logs.append(c.spanning.log())
                    if c.separated.bound_type != "exact":
                        lo_tag = c.separated.bound_type
                    if c.spanning.bound_type != "exact":
                        hi_tag = c.spanning.bound_type
        lo_series.append((n, math.exp(max(sep_logs))))
        hi_series.append((n, math.exp(max(span_logs))))
    rate_lo = growth_rate(lo_series, bound_type=lo_tag)
    rate_hi = growth_rate(hi_series, bound_type=hi_tag)
    if rate_lo.value > rate_hi.value:
        rate_lo, rate_hi = rate_hi, rate_lo
    return LadderRung(scale=scale, rate_lower=rate_lo, rate_upper=rate_hi)


def _dispersion_mdim(
    quantity: str,
    variant: str,
    system: SystemSpec,
    base_points,
    epsilon,
    delta_ladder,
    window: Tuple[int, int],
    mode: str,
    cloud: Optional[SampleCloud],
    n_trunc: int,
    block_window: Tuple[int, int],
    f: Optional[Potential],
    exact_limit: Optional[int],
    verify_seed: int,
) -> MdimReport:
    rungs = validate_ladder(delta_ladder)
    mode = _auto_mode(system, mode)
    caveats = [f"sup over base points replaced by max over {len(base_points)} samples"]
    if mode == "construction":
        caveats.append("family bounds from witness constructions")
    ladder = []
    for dlt in rungs:
        if Fraction(dlt) >= Fraction(epsilon) and variant in ("tail_ball", "block_stable"):
            caveats.append(f"rung delta={dlt} is not below epsilon={epsilon}")
        cells_by_base = [
            dispersion_series(system, x, epsilon, dlt, window, variant, mode=mode,
                              cloud=cloud, f=f, n_trunc=n_trunc,
                              block_window=block_window, exact_limit=exact_limit,
                              verify_seed=verify_seed)
            for x in base_points
        ]
        ladder.append(_max_over_base((dlt, cells_by_base), window))
    slope_lo, slope_hi, res_lo, res_hi = _fit_slopes(ladder)
    return MdimReport(quantity=quantity, ladder=tuple(ladder), slope_lower=slope_lo,
                      slope_upper=slope_hi, window=window, caveats=tuple(sorted(set(caveats))),
                      residual_lower=res_lo, residual_upper=res_hi)


def tail_mdim(system: SystemSpec, base_points, epsilon, delta_ladder,
              window: Tuple[int, int] = DEFAULT_WINDOW, mode: str = "auto",
              cloud: Optional[SampleCloud] = None, f: Optional[Potential] = None,
              exact_limit: Optional[int] = None, verify_seed: int = 0) -> MdimReport:
    """Tail metric mean dimension: spanning growth of Bowen balls B_n(x, eps)
    at resolution delta, maxed over base points, slope over the delta ladder."""
    return _dispersion_mdim("tail_mdim", "tail_ball", system, base_points, epsilon,
                            delta_ladder, window, mode, cloud, 4, (0, 2), f,
                            exact_limit, verify_seed)


def preimage_mdim(system: SystemSpec, base_points, epsilon, delta_ladder,
                  window: Tuple[int, int] = DEFAULT_WINDOW, mode: str = "auto",
                  cloud: Optional[SampleCloud] = None, f: Optional[Potential] = None,
                  exact_limit: Optional[int] = None, verify_seed: int = 0) -> MdimReport:
    """Preimage-neighborhood metric mean dimension via T^-n B(x, eps)."""
    return _dispersion_mdim("preimage_mdim", "preimage_ball", system, base_points,
                            epsilon, delta_ladder, window, mode, cloud, 4, (0, 2), f,
                            exact_limit, verify_seed)


def cp_mdim(
    system: SystemSpec,
    cloud: SampleCloud,
    f: Potential,
    epsilon_ladder,
    which: str,
    s_bracket: Tuple[float, float] = (-4.0, 4.0),
    n_grid: Sequence[int] = (2, 3, 4),
    mode: str = "exact",
    exact_limit: Optional[int] = None,
) -> MdimReport:
    """Caratheodory-Pesin mdim estimate: critical exponent per rung, slope
    versus log(1/eps); bisection bracket widths feed the slope bracket."""
    rungs = validate_ladder(epsilon_ladder)
    caveats = ["centers restricted to the cloud"]
    ladder = []
    indeterminate = False
    for eps in rungs:
        ce = critical_exponent(cloud, which, eps, f, s_bracket, n_grid,
                               mode=mode, exact_limit=exact_limit)
        if ce.indeterminate:
            indeterminate = True
        rate_lo = RateEstimate(value=ce.bracket[0], method="endpoint_slope",
                               window=(min(n_grid), max(n_grid)), residual=0.0,
                               bound_type="lower")
        rate_hi = RateEstimate(value=ce.bracket[1], method="endpoint_slope",
                               window=(min(n_grid), max(n_grid)), residual=0.0,
                               bound_type="upper")
        ladder.append(LadderRung(scale=eps, rate_lower=rate_lo, rate_upper=rate_hi))
    if indeterminate:
        caveats.append("indeterminate CP classification at some probe")
    slope_lo, slope_hi, res_lo, res_hi = _fit_slopes(ladder)
    return MdimReport(quantity=f"cp_{which}_mdim", ladder=tuple(ladder),
                      slope_lower=slope_lo, slope_upper=slope_hi,
                      window=(min(n_grid), max(n_grid)), caveats=tuple(caveats),
                      residual_lower=res_lo, residual_upper=res_hi)


def local_bowen_mdim(
    system: SystemSpec,
    cloud: SampleCloud,
    x,
    f: Potential,
    radius_ladder,
    epsilon_ladder,
    s_bracket: Tuple[float, float] = (-4.0, 4.0),
    n_grid: Sequence[int] = (2, 3, 4),
    mode: str = "exact",
    exact_limit: Optional[int] = None,
) -> MdimReport:
    """Local pressure surrogate: cp-bowen ladder on cloud-and-closed-ball
    neighborhoods of x, minimized over the radius ladder (an upper bound of
    the neighborhood infimum)."""
    x = validate_point(system, x)
    if not any(p == x for p in cloud.points):
        raise EmptyNeighborhood("x must belong to the cloud")
    best: Optional[MdimReport] = None
    per_radius = []
    for r in radius_ladder:
        keep = [i for i, p in enumerate(cloud.points) if distance(system, x, p) <= r]
        sub = cloud.restrict(keep, label=f"{cloud.label}&Bbar({r})")
        report = cp_mdim(system, sub, f, epsilon_ladder, "bowen",
                         s_bracket=s_bracket, n_grid=n_grid, mode=mode,
                         exact_limit=exact_limit)
        per_radius.append((str(r), f"{report.midpoint:.6g}"))
        if best is None or report.midpoint < best.midpoint:
            best = report
    return MdimReport(quantity="local_bowen_mdim", ladder=best.ladder,
                      slope_lower=best.slope_lower, slope_upper=best.slope_upper,
                      window=best.window,
                      caveats=best.caveats + ("minimum over the radius ladder: "
                                              "upper bound of the neighborhood infimum",),
                      residual_lower=best.residual_lower,
                      residual_upper=best.residual_upper,
                      extras=tuple(per_radius))


# -- theorem probes -----------------------------------------------------------

THEOREM_IDS = ("T1.1", "T1.2", "T1.3", "T4.1", "C4.3-fixed-metric")


@dataclass(frozen=True)
class DiscrepancyReport:
    theorem_id: str
    left: MdimReport
    right: Tuple[MdimReport, ...]
    per_scale: Tuple[Tuple, ...]
    discrepancy: float
    verdict: str
    tolerance: float
    hard_checks: int = 0
    caveats: Tuple[str, ...] = ()


def _verdict(discrepancy: float, tolerance: float, blocking: bool) -> str:
    if blocking:
        return "inconclusive"
    return "consistent" if abs(discrepancy) <= tolerance else "inconsistent-at-scale"


def _per_scale_table(left: MdimReport, rights: Sequence[MdimReport]):
    for rep in rights:
        if len(rep.ladder) != len(left.ladder):
            raise MismatchedLadders("theorem sides computed on different ladders")
    rows = []
    for idx, rung in enumerate(left.ladder):
        row = [str(rung.scale), rung.rate_lower.value, rung.rate_upper.value]
        for rep in rights:
            other = rep.ladder[idx]
            row.extend([other.rate_lower.value, other.rate_upper.value])
        rows.append(tuple(row))
    return tuple(rows)


def hard_subset_monotonicity(system: SystemSpec, cloud: SampleCloud, base_points,
                             epsilon, m: int, n_w: int, delta_grid, n_max: int,
                             exact_limit: Optional[int] = None) -> int:
    """Exact-mode hard assertion: stable-family counts never exceed the
    whole cloud's at matching (n, delta), sharing one candidate pool.

    Returns the number of comparisons made; raises InvariantViolation on
    the first failure.
    """
    checks = 0
    for x in base_points:
        family = block_stable_sample(system, cloud, x, epsilon, m, n_w)
        sub = family.realization
        for dlt in delta_grid:
            for n in range(1, n_max + 1):
                whole_sep = exact_separated_number(cloud, n, dlt, exact_limit=exact_limit)
                whole_span = exact_spanning_number(cloud, n, dlt,
                                                   candidate_centers=cloud.points,
                                                   exact_limit=exact_limit)
                if len(sub) == 0:
                    checks += 2
                    continue
                fam_sep = exact_separated_number(sub, n, dlt, exact_limit=exact_limit)
                fam_span = exact_spanning_number(sub, n, dlt,
                                                 candidate_centers=cloud.points,
                                                 exact_limit=exact_limit)
                if fam_sep.value > whole_sep.value:
                    raise InvariantViolation(
                        f"separated count of stable family exceeds whole cloud at n={n}, delta={dlt}")
                if fam_span.value > whole_span.value:
                    raise InvariantViolation(
                        f"spanning count of stable family exceeds whole cloud at n={n}, delta={dlt}")
                checks += 2
    return checks


def check_theorem(system: SystemSpec, theorem_id: str, params: dict) -> DiscrepancyReport:
    """Probe one of the identity theorems at finite scale.

    ``params`` keys (defaults in parentheses): epsilon, delta_ladder,
    window ((2,6)), block_window ((0,2)), n_trunc (4), base_points /
    base_seed / base_count, cloud, f (zero), mode ("auto"), tolerance (0.2),
    hard (True on exact-capable systems), hard_n_max (3), exact_limit.
    """
    if theorem_id not in THEOREM_IDS:
        raise ValidationError(f"unknown theorem id {theorem_id!r}; "
                              f"expected one of {THEOREM_IDS}")
    epsilon = Fraction(params["epsilon"])
    delta_ladder = validate_ladder(params["delta_ladder"])
    window = tuple(params.get("window", (2, 6)))
    block_window = tuple(params.get("block_window", (0, 2)))
    n_trunc = int(params.get("n_trunc", 4))
    tolerance = float(params.get("tolerance", SLOPE_TOLERANCE))
    mode = params.get("mode", "auto")
    f = params.get("f") or zero_potential()
    cloud = params.get("cloud")
    exact_limit = params.get("exact_limit")
    base_points = params.get("base_points")
    if base_points is None:
        base_points = sample_base_points(system, int(params.get("base_count", 8)),
                                         int(params.get("base_seed", 0)),
                                         word_length=params.get("base_word_length"))
    base_points = tuple(validate_point(system, x) for x in base_points)

    left = mdim_estimate(system, cloud, f, delta_ladder, window=window, mode=mode,
                         exact_limit=exact_limit)

    caveats = list(left.caveats)
    hard_checks = 0
    if theorem_id in ("T1.1", "C4.3-fixed-metric"):
        m, n_w = block_window
        right = _dispersion_mdim("stable_block_mdim", "block_stable", system,
                                 base_points, epsilon, delta_ladder, window, mode,
                                 cloud, n_trunc, (m, n_w), f, exact_limit, 0)
        rights = (right,)
        discrepancy = left.midpoint - right.midpoint
        if params.get("hard", True) and cloud is not None:
            hard_checks = hard_subset_monotonicity(
                system, cloud, base_points, epsilon, m, n_w,
                delta_grid=params.get("hard_delta_grid", delta_ladder[:2]),
                n_max=int(params.get("hard_n_max", 3)),
                exact_limit=exact_limit)
    elif theorem_id == "T1.2":
        right = _cp_stable_mdim(system, cloud, base_points, epsilon, delta_ladder,
                                n_trunc, f, params, exact_limit)
        rights = (right,)
        discrepancy = left.midpoint - right.midpoint
    elif theorem_id == "T1.3":
        right = _dispersion_mdim("preimage_stable_pressure_mdim", "preimage_stable",
                                 system, base_points, epsilon, delta_ladder, window,
                                 mode, cloud, n_trunc, block_window, f, exact_limit, 0)
        rights = (right,)
        discrepancy = left.midpoint - right.midpoint
    else:  # T4.1
        tail = tail_mdim(system, base_points, epsilon, delta_ladder, window=window,
                         mode=mode, cloud=cloud, f=None, exact_limit=exact_limit)
        pre = preimage_mdim(system, base_points, epsilon, delta_ladder, window=window,
                            mode=mode, cloud=cloud, f=None, exact_limit=exact_limit)
        rights = (tail, pre)
        discrepancy = max(abs(left.midpoint - tail.midpoint),
                          abs(left.midpoint - pre.midpoint),
                          abs(tail.midpoint - pre.midpoint))

    for rep in rights:
        caveats.extend(rep.caveats)
    blocking = any("indeterminate" in c for c in caveats)
    caveats = tuple(sorted(set(caveats)))
    return DiscrepancyReport(
        theorem_id=theorem_id,
        left=left,
        right=rights,
        per_scale=_per_scale_table(left, rights),
        discrepancy=discrepancy,
        verdict=_verdict(discrepancy, tolerance, blocking),
        tolerance=tolerance,
        hard_checks=hard_checks,
        caveats=caveats,
    )


def _cp_stable_mdim(system, cloud, base_points, epsilon, delta_ladder, n_trunc,
                    f, params, exact_limit) -> MdimReport:
    """T1.2 right side: bowen CP critical exponents of truncated stable sets,
    maxed over base points, slope over the delta ladder."""
    from .stable_sets import truncated_stable_sample

    if cloud is None:
        if isinstance(system, FiniteSystem):
            cloud = cloud_from_points(system, range(system.point_count))
        else:
            raise ValidationError("T1.2 probe needs a ground cloud on this system")
    n_grid = tuple(params.get("n_grid", (2, 3, 4)))
    s_bracket = tuple(params.get("s_bracket", (-4.0, 4.0)))
    ladder = []
    indeterminate = False
    for dlt in validate_ladder(delta_ladder):
        lo_best = None
        hi_best = None
        for x in base_points:
            family = truncated_stable_sample(system, cloud, x, epsilon, n_trunc)
            sub = family.realization
            if len(sub) == 0:
                continue
            ce = critical_exponent(sub, "bowen", dlt, f, s_bracket, n_grid,
                                   mode="exact", exact_limit=exact_limit)
            indeterminate = indeterminate or ce.indeterminate
            if lo_best is None or ce.bracket[0] > lo_best:
                lo_best = ce.bracket[0]
            if hi_best is None or ce.bracket[1] > hi_best:
                hi_best = ce.bracket[1]
        if lo_best is None:
            raise ValidationError("all stable families empty in the T1.2 probe")
        ladder.append(LadderRung(
            scale=Fraction(dlt),
            rate_lower=RateEstimate(value=lo_best, method="endpoint_slope",
                                    window=(min(n_grid), max(n_grid)), residual=0.0,
                                    bound_type="lower"),
            rate_upper=RateEstimate(value=hi_best, method="endpoint_slope",
                                    window=(min(n_grid), max(n_grid)), residual=0.0,
                                    bound_type="upper"),
        ))
    slope_lo, slope_hi, res_lo, res_hi = _fit_slopes(ladder)
    caveats = ["sup over base points replaced by a finite sample",
               f"stable sets truncated at depth {n_trunc}"]
    if indeterminate:
        caveats.append("indeterminate CP classification at some probe")
    return MdimReport(quantity="stable_cp_bowen_mdim", ladder=tuple(ladder),
                      slope_lower=slope_lo, slope_upper=slope_hi,
                      window=(min(n_grid), max(n_grid)), caveats=tuple(caveats),
                      residual_lower=res_lo, residual_upper=res_hi)
