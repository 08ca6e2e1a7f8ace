"""mdimlab: a finite-scale laboratory for metric mean dimension quantities.

Exact-arithmetic dynamical systems (finite metric systems, truncated
symbolic/grid shifts, interval maps), Bowen-ball combinatorics with exact
and greedy kernels, weighted pressure sums, Caratheodory-Pesin critical
exponents, stable-set families and preimage dispersions, the explicit
spanning/separated constructions on the [0,1]^N shift, and scale-ladder
estimators with theorem probes.
"""

from .bowen import BowenQuery, ball_members, block_stable_contains, bowen_distance
from .covering import (
    CountBound,
    OpenCoverSpec,
    cover_from_net,
    exact_separated_number,
    exact_spanning_number,
    greedy_maximal_separated,
    max_weighted_separated_sum,
    min_subcover_count,
    min_weighted_spanning_sum,
)
from .cp import (
    CoverFamily,
    CriticalExponent,
    bowen_cover_sum,
    critical_exponent,
    packing_decomposed_sum,
    packing_sum,
)
from .errors import (
    ComputationError,
    InvariantViolation,
    MdimlabError,
    ValidationError,
)
from .estimators import (
    DiscrepancyReport,
    MdimReport,
    check_theorem,
    cp_mdim,
    geometric_ladder,
    local_bowen_mdim,
    mdim_estimate,
    preimage_mdim,
    sample_base_points,
    tail_mdim,
)
from .pressure import PressurePair, RateEstimate, growth_rate, pressure_at_scale, scale_entropy
from .repro import construct_E1, construct_E2, construct_E3, verify_family
from .stable_sets import (
    StableFamily,
    SymbolicConstraint,
    block_stable_sample,
    dispersion_series,
    preimage_neighborhood_sample,
    preimage_stable_sample,
    tail_ball_sample,
    truncated_stable_sample,
)
from .systems import (
    FiniteSystem,
    IntervalMap,
    Potential,
    SampleCloud,
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

__version__ = "0.1.0"
