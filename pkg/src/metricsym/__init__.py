"""Symmetrization toolkit for finite metric measure spaces.

Decreasing rearrangements with exact step-function calculus,
rearrangement-invariant norms, maximal operators, covering
constructions, inequality verification reports, and control-metric
(Carnot-Caratheodory) geometry on lattices.
"""

from .carnot import (
    CCGrid,
    VectorFieldSystem,
    ball_count_dimension,
    build_cc_grid,
    build_cc_space,
    cc_distance,
    horizontal_gradient,
    jerison_check,
    log_log_slope,
    vector_field_system,
)
from .errors import (
    ArgumentError,
    ContainmentError,
    CoverageError,
    DomainError,
    HypothesisViolation,
    MetricSymError,
    ResolutionError,
    SupportError,
    UnsupportedSpecError,
    WindowError,
)
from .maximal import (
    CoveringReport,
    MaximalField,
    construct_covering,
    covering_to_json,
    field_from_csv,
    field_to_csv,
    hl_maximal,
    hl_maximal_naive,
    riesz_constant,
    sharp_maximal,
)
from .rearrange import (
    RISpaceSpec,
    StepFunction,
    associate_fundamental_function,
    average_star,
    average_star_derivative,
    distribution,
    fundamental_function,
    hardy_p,
    oscillation,
    rearrangement,
    ri_norm,
    step_from_csv,
    step_to_csv,
    ypr_norm,
)
from .space import (
    BallIndexSet,
    DoublingStats,
    GridInfo,
    MetricMeasureSpace,
    ball,
    build_grid_space,
    center_index,
    doubling_stats,
    doubling_to_csv,
    growth_constant,
    space_from_json,
    space_to_json,
)
from .verify import (
    InequalityReport,
    SobolevPair,
    bi_curve,
    bi_lhs_curve,
    counterexample_run,
    embedding_check,
    euclidean_gradient_pair,
    faber_krahn,
    make_shrinking_pair,
    poincare_constant,
    report_to_csv,
    report_to_json,
    support_gradient_ratio,
    support_measure,
)

__version__ = "1.0.0"
