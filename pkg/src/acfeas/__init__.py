"""AC power-flow feasibility on star networks and its subset-sum encoding."""

from .power_model import (
    Bus,
    BusKind,
    FeasibilityReport,
    Line,
    LineParams,
    NetworkError,
    NetworkInstance,
    PhaseSolution,
    SolutionError,
    apparent_power_squared,
    capacity_from_delta_max,
    check_feasibility,
    delta_max_from_capacity,
    line_flow,
    validate_network,
)
from .reduction import (
    DEFAULT_PARAMS,
    ExtremeFlows,
    NotReductionForm,
    ReductionError,
    ReductionParams,
    SubsetSumInstance,
    WitnessError,
    decode_witness,
    encode_subset_sum,
    lemma1_gap,
    lemma2_check,
    lemma2_condition_holds,
    receiving_end_extremes,
    recognize_reduction_form,
    witness_from_subset,
)
from .solvers import (
    Method,
    SolveOutcome,
    Verdict,
    grid_feasibility_search,
    solve_reduction_brute,
    solve_reduction_instance,
    subset_sum_brute,
    subset_sum_dp,
)

__version__ = "0.1.0"
