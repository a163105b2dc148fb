"""Multicriteria job-search stopping problems and comparative statics checks."""

from ._core import (
    DominanceResult,
    FunctionClass,
    Grid,
    Membership,
    Pmf,
    SearchParams,
    SimulationStats,
    Solution,
    TabulatedUtility,
    Verdict,
    __version__,
    affine_transform,
    clamp_below,
    closure_check,
    common_grid,
    concordance_transfer,
    continuation_map,
    dominates,
    dominates_increasing_bruteforce,
    expectation,
    fosd_shift,
    is_member,
    marginal,
    mean_preserving_spread,
    reservation_utility,
    run_suite,
    sample_offers,
    simulate_search,
    tabulate_family,
    truncate,
    truncation_counterexample,
    verify_theorem,
)

__all__ = [name for name in dir() if not name.startswith("_")]
