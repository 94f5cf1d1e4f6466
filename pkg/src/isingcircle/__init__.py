"""Exact arithmetic, circle dynamics and gadget constructions for the Ising
model with a complex external field on the unit circle."""

from .errors import (
    BudgetExceeded,
    CertificationFailed,
    CoverViolated,
    DegreeViolation,
    HypothesisFailed,
    Indeterminate,
    InconsistentOracle,
    IsingCircleError,
    NoConvergence,
    NoPerfectMatching,
    PreconditionViolated,
    SeedUnavailable,
    SeparationFailure,
    TooLarge,
    ZeroDenominator,
)
from .exact import (
    Angle,
    GaussianRational,
    UnitPoint,
    continued_fraction_round,
    format_gaussian,
    parse_angle,
    parse_gaussian,
    point_angle,
    rational_circle_point,
)
from .dynamics import (
    LiftedMap,
    MapParams,
    apply_map,
    attracting_fixed_point_mp,
    cover_and_contract,
    covering_easy_even,
    derivative_magnitude,
    lambda_threshold,
    mobius_classify,
    near_ap_triple,
    orbit,
)
from .ising import (
    Graph,
    RootedTree,
    TreeNode,
    compile_partition,
    lee_yang_zeros,
    partition_bruteforce,
    partition_function,
    partition_value,
    tree_partition,
)
from .gadgets import build_H_theta, implement_field, seed_pair_search, select_bhat
from .reduction import Oracle, ReductionParams, partition_via_oracle, recover_ratio
from .minusone import (
    count_perfect_matchings,
    degree_reduce,
    fisher_gadget,
    matching_chain,
    odd_subgraph_polynomial,
    partition_minusone,
    pm_to_ising_instance,
)

__version__ = "0.1.0"
