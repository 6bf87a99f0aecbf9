"""Minimum relative-entropy Markov policies on absorbing chains.

Given a staged Markov prior on a graph whose walk stops at absorbing
states, this package finds the closest (in relative entropy) Markov policy
matching a prescribed initial distribution and prescribed first-arrival
time distributions at the absorbing states, via diagonal scaling of the
whole-horizon transition blocks.  An entropic-regularized transport variant
tilts the prior by edge costs; brute-force path-space oracles and a
Monte-Carlo simulator validate every piece.
"""

__version__ = "0.1.0"

from .chain_model import (
    FeasibilityReport,
    MarginalSpec,
    PriorLaw,
    StageKernel,
    StateSpace,
    support_feasibility_report,
    validate_marginals,
    validate_prior,
)
from .cost_transport import (
    EdgeCostSchedule,
    TiltedPrior,
    free_energy,
    solve_regularized,
    tilt_prior,
    tilted_divergence,
    tilted_path_law,
    transport_cost,
)
from .errors import (
    DimensionMismatch,
    DivisionBlowup,
    InitialMassOnAbsorbing,
    MassExceedsOne,
    NegativeEntry,
    NonStochasticOutput,
    NotConverged,
    Overflow,
    RowSumViolation,
    ScalingMismatch,
    StateSpaceTooLarge,
    StopbridgeError,
)
from .kernel_synthesis import Policy, induced_marginals, solve_bridge, synthesize
from .path_oracle import (
    PathLaw,
    cumulative_constraint_eval,
    enumerate_paths,
    ipf_project,
    ipf_project_endpoints,
    kl_divergence,
    markovianity_check,
    shared_bridges_check,
    total_variation,
)
from .problem_io import (
    ProblemFile,
    bundled_example_path,
    bundled_examples,
    load_problem,
    policy_document,
    problem_to_dict,
    save_problem,
)
from .simulator import EmpiricalLaw, empirical_distance, sample_paths
from .sinkhorn import (
    ScalingPair,
    SinkhornDiagnostics,
    classical_sb,
    sinkhorn_partial,
)
from .space_time_expansion import (
    PartitionedMatrix,
    prior_arrival_distribution,
    telescopic_expand,
)

__all__ = [
    "DimensionMismatch",
    "DivisionBlowup",
    "EdgeCostSchedule",
    "EmpiricalLaw",
    "FeasibilityReport",
    "InitialMassOnAbsorbing",
    "MarginalSpec",
    "MassExceedsOne",
    "NegativeEntry",
    "NonStochasticOutput",
    "NotConverged",
    "Overflow",
    "PartitionedMatrix",
    "PathLaw",
    "Policy",
    "PriorLaw",
    "ProblemFile",
    "RowSumViolation",
    "ScalingMismatch",
    "ScalingPair",
    "SinkhornDiagnostics",
    "StageKernel",
    "StateSpace",
    "StateSpaceTooLarge",
    "StopbridgeError",
    "TiltedPrior",
    "bundled_example_path",
    "bundled_examples",
    "classical_sb",
    "cumulative_constraint_eval",
    "empirical_distance",
    "enumerate_paths",
    "free_energy",
    "induced_marginals",
    "ipf_project",
    "ipf_project_endpoints",
    "kl_divergence",
    "load_problem",
    "markovianity_check",
    "policy_document",
    "prior_arrival_distribution",
    "problem_to_dict",
    "sample_paths",
    "save_problem",
    "shared_bridges_check",
    "sinkhorn_partial",
    "solve_bridge",
    "solve_regularized",
    "support_feasibility_report",
    "synthesize",
    "tilt_prior",
    "tilted_divergence",
    "tilted_path_law",
    "total_variation",
    "telescopic_expand",
    "transport_cost",
    "validate_marginals",
    "validate_prior",
]
