"""Randomized approximate inference for binary belief networks.

Parse a network, bound its dependence structure, pick a conditioning set,
and estimate conditional probabilities to a requested relative error with
a certified failure probability.
"""

__version__ = "0.1.0"

from .errors import (
    BnetSyntaxError,
    BudgetExceededError,
    CategoryOutOfRangeError,
    CondsimError,
    CycleDetectedError,
    DuplicateNodeError,
    EmptyPosteriorError,
    IncompleteAssignmentError,
    InvalidSimplexPointError,
    LengthMismatchError,
    MissingParentBindingError,
    NetworkFormatError,
    NetworkTooLargeError,
    NonPositivePhiMinError,
    NonPositiveShapeError,
    OverlappingAssignmentsError,
    OverlappingSetsError,
    ProbabilityOutOfRangeError,
    RejectionBudgetExceededError,
    SampleBudgetExceededError,
    UndeclaredParentError,
    UndefinedDensityError,
    UnknownNodeError,
    WrongRowCountError,
    ZeroDenominatorError,
)
from .network import (
    BeliefNetwork,
    Cpt,
    conditional_row,
    joint_probability,
    parse_network,
    serialize_network,
)
from .exact import (
    OracleResult,
    exact_conditional,
    exact_distribution_over,
    exact_marginal,
    exact_marginal_result,
)
from .dependence import (
    CostEstimate,
    DependenceReport,
    NodeBounds,
    dependence_value,
    node_bounds,
    node_lambda,
    phi_min_lower_bound,
    predicted_cost,
    satisfies_ras,
)
from .stopping import (
    DirichletPosterior,
    PriorChoice,
    failure_probability_bound,
    log_density,
    mean_and_variance,
    posterior_update,
    regularized_incomplete_beta,
    should_stop,
    worst_case_sample_bound,
)
from .sampling import (
    RandomSource,
    RasEstimate,
    TrialGeneratorKind,
    conditioned_sample_batch,
    conditioned_trial,
    estimate_conditional_fraction,
    estimate_distribution_over,
    logic_sample,
    logic_sample_batch,
    mix_seed,
)
from .reformulate import (
    DEFAULT_SEED,
    GreedyStep,
    GreedyTrace,
    InferConfig,
    InferenceResult,
    Subproblem,
    bayes_ratio,
    combine_weighted,
    decompose,
    greedy_select,
    infer,
)

__all__ = [name for name in dir() if not name.startswith("_")]
