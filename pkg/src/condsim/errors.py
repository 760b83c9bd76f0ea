"""Exception hierarchy shared by every condsim module.

All package errors derive from :class:`CondsimError` so callers can catch
one base class. Text-format problems additionally carry the offending line
number when it is known.
"""


class CondsimError(Exception):
    """Base class for every error raised by this package."""


class NetworkFormatError(CondsimError):
    """A ``.bnet`` source or a network definition is malformed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BnetSyntaxError(NetworkFormatError):
    """A line does not match the grammar of the text format."""


class DuplicateNodeError(NetworkFormatError):
    """The same node identifier was declared twice."""


class UndeclaredParentError(NetworkFormatError):
    """A parent list names a node that has not been declared yet."""


class WrongRowCountError(NetworkFormatError):
    """A table has a number of rows other than 2 ** (parent count)."""


class ProbabilityOutOfRangeError(NetworkFormatError):
    """A probability entry is not strictly between 0 and 1."""


class CycleDetectedError(NetworkFormatError):
    """The parent relation contains a directed cycle."""


class UnknownNodeError(CondsimError):
    """An assignment or node list refers to a node the network lacks."""


class IncompleteAssignmentError(CondsimError):
    """A full assignment was required but some node is unbound."""


class MissingParentBindingError(CondsimError):
    """A parent value needed for a table lookup is unbound."""


class NetworkTooLargeError(CondsimError):
    """The exact oracle was asked to enumerate an oversized network."""


class OverlappingAssignmentsError(CondsimError):
    """Two assignments that must bind disjoint node sets overlap."""


class CategoryOutOfRangeError(CondsimError):
    """A category index is outside the posterior's range."""


class EmptyPosteriorError(CondsimError):
    """The requested statistic needs at least one effective observation."""


class InvalidSimplexPointError(CondsimError):
    """A density argument is not a point on the probability simplex."""


class UndefinedDensityError(CondsimError):
    """The Dirichlet density is undefined for the posterior parameters."""


class NonPositiveShapeError(CondsimError):
    """A Beta shape parameter must be strictly positive."""


class NonPositivePhiMinError(CondsimError):
    """A probability lower bound must be strictly positive."""


class BudgetExceededError(CondsimError):
    """A sampling run hit a hard resource cap before certifying.

    Instances carry partial diagnostics: the phase that failed, the number
    of scored trials, and the cap that was hit.
    """

    def __init__(self, message: str, *, phase: str = "", trials: int = 0,
                 cap: int | None = None):
        self.phase = phase
        self.trials = trials
        self.cap = cap
        super().__init__(message)


class SampleBudgetExceededError(BudgetExceededError):
    """The stopping rule was still unsatisfied at the trial cap."""


class RejectionBudgetExceededError(BudgetExceededError):
    """Rejection sampling ran too long without an accepted trial."""


class LengthMismatchError(CondsimError):
    """Two vectors that must have equal length do not."""


class ZeroDenominatorError(CondsimError):
    """A probability ratio has a non-positive denominator."""


class OverlappingSetsError(CondsimError):
    """Query, evidence, and conditioning sets must be pairwise disjoint."""
