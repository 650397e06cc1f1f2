"""Exception types shared across the package.

Everything derives from :class:`DeakitError` so callers can catch the whole
family with one clause; most leaves also subclass ``ValueError`` because they
signal bad inputs.
"""


class DeakitError(Exception):
    """Base class for all package-specific errors."""


class MalformedRowError(DeakitError, ValueError):
    """CSV row with the wrong field count or a non-numeric value."""


class NonPositiveInputError(DeakitError, ValueError):
    """A record carries an input value <= 0; reports the offending row id."""


class DuplicateIdError(DeakitError, ValueError):
    """Two records share the same id."""


class TooFewRowsError(DeakitError, ValueError):
    """An operation needs more rows than the dataset provides."""


class BadProportionsError(DeakitError, ValueError):
    """Synthetic cluster proportions do not sum to one."""


class DimensionMismatchError(DeakitError, ValueError):
    """Vector or matrix shapes are inconsistent with the model."""


class ThetaOutOfRangeError(DeakitError, ValueError):
    """Efficiency score outside [0, 1] handed to the class binning."""


class KOutOfRangeError(DeakitError, ValueError):
    """Requested cluster count outside [1, number of leaves]."""


class TooFewRecordsError(DeakitError, ValueError):
    """Fewer records than map units / folds require."""


class TooManyTermsError(DeakitError, ValueError):
    """Full polynomial expansion would exceed the supported term budget."""


class SingularSystemError(DeakitError, ArithmeticError):
    """Normal equations unsolvable (rank-deficient with zero ridge)."""


class EmptyClusterError(DeakitError, ValueError):
    """A cluster with zero records where a positive count is required."""


class EmptyTrainingFoldError(DeakitError, ValueError):
    """A cross-validation split left no training records."""


class SolverFailureError(DeakitError, RuntimeError):
    """The LP solver returned a non-optimal status where optimality is guaranteed."""
