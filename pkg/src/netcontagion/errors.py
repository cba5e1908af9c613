"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`NetContagionError`.  The three mid-level classes map onto the CLI
exit codes (usage / ingestion / numeric).
"""


class NetContagionError(Exception):
    """Base class for all package errors."""


class ConfigurationError(NetContagionError, ValueError):
    """Bad parameter, unknown layer/attribute token, invalid generator config."""


class IngestError(NetContagionError, ValueError):
    """A cohort or nomination file could not be parsed or validated.

    ``row`` is the 1-based data row (header excluded) when known.
    """

    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class UnknownNodeError(NetContagionError, KeyError):
    """Participant id not present in the cohort/network."""

    def __str__(self):
        return f"unknown participant id: {self.args[0]!r}"


class NumericError(NetContagionError, ArithmeticError):
    """Base class for failures of a statistical computation."""


class UndefinedResultError(NumericError):
    """The requested statistic has no defined value on this input."""


class DegenerateNullError(NumericError):
    """The permutation null distribution has zero variance."""


class SeparationError(NumericError):
    """Perfect or quasi-complete separation in a logistic fit."""

    def __init__(self, message, term=None):
        self.term = term
        super().__init__(message)


class RankDeficiencyError(NumericError):
    """Design matrix is not of full column rank."""

    def __init__(self, message, columns=()):
        self.columns = tuple(columns)
        super().__init__(message)


class ConvergenceError(NumericError):
    """An iterative procedure failed to converge."""

    def __init__(self, message, trace=None):
        self.trace = trace
        super().__init__(message)


class SizeError(NumericError):
    """Input is too large for the requested exact/dense method."""


class AttributeTypeError(NetContagionError, TypeError):
    """Attribute or outcome of the wrong kind (e.g. numeric where categorical needed)."""
