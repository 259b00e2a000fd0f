"""Exception hierarchy shared across the toolkit."""


class ForensicsError(Exception):
    """Base class for all domain errors raised by votepeaks."""


class ValidationError(ForensicsError):
    """Input data failed schema or invariant validation."""


class UndefinedMetricError(ForensicsError):
    """A percentage was requested for a station whose denominator is zero."""


class EmptyDatasetError(ForensicsError):
    """An analysis was asked to run on zero stations after filtering."""
