class MetricIndexError(Exception):
    """Base class for errors raised by this package."""


class InvalidInputError(MetricIndexError, ValueError):
    pass


class LoadError(MetricIndexError):
    """A dataset source could not be read or contains a bad record."""


class ConfigError(MetricIndexError, ValueError):
    pass


class CorrectnessError(MetricIndexError):
    """An index answer disagreed with the brute-force oracle."""

    def __init__(self, message, query_id=None):
        super().__init__(message)
        self.query_id = query_id


class AuditError(MetricIndexError, AssertionError):
    """A structural invariant of an index does not hold."""
