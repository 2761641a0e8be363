"""Exception hierarchy shared across the package."""


class RejectActiveError(Exception):
    """Base class for all package errors."""


class ConfigurationError(RejectActiveError, ValueError):
    """Invalid constants, learner parameters or CLI options."""


class InputError(RejectActiveError, ValueError):
    """Malformed input such as a dimension mismatch or an empty sample."""


class LoadError(RejectActiveError, ValueError):
    """A CSV file could not be turned into a labeled pool."""

    def __init__(self, message, row=None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class FitError(RejectActiveError, ValueError):
    """Not enough usable points to fit a model or a rate."""


class NumericError(RejectActiveError, ArithmeticError):
    """A training loss or statistic became non-finite."""


class RunAborted(RejectActiveError, RuntimeError):
    """Base class for conditions that stop an engine run early."""


class RegionStarvationError(RunAborted):
    """Rejection sampling ran out of attempts before collecting enough points."""

    def __init__(self, accepted, requested, attempts):
        super().__init__(
            f"region starvation: accepted {accepted} of {requested} points "
            f"after {attempts} attempts"
        )
        self.accepted = accepted
        self.requested = requested
        self.attempts = attempts


class PoolExhaustionError(RunAborted):
    """The finite pool has no candidate points left."""

    def __init__(self, accepted, requested):
        super().__init__(
            f"pool exhausted: accepted {accepted} of {requested} points"
        )
        self.accepted = accepted
        self.requested = requested
