"""Exception types raised across the package."""


class CircIncError(Exception):
    """Base class for all package errors."""


class DegenerateInput(CircIncError, ValueError):
    pass


class ToleranceRequired(CircIncError, ValueError):
    pass


class NoValidSplit(CircIncError, ValueError):
    pass


class NotATriple(CircIncError, ValueError):
    pass


class NotPrimitive(CircIncError, ValueError):
    pass


class HypothesisViolated(CircIncError, ValueError):
    pass


class EmptyE(CircIncError, ValueError):
    """Raised when a level-set input region has zero measure."""


class ConfigError(CircIncError, ValueError):
    """Invalid experiment configuration; carries a field path for diagnostics."""

    def __init__(self, message: str, field: str | None = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)
