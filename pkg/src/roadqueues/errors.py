"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigError(ValueError):
    """A configuration document is malformed or inconsistent."""


class NonConvergenceError(RuntimeError):
    """The fixed-point iteration exhausted its budget without settling.

    Carries the iterate trace so callers can inspect or persist it.
    """

    def __init__(self, message: str, trace):
        super().__init__(message)
        self.trace = list(trace)
