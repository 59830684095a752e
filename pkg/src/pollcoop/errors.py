"""Exception types shared across the package."""


class PollCoopError(Exception):
    """Base class for all package errors."""


class InvalidSpecError(PollCoopError):
    """Raised when an operation requires a regular spec and gets an invalid one."""

    def __init__(self, report):
        self.report = report
        super().__init__("invalid game spec: " + "; ".join(v.message for v in report.violations))


class InvalidCoalitionError(PollCoopError, ValueError):
    pass


class CapacityError(PollCoopError, ValueError):
    pass


class DomainError(PollCoopError, ValueError):
    pass


class UnsupportedProfileError(PollCoopError):
    """Clipping is active somewhere on the horizon; closed forms do not apply."""


class InvalidControlError(PollCoopError, ValueError):
    pass


class StructuralError(PollCoopError, ValueError):
    """A characteristic-function table is incomplete or malformed."""


class DegenerateImputationSetError(PollCoopError):
    def __init__(self, shortfall: float):
        self.shortfall = shortfall
        super().__init__(f"V(N) is below the sum of singleton values by {shortfall:.6g}")


class ConfigError(PollCoopError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
