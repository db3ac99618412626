"""Exception hierarchy shared by all modules."""


class RevdoorError(Exception):
    """Base class for toolkit errors."""


class InvalidInputError(RevdoorError, ValueError):
    """A parameter violates a documented invariant or precondition."""


class DomainError(InvalidInputError):
    """An argument lies outside the mathematical domain of a formula."""


class NotConfiguredError(RevdoorError):
    """An optional model component was requested but not configured."""


class NumericError(RevdoorError, ArithmeticError):
    """A computation produced a non-finite intermediate."""


class ValidationError(InvalidInputError):
    """Scenario validation failure.

    ``field`` carries the dotted key that failed, e.g. ``"market.rho"``.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


def require_finite(**values: float) -> None:
    """Raise :class:`InvalidInputError` naming the first non-finite value."""
    import math

    for name, value in values.items():
        try:
            ok = math.isfinite(value)
        except TypeError:
            raise InvalidInputError(f"{name} must be a real number, got {value!r}") from None
        if not ok:
            raise InvalidInputError(f"{name} must be finite, got {value!r}")
