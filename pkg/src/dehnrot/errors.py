"""Exception and warning types shared across the package."""

from __future__ import annotations


class DehnRotError(Exception):
    """Base class for all errors raised by dehnrot."""


class SpecError(DehnRotError, ValueError):
    """A map-spec document or MapSpec field is invalid."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(DehnRotError, ValueError):
    """A numeric option is outside its admissible range."""


class NumericalError(DehnRotError, ArithmeticError):
    """A non-finite coordinate appeared during iteration."""

    def __init__(self, message: str, step: int | None = None, seed: int | None = None):
        self.step = step
        self.seed = seed
        super().__init__(message)


class EmptyMaskError(DehnRotError):
    """A basin mask has no true cell at all."""


class InconclusiveError(DehnRotError):
    """A finite search was truncated before it could decide."""


class PreconditionError(DehnRotError):
    """An input violates a hypothesis required by a certification pipeline."""


class FixedPointSuspected(UserWarning):
    """Raised (as a warning) when bricks cannot be certified free.

    ``locations`` holds approximate fixed points of the lift, one per cluster
    of non-free bricks.
    """

    def __init__(self, message: str, locations=()):
        self.locations = list(locations)
        super().__init__(message)
