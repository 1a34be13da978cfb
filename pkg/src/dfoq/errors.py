"""Exception types shared across the package."""


class DfoqError(Exception):
    """Base class for errors raised by this package."""


class InvalidInputError(DfoqError, ValueError):
    """Malformed or non-finite input (bad shapes, NaN/inf entries, bad flags)."""


class EvaluationError(DfoqError, RuntimeError):
    """A function oracle returned a non-finite value."""

    def __init__(self, point, value):
        self.point = point
        self.value = value
        super().__init__(f"oracle returned non-finite value {value!r} at point {point!r}")


class InfeasibleError(DfoqError, RuntimeError):
    """An interpolation system has no solution at the working tolerance."""


class NotPoisedError(DfoqError, RuntimeError):
    """A computation required an invertible interpolation system and did not get one."""


class DirectionDomainError(DfoqError, ValueError):
    """A probe direction lies outside the column space the bound is valid on."""
