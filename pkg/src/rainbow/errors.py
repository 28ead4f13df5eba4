"""Exception hierarchy shared by every module."""


class RainbowError(Exception):
    pass


class ParameterError(RainbowError, ValueError):
    """An argument is out of range or inconsistent with the instance."""


class ParseError(RainbowError, ValueError):
    """A family-system document could not be parsed."""


class ValidationError(RainbowError, ValueError):
    """A parsed document violates a structural invariant."""


class PreconditionError(RainbowError, ValueError):
    pass


class InvariantViolation(RainbowError, AssertionError):
    """An internal consistency check failed; indicates a bug."""
