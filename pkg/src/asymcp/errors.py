class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class BracketError(ValueError):
    """Both ends of a search bracket fall on the same side of the threshold."""


class StepSizeError(RuntimeError):
    """An integration step left the simplex beyond the clamping tolerance."""
