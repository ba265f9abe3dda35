class DomainError(ValueError):
    """A parameter tuple lies outside the domain where a formula is defined."""


class ResourceError(RuntimeError):
    """A construction would exceed the configured node budget."""


class NumericError(ArithmeticError):
    """A root search failed to bracket or converge."""
