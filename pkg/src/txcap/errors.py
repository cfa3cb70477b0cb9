class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class FeasibilityError(ValueError):
    """The request is well defined but outside the validated size limits."""


class ValidityError(ValueError):
    """A computed quantity violates a structural requirement (e.g. K <= 0)."""
