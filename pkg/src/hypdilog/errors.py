"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of a function."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


class InconclusiveError(RuntimeError):
    """A numerical comparison could not single out an answer."""


class BudgetError(RuntimeError):
    """A search exceeded its configured node or step budget."""


class ConstructionError(RuntimeError):
    """A geometric construction failed an internal consistency check."""


class AmbiguityError(RuntimeError):
    """A geometric decision fell inside a tolerance band."""
