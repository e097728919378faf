"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested operation."""


class InfeasibleError(DomainError):
    """No threshold gamma satisfies the requested dependence budget."""


class HypothesisNotSatisfied(DomainError):
    """The conditions under which a closed-form identity holds are violated."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap before reaching tolerance."""
