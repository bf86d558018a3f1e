"""Exception hierarchy shared by every module."""


class InhomogError(Exception):
    """Base class for all library errors."""


class DomainError(InhomogError, ValueError):
    """An argument lies outside the domain of an operation."""


class InvalidWordError(InhomogError, IndexError):
    """A word references a map index that the IFS does not have."""


class UnsupportedGeometryError(InhomogError, ValueError):
    """A map cannot carry a primitive to a primitive of a supported kind."""


class InsufficientDataError(InhomogError, ValueError):
    """Too few scales or radii to fit a slope."""


class BudgetExceededError(InhomogError, RuntimeError):
    """A generation or counting step would exceed its configured budget."""

    def __init__(self, what, bound, budget):
        self.what = what
        self.bound = bound
        self.budget = budget
        super().__init__(f"{what}: {bound} exceeds budget {budget}")
