"""Exception types shared across the package."""


class TopoStabError(Exception):
    """Base class for all package errors."""


class ValidationError(TopoStabError, ValueError):
    """Malformed input: bad shapes, non-finite values, invalid parameters."""


class BudgetError(TopoStabError):
    """A computation would exceed its configured size budget."""


class BoundViolationError(TopoStabError, AssertionError):
    """A bound that must hold unconditionally was violated.

    Raised only for the corrected bounds; a failure means the implementation
    is wrong, not the theory.
    """
