"""Exception and warning types shared across the package."""


class DarbouxLabError(Exception):
    """Base class for all errors raised by darbouxlab."""


class DomainError(DarbouxLabError, ValueError):
    """An argument lies outside the region where an operation is defined."""


class PoleError(DomainError):
    """Evaluation requested at (or numerically on top of) a pole."""


class ParameterError(DarbouxLabError, ValueError):
    """Parameters violate a structural precondition."""


class DegenerateError(DarbouxLabError, ArithmeticError):
    """A factor that must be nonzero vanished.

    ``index`` is the recurrence/chain index at which it happened (if any) and
    ``factor`` a short description of the vanishing quantity.
    """

    def __init__(self, message, index=None, factor=None):
        super().__init__(message)
        self.index = index
        self.factor = factor


class NonConvergenceError(DarbouxLabError, ArithmeticError):
    """An iterative procedure hit its iteration cap."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []


class ConsistencyError(DarbouxLabError):
    """Two independent computations of the same quantity disagree."""


class ContractError(DarbouxLabError, TypeError):
    """An input object does not have the structure an operation requires."""


class ConditioningWarning(UserWarning):
    """Result computed, but in a numerically ill-conditioned regime."""


class ConvergenceWarning(UserWarning):
    """Convergence is slow or not guaranteed for the given input."""
