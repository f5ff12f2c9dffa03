"""Exception hierarchy shared by all smoothlab modules."""


class SmoothlabError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgument(SmoothlabError, ValueError):
    pass


class NonIntegrableWeight(InvalidArgument):
    pass


class DomainError(SmoothlabError, ValueError):
    pass


class ParameterError(InvalidArgument):
    pass


class ClassParameterError(ParameterError):
    """An (alpha, beta) range or lambda window constraint is violated; ``bound`` names it."""

    def __init__(self, message, bound=None):
        super().__init__(message)
        self.bound = bound


class AliasingRiskError(InvalidArgument):
    pass


class DegreeTruncationError(InvalidArgument):
    pass


class UnsupportedOracle(InvalidArgument):
    pass


class InsufficientData(SmoothlabError, ValueError):
    pass


class EvaluationError(SmoothlabError, ArithmeticError):
    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class AccuracyNotReached(SmoothlabError, ArithmeticError):
    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class SolverStall(SmoothlabError, ArithmeticError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class UnknownFunction(InvalidArgument):
    pass
