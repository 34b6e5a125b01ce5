"""Exception types raised by trapcc."""


class TrapccError(Exception):
    pass


class NotRealizable(TrapccError, ValueError):
    pass


class AmbiguousEmbedding(TrapccError, ValueError):
    pass


class NegativeRadicand(TrapccError, ValueError):
    pass


class SingularFit(TrapccError, ValueError):
    pass


class InadmissibleChartPoint(TrapccError, ValueError):
    pass


class DegenerateDistance(TrapccError, ValueError):
    pass


class SamplerExhausted(TrapccError, RuntimeError):
    pass


class NotConverged(TrapccError, ValueError):
    pass


class SolverError(TrapccError, RuntimeError):
    """Newton failure. ``solution`` holds the best iterate reached, if any."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class MaxItersExceeded(SolverError):
    pass


class LeftPositiveOrthant(SolverError):
    pass


class SingularJacobian(SolverError):
    pass
