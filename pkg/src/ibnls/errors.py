"""Exception types shared across the package."""


class IBNLSError(Exception):
    pass


class DomainError(IBNLSError, ValueError):
    """Parameters outside the range where a quantity is defined."""


class HypothesisError(IBNLSError, ValueError):
    def __init__(self, report):
        self.report = report
        failed = [c.text for c in report.checks if not c.satisfied]
        super().__init__(f"{report.theorem}: hypotheses not satisfied: " + "; ".join(failed))


class GridError(IBNLSError, ValueError):
    pass


class NonConvergence(IBNLSError, RuntimeError):
    def __init__(self, message, iterations=None, history=None, state=None):
        super().__init__(message)
        self.iterations = iterations
        self.history = history
        self.state = state  # last iterate, when the solver has one


class DegenerateScaling(IBNLSError, ArithmeticError):
    pass


class ConsistencyError(IBNLSError, AssertionError):
    """Two evaluation paths of the same quantity disagree beyond tolerance."""


class NumericalFailure(IBNLSError, FloatingPointError):
    pass


class ConfigError(IBNLSError, ValueError):
    pass
