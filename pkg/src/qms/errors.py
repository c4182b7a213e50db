"""Exception types shared across the package.

The CLI maps ``InvalidArgument`` to exit code 2 and the numerical family to
exit code 3.
"""


class QmsError(Exception):
    """Base class for all package errors."""


class InvalidArgument(QmsError, ValueError):
    pass


class NumericalFailure(QmsError, ArithmeticError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class SingularityError(NumericalFailure):
    pass


class ConvergenceFailure(NumericalFailure):
    def __init__(self, message, estimate=None, partial=None):
        super().__init__(message)
        self.estimate = estimate
        self.partial = partial


class ProtocolError(InvalidArgument):
    def __init__(self, message, step=None):
        super().__init__(message if step is None else f"step {step}: {message}")
        self.step = step
