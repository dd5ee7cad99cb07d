"""Exception types raised by the package."""


class RevcycError(Exception):
    """Base class for all package errors."""


class ContractViolation(RevcycError, ValueError):
    """An argument falls outside an operation's stated domain."""


class NumericalError(RevcycError, ArithmeticError):
    """An iterative method failed to converge."""


class DegenerateJacobianError(NumericalError):
    pass


class UnsupportedLawError(RevcycError, TypeError):
    pass


class EmptyDataError(RevcycError, ValueError):
    pass


class InsufficientDataError(RevcycError, ValueError):
    pass


class SingularPointError(RevcycError, ValueError):
    """Evaluation requested at (or too close to) an inverse-square singularity."""


class ParseError(RevcycError, ValueError):
    def __init__(self, path, line, message):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}")
