class DomainError(ValueError):
    """Input outside the domain of a function or parameter space."""


class NumericalError(ArithmeticError):
    """A numerical routine (quadrature, root finding) failed to converge."""


class SingularInformationError(NumericalError):
    """Observed information at the optimum is not positive definite.

    The offending fit is attached as ``fit``.
    """

    def __init__(self, message, fit=None):
        super().__init__(message)
        self.fit = fit


class DataError(ValueError):
    """Malformed or out-of-domain input data."""
