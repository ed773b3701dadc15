"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class SingularModeError(ArithmeticError):
    """A momentum mode has a vanishing gap with a non-removable singularity."""

    def __init__(self, message, k=None):
        super().__init__(message)
        self.k = k


class ResourceError(RuntimeError):
    """The requested many-body computation exceeds the supported size."""


class QuadratureError(ArithmeticError):
    """Numerical integration failed to reach the requested tolerance."""


class FitError(RuntimeError):
    """A curve fit did not converge; carries the best residual found."""

    def __init__(self, message, best_residual=float("nan"), best_parameters=None):
        super().__init__(message)
        self.best_residual = best_residual
        self.best_parameters = best_parameters
