"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument or configuration value is outside its valid range."""


class NumericalError(ArithmeticError):
    """A numerical routine failed to reach its requested accuracy.

    ``partial`` carries the best value available when the routine gave up.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NumericalWarning(RuntimeWarning):
    """Emitted when a result had to be clamped by more than a small margin."""
