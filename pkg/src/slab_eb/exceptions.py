class ConfigurationError(ValueError):
    """Invalid model or slab configuration."""


class DomainError(ValueError):
    """Argument outside the set where the requested quantity is defined."""


class NumericalError(ArithmeticError):
    """A quadrature or root-finder failed to reach its target accuracy."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate
