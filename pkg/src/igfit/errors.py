"""Exception types raised by igfit."""


class IGFitError(ValueError):
    """Base class for all igfit input and numerical errors."""


class DomainError(IGFitError):
    """An argument lies outside the domain of the function."""


class DegenerateSampleError(IGFitError):
    """The sample carries too little variation to estimate parameters."""


class NumericalError(IGFitError):
    """A quadrature or iterative routine failed to reach its tolerance."""
