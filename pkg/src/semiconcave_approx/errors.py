"""Exception types raised by the library."""


class InvalidArgumentError(ValueError):
    """Malformed input such as an empty vector or an out-of-range index."""


class InvalidParameterError(ValueError):
    """A numeric parameter (epsilon, p, ...) outside its admissible range."""


class DomainError(ValueError):
    """Evaluation point outside the family's domain box."""


class DataError(ValueError):
    """Non-finite samples encountered while building an approximation."""


class DegenerateRegionError(ValueError):
    """A metric was requested over an empty point set."""


class UnsupportedModeError(ValueError):
    """The operation is not defined for the approximation mode in use."""
