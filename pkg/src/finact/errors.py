"""Exception types raised by finact."""


class FinactError(Exception):
    """Base class for all finact errors."""


class SingularityError(FinactError, ArithmeticError):
    """The fin magnet got closer to a magnet than the guard distance allows."""


class UnsupportedConfigurationError(FinactError, ValueError):
    pass


class IncompleteScanError(FinactError):
    """The sign-change scan could not bracket every root."""


class OutOfBasinError(FinactError, ValueError):
    """An amplitude lies outside the region bounded by the saddles."""


class RangeError(FinactError, ValueError):
    pass


class NonUniformSamplingError(FinactError, ValueError):
    pass


class ConfigError(FinactError, ValueError):
    """Malformed or inconsistent scenario configuration."""
