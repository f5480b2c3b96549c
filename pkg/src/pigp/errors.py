"""Exception hierarchy shared by all modules."""


class PIGPError(Exception):
    """Base class for library errors."""


class InputError(PIGPError, ValueError):
    """Malformed arguments: wrong dimensions, invalid parameter values."""


class CapabilityError(PIGPError, NotImplementedError):
    """A requested derivative order or mean family is not supported."""


class NumericalError(PIGPError, ArithmeticError):
    """Factorization failure after the maximum jitter, or non-finite state."""


class SamplingError(PIGPError):
    """Every HMC chain diverged."""


class OptimizationError(PIGPError):
    """All optimizer starts failed."""


class ConfigError(PIGPError, ValueError):
    """Invalid study configuration."""
