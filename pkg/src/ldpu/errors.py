"""Exception hierarchy shared by every module."""


class LDPUError(Exception):
    """Base class for all library errors."""


class ParameterError(LDPUError, ValueError):
    """A numeric parameter is outside its admissible range."""


class DomainError(LDPUError, ValueError):
    """An input or output value lies outside [0, 1]."""


class IntervalError(LDPUError, ValueError):
    """Interval endpoints are inverted or otherwise malformed."""


class CompositionError(LDPUError, ValueError):
    """Mechanisms cannot be combined in the requested way."""


class ModelError(LDPUError, ValueError):
    """A classifier file or payload failed to parse or validate."""


class DimensionError(LDPUError, ValueError):
    """A point does not match the dimension of the model or query."""


class InfeasibleError(LDPUError):
    """A search target cannot be reached inside the allowed range."""


class UnsupportedConfigurationError(LDPUError):
    """A configuration violates an assumption the solver relies on."""
