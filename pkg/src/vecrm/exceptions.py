class VecrmError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(VecrmError, ValueError):
    """Invalid experiment, scenario or learner configuration."""


class GeometryError(VecrmError, ValueError):
    """A geometric query was made outside its domain of definition."""


class NoUpcomingRSUError(GeometryError):
    """A vehicle in an uncovered gap has no RSU ahead in its travel direction."""


class EnumerationTooLarge(VecrmError):
    """Exhaustive search would enumerate more joint profiles than allowed."""


class InputError(VecrmError, ValueError):
    """Malformed numeric input (unnormalized distribution, all-zero vector, ...)."""
