"""Exception types shared across the package."""


class WaveBasisError(ValueError):
    """Base class for all package errors."""


class ParameterError(WaveBasisError):
    """An argument is outside the supported parameter range."""


class UnsupportedDimensionError(ParameterError):
    """Ambient dimension out of range (n >= 2 required)."""


class InvalidModeIndexError(ParameterError):
    """A (p, l, j) triple does not label a valid basis solution."""


class ChartBoundaryError(WaveBasisError):
    """Requested evaluation sits on (or too close to) a chart boundary."""


class PoleError(ChartBoundaryError):
    """Coordinate transform undefined at this point (x = 0 pole)."""


class DecayError(WaveBasisError):
    """Integrand tail estimate exceeds the requested tolerance."""


class ConfigError(WaveBasisError):
    """Inconsistent run configuration (bad flags, CFL violation, ...)."""
