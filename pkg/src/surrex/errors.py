"""Exception hierarchy shared across the package."""


class SurrexError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(SurrexError, ValueError):
    """An argument violates a documented precondition."""


class DimensionError(SurrexError, ValueError):
    """Array shapes or lengths are inconsistent."""


class NumericError(SurrexError, ValueError):
    """Non-finite values where finite numbers are required."""


class DegenerateWeightsError(SurrexError, ValueError):
    """Sample weights carry no mass (all zero)."""


class EmptyRegionError(SurrexError, RuntimeError):
    """Rejection sampling exhausted its draw budget without acceptances."""


class ConfigurationError(SurrexError, ValueError):
    """An experiment configuration is inconsistent or incomplete."""


class AdapterError(SurrexError, RuntimeError):
    """A subprocess black-box adapter failed; message names the phase."""


class AdapterTimeoutError(AdapterError):
    """The child process did not answer within the request timeout."""
