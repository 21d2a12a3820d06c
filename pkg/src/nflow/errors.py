"""Exception types shared across the package."""


class NFlowError(Exception):
    """Base class for all package-specific failures."""


class NonPositiveField(NFlowError):
    """A field lost (or never had) the positivity an operation requires."""


class DomainNotMultipleOfPi(NFlowError):
    """An operation that only makes sense on [0, k*pi] was asked on another domain."""


class ExponentOutOfRange(NFlowError):
    """The nonlinearity exponent p lies outside the range an operation supports."""


class NoRoot(NFlowError):
    """A bracketed root solve has no solution for the given data."""


class StepCollapse(NFlowError):
    """Adaptive time stepping was driven below the minimum step size."""


class ConfigError(NFlowError):
    """A run configuration is malformed or inconsistent."""
