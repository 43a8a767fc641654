"""Exception hierarchy shared by the library and the command-line frontend."""


class OnsagerError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(OnsagerError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigurationError(OnsagerError, ValueError):
    """Inconsistent or unrecognized configuration."""


class FormatError(OnsagerError, ValueError):
    """Malformed external input (tabulated potentials, config files)."""


class ValidationError(OnsagerError, ValueError):
    """Input is well formed but violates a declared property."""


class StateError(OnsagerError, RuntimeError):
    """An object lacks data required by the requested operation."""


class NumericalError(OnsagerError, ArithmeticError):
    """Non-finite values appeared during a computation."""
