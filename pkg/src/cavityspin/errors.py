"""Exception hierarchy shared across the package."""


class CavitySpinError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(CavitySpinError):
    """Operands live on incompatible Hilbert spaces."""


class FrequencyCollisionError(CavitySpinError):
    """Two rotating-term frequencies that must stay distinct coincide."""


class StepResolutionError(CavitySpinError):
    """Requested time step cannot resolve the fastest rotating term."""


class ConvergenceError(CavitySpinError):
    """An iterative solver failed to reach the requested tolerance."""


class RegimeError(CavitySpinError):
    """Parameters violate the operating regime required by an operation."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConfigError(CavitySpinError):
    """Run configuration is malformed or inconsistent."""

    def __init__(self, message, field=None):
        if field:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field
