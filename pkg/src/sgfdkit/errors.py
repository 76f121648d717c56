"""Exception types shared across the package.

The CLI maps these onto process exit codes: configuration problems exit
with 2, stability refusals with 3, numerical aborts with 4.
"""


class SgfdError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SgfdError, ValueError):
    """Invalid or unparseable configuration input."""


class ModelError(SgfdError, ValueError):
    """Material model violates a physical or structural constraint."""


class CoefficientError(SgfdError, ValueError):
    """A coefficient solve failed or produced unusable weights."""


class DispersionSampleError(SgfdError, ValueError):
    """A dispersion sample fell outside the evaluable domain."""


class StabilityError(SgfdError, RuntimeError):
    """A configuration failed the Courant stability check."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NumericsError(SgfdError, RuntimeError):
    """Non-finite field values appeared during time stepping."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step
