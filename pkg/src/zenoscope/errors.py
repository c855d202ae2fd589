"""Exception types shared across the package."""


class ZenoscopeError(Exception):
    """Base class for all package errors."""


class ConfigError(ZenoscopeError):
    """Invalid parameters or configuration (CLI exit code 2)."""


class NumericsError(ZenoscopeError):
    """Numerical failure: non-convergence, divergence, leakage (CLI exit code 3)."""


class IntegrationError(NumericsError):
    """Quadrature did not converge to the requested tolerance.

    Carries the last error estimate so callers can report it.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class DivergentIntegralError(NumericsError):
    """The requested frequency integral diverges for this Ohmicity/temperature."""


class TruncationLeakageError(NumericsError):
    """Fock-space truncation leakage exceeded the monitoring threshold."""

    def __init__(self, message, leakage=None):
        super().__init__(message)
        self.leakage = leakage


class NoCrossingError(ZenoscopeError):
    """Bisection bracket does not change sign (CLI exit code 4).

    Carries the objective values at both bracket endpoints.
    """

    def __init__(self, message, f_lo=None, f_hi=None):
        super().__init__(message)
        self.f_lo = f_lo
        self.f_hi = f_hi
