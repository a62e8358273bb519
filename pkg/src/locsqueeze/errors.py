"""Exception types shared by all modules.

Each error class maps onto one CLI exit code so that the command line
front end can translate failures without inspecting messages.
"""


class LocSqueezeError(Exception):
    """Base class for package errors."""

    exit_code = 1


class InputError(LocSqueezeError, ValueError):
    """Malformed or out-of-domain input (non-finite values, bad shapes)."""

    exit_code = 1


class ConfigurationError(InputError):
    """A model or quadrature configuration cannot be honoured."""

    exit_code = 1


class AccuracyError(LocSqueezeError, ArithmeticError):
    """A numerical procedure failed to reach its requested tolerance.

    Parameters
    ----------
    message : str
        Human readable description.
    residual : float, optional
        Best available error estimate at the point of failure.
    """

    exit_code = 2

    def __init__(self, message, residual=float("nan")):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class InconclusiveError(LocSqueezeError):
    """An oracle check could not decide (e.g. truncation leakage too large)."""

    exit_code = 3
