"""Locally squeezed states of a free massive scalar field.

Numerical tools for Bogoliubov transformations generated by smeared Wick
squares: the one-particle action and its norm bounds, fixed-particle
estimates, time-zero squeezing coefficients, the first-order wedge
relative entropy, and a finite-mode Fock model that checks the operator
identities directly.
"""
from .errors import AccuracyError, ConfigurationError, InconclusiveError, InputError, LocSqueezeError
from .kinematics import MassShellSample, ModelParams, lp_norm, omega, pauli_jordan, two_point
from .quadrature import QuadratureSpec
from .testfunctions import SchwartzElement, SchwartzSum, load_test_function, make_wedge_bump

__all__ = [
    "AccuracyError", "ConfigurationError", "InconclusiveError", "InputError", "LocSqueezeError",
    "MassShellSample", "ModelParams", "QuadratureSpec", "SchwartzElement", "SchwartzSum",
    "load_test_function", "lp_norm", "make_wedge_bump", "omega", "pauli_jordan", "two_point",
]
__version__ = "0.1.0"
