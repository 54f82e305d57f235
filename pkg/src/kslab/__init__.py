"""Finite-volume laboratory for the 2D chemotaxis-consumption system with
singular sensitivity.

The package evolves the cell density u alongside either the signal v
(original formulation, drift chi*(u/v)*grad v) or the transformed signal
w = -log(v/||v0||_inf) (drift chi*u*grad w, no singularity), and
continuously monitors the conserved mass, the pointwise signal bounds,
the entropy and gradient Lyapunov functionals, and the closed-form
smallness thresholds that govern decay and boundedness.
"""

from .errors import ConfigError, InvariantViolation, NumericalError
from .grid import FluxField, Grid
from .model import Params, ThresholdReport, a_window, c0_of, threshold_boundedness
from .solver import State, StepReport

__all__ = [
    "ConfigError",
    "InvariantViolation",
    "NumericalError",
    "FluxField",
    "Grid",
    "Params",
    "ThresholdReport",
    "a_window",
    "c0_of",
    "threshold_boundedness",
    "State",
    "StepReport",
]

__version__ = "0.1.0"
