"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2,
NumericalError -> 3, InvariantViolation -> 4.
"""


class ConfigError(ValueError):
    """Invalid configuration value or malformed config file."""


class NumericalError(RuntimeError):
    """The integrator failed: solver divergence or positivity loss."""


class InvariantViolation(RuntimeError):
    """A monitored hard invariant failed at a recorded time."""
