"""Exception types shared across the package."""


class SuperAtomError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(SuperAtomError, ValueError):
    """Invalid configuration value or inconsistent operator shapes."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message if key is None else f"{key}: {message}")
        self.key = key


class ParameterError(SuperAtomError, ValueError):
    """Physical parameter outside its admissible range."""


class DimensionError(SuperAtomError, ValueError):
    """Operator/state dimensions do not match, or a size cap was exceeded."""


class IntegratorError(SuperAtomError, RuntimeError):
    """The no-jump integrator produced an inconsistent norm history."""


class NumericalError(SuperAtomError, ArithmeticError):
    """Non-finite amplitudes or matrix entries."""


class InvalidJumpError(SuperAtomError, ValueError):
    """A jump operator annihilated the state (channel had zero weight)."""


class DegenerateSteadyStateError(SuperAtomError, RuntimeError):
    """The Lindblad generator has no unique stationary state."""


class EmptyResultError(SuperAtomError, ValueError):
    """Not enough detection events to form the requested statistic."""
