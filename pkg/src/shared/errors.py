"""Exception hierarchy for the arena."""


class ArenaError(Exception):
    """Base class for every error raised by arena code."""


class InvalidArgumentError(ArenaError, ValueError):
    pass


class PreconditionError(ArenaError, ValueError):
    pass


class ConfigurationError(ArenaError, ValueError):
    pass


class ApproximationError(ArenaError, ArithmeticError):
    """A sampled field produced non-finite values."""


class SetupError(ArenaError, RuntimeError):
    """Precomputation failed (quadrature, equivalent-density fits)."""


class InternalStateError(ArenaError, RuntimeError):
    pass


class ConvergenceError(ArenaError, RuntimeError):
    """An iterative solve hit its iteration cap."""

    def __init__(self, message: str, history: list[float] | None = None):
        super().__init__(message)
        self.history = list(history or [])
