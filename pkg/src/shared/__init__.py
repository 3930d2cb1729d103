"""Shared types and utilities."""

from .types import (
    SolverId,
    RunStatus,
    ToleranceMode,
    RunConfig,
    SolveReport,
    SweepResult,
    REPORT_COLUMNS,
    VOLATILE_COLUMNS,
)
from .events import Event, EventType, EventBus, console_event_handler
from .errors import (
    ArenaError,
    InvalidArgumentError,
    PreconditionError,
    ConfigurationError,
    ApproximationError,
    SetupError,
    InternalStateError,
    ConvergenceError,
)

__all__ = [
    "SolverId",
    "RunStatus",
    "ToleranceMode",
    "RunConfig",
    "SolveReport",
    "SweepResult",
    "REPORT_COLUMNS",
    "VOLATILE_COLUMNS",
    "Event",
    "EventType",
    "EventBus",
    "console_event_handler",
    "ArenaError",
    "InvalidArgumentError",
    "PreconditionError",
    "ConfigurationError",
    "ApproximationError",
    "SetupError",
    "InternalStateError",
    "ConvergenceError",
]
