"""Event system for streaming run progress out of the arena."""

from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from typing import Any, Protocol

from rich.console import Console
from rich.text import Text


class EventType(Enum):
    RUN_STARTED = "run_started"
    PHASE_DONE = "phase_done"  # Setup or Solve finished
    RUN_DONE = "run_done"
    RUN_FAILED = "run_failed"

    SWEEP_POINT = "sweep_point"

    WARNING = "warning"
    STATUS_UPDATE = "status_update"


@dataclass
class Event:
    """An event raised while benchmarking."""
    type: EventType
    timestamp: datetime
    run_id: str | None
    data: dict[str, Any]

    @classmethod
    def create(cls, type: EventType, run_id: str | None = None, **data) -> "Event":
        return cls(type=type, timestamp=datetime.now(), run_id=run_id, data=data)


class EventHandler(Protocol):
    """Protocol for event handlers."""
    def __call__(self, event: Event) -> None: ...


class EventBus:
    """Simple event bus for broadcasting events to handlers."""

    def __init__(self):
        self._handlers: list[EventHandler] = []

    def subscribe(self, handler: EventHandler) -> None:
        self._handlers.append(handler)

    def unsubscribe(self, handler: EventHandler) -> None:
        self._handlers.remove(handler)

    def emit(self, event: Event) -> None:
        for handler in self._handlers:
            handler(event)

    # Convenience methods for common events
    def run_started(self, run_id: str, solver: str, params: dict) -> None:
        self.emit(Event.create(EventType.RUN_STARTED, run_id=run_id, solver=solver, params=params))

    def phase_done(self, run_id: str, phase: str, seconds: float) -> None:
        self.emit(Event.create(EventType.PHASE_DONE, run_id=run_id, phase=phase, seconds=seconds))

    def run_done(self, run_id: str, error: float, n_unknowns: int) -> None:
        self.emit(Event.create(EventType.RUN_DONE, run_id=run_id, error=error, n_unknowns=n_unknowns))

    def run_failed(self, run_id: str, message: str) -> None:
        self.emit(Event.create(EventType.RUN_FAILED, run_id=run_id, message=message))

    def sweep_point(self, run_id: str, index: int, error: float, target: float) -> None:
        self.emit(Event.create(EventType.SWEEP_POINT, run_id=run_id, index=index, error=error, target=target))

    def warning(self, run_id: str | None, message: str) -> None:
        self.emit(Event.create(EventType.WARNING, run_id=run_id, message=message))

    def status_update(self, message: str) -> None:
        self.emit(Event.create(EventType.STATUS_UPDATE, message=message))


_console = Console(stderr=True)


def console_event_handler(event: Event) -> None:
    """Render events on stderr."""
    prefix = f"[{event.type.value}]"
    if event.run_id:
        prefix += f" [{event.run_id}]"

    if event.type == EventType.RUN_STARTED:
        line, style = f"{prefix} {event.data.get('solver')} {event.data.get('params')}", "cyan"
    elif event.type == EventType.PHASE_DONE:
        line, style = f"{prefix} {event.data.get('phase')}: {event.data.get('seconds', 0.0):.4g}s", "dim"
    elif event.type == EventType.RUN_DONE:
        line = f"{prefix} N={event.data.get('n_unknowns')} linf={event.data.get('error', float('nan')):.3e}"
        style = "green"
    elif event.type == EventType.RUN_FAILED:
        line, style = f"{prefix} {event.data.get('message')}", "red bold"
    elif event.type == EventType.SWEEP_POINT:
        line = (f"{prefix} point {event.data.get('index')}: "
                f"{event.data.get('error', float('nan')):.3e} (target {event.data.get('target'):.1e})")
        style = "yellow"
    elif event.type == EventType.WARNING:
        line, style = f"{prefix} {event.data.get('message')}", "yellow bold"
    else:
        line, style = f"{prefix} {event.data.get('message', '')}", "blue"

    _console.print(Text(line, style=style))
