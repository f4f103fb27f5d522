"""In-process event bus connecting domain services to the realtime gateway.

Services emit an Event while holding their per-entity lock, so sinks observe
events for one entity in mutation order. Sinks must be quick and non-blocking
(the gateway's sink just appends to per-connection queues).
"""
from __future__ import annotations

import threading
from dataclasses import dataclass

from .errors import SpecError

# every frame type that can travel over the realtime channel
EVENT_TYPES = frozenset({
    "chat.message",
    "auction.offer",
    "auction.outbid",
    "auction.won",
    "auction.sold",
    "auction.unsold",
    "diagnosis.processed",
    "diagnosis.assigned",
    "diagnosis.report",
})


@dataclass(frozen=True)
class Event:
    type: str
    topic: str           # entity topic, e.g. "listing/<id>"
    payload: dict
    recipients: tuple = ()  # user ids addressed directly, beyond topic subscribers


class EventBus:
    def __init__(self):
        self._lock = threading.Lock()
        self._sinks = []

    def attach(self, sink):
        """Register a callable(Event); returns a detach function."""
        with self._lock:
            self._sinks.append(sink)

        def detach():
            with self._lock:
                if sink in self._sinks:
                    self._sinks.remove(sink)
        return detach

    def emit(self, event: Event):
        if event.type not in EVENT_TYPES:
            raise SpecError(f"unknown event type {event.type!r}")
        with self._lock:
            sinks = list(self._sinks)
            for sink in sinks:
                sink(event)
