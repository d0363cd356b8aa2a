"""Append-only JSON-Lines audit log.

One event per line; sequence numbers are assigned by the log and strictly
increase. Events are never rewritten. The log has a single-writer contract:
appends within a process are serialized by a lock, and each append re-reads
the tail so a second writer after a restart continues the numbering.
"""

from __future__ import annotations

import json
import os
import threading
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Any

from .errors import AuditError, JustificationRequired, SinkUnavailable
from .rounding import exact, format_percent

if TYPE_CHECKING:
    from .scoring import GateOutcome

AUDIT_LOG_ENV = "IOTIQA_AUDIT_LOG"


class AuditAction(str, Enum):
    CASE_LOADED = "CaseLoaded"
    SCORE_SET = "ScoreSet"
    SCORE_CHANGED = "ScoreChanged"
    GATE_APPLIED = "GateApplied"
    REPORT_EMITTED = "ReportEmitted"

    def __str__(self) -> str:
        return self.value


NEEDS_JUSTIFICATION = frozenset({AuditAction.SCORE_CHANGED, AuditAction.GATE_APPLIED})


def utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class AuditEvent:
    sequence: int
    timestamp: str
    actor: str
    action: AuditAction
    detail: Mapping[str, Any] = field(default_factory=dict)
    justification: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "action", AuditAction(self.action))
        if self.action in NEEDS_JUSTIFICATION and not (self.justification or "").strip():
            raise JustificationRequired(f"{self.action.value} events must carry a justification")

    def to_json(self) -> str:
        payload = {
            "sequence": self.sequence,
            "timestamp": self.timestamp,
            "actor": self.actor,
            "action": self.action.value,
            "detail": self.detail,
            "justification": self.justification,
        }
        return json.dumps(payload, sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_json(cls, line: str) -> AuditEvent:
        raw = json.loads(line)
        return cls(
            sequence=int(raw["sequence"]),
            timestamp=raw["timestamp"],
            actor=raw.get("actor", ""),
            action=AuditAction(raw["action"]),
            detail=raw.get("detail", {}),
            justification=raw.get("justification", ""),
        )


def read_audit(path: str | os.PathLike[str]) -> list[AuditEvent]:
    p = Path(path)
    if not p.exists():
        return []
    with p.open(encoding="utf-8") as fh:
        return [AuditEvent.from_json(line) for line in fh if line.strip()]


class AuditLog:
    """Audit sink backed by a ``.jsonl`` file, or held in memory when ``path`` is None."""

    def __init__(self, path: str | os.PathLike[str] | None = None, *, clock: Callable[[], str] = utc_now):
        self.path = Path(path) if path is not None else None
        self._clock = clock
        self._lock = threading.Lock()
        self._memory: list[AuditEvent] = []

    @property
    def events(self) -> list[AuditEvent]:
        if self.path is None:
            return list(self._memory)
        try:
            return read_audit(self.path)
        except OSError as exc:
            raise SinkUnavailable(f"cannot read audit log {self.path}: {exc}") from exc

    def __len__(self) -> int:
        return len(self.events)

    @property
    def last_sequence(self) -> int:
        events = self.events
        return events[-1].sequence if events else 0

    def append(self, event: AuditEvent) -> AuditEvent:
        """Append a fully formed event; its sequence must be the next one."""
        with self._lock:
            expected = self.last_sequence + 1
            if event.sequence != expected:
                raise AuditError(f"sequence {event.sequence} out of order, expected {expected}")
            self._write(event)
        return event

    def record(
        self,
        action: AuditAction | str,
        *,
        actor: str = "",
        detail: Mapping[str, Any] | None = None,
        justification: str = "",
    ) -> AuditEvent:
        """Build an event with the next sequence number and append it."""
        with self._lock:
            event = AuditEvent(
                sequence=self.last_sequence + 1,
                timestamp=self._clock(),
                actor=actor,
                action=AuditAction(action),
                detail=dict(detail or {}),
                justification=justification,
            )
            self._write(event)
        return event

    def _write(self, event: AuditEvent) -> None:
        line = event.to_json() + "\n"
        if self.path is None:
            self._memory.append(event)
            return
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise SinkUnavailable(f"cannot append to audit log {self.path}: {exc}") from exc


def append_audit(log: AuditLog, event: AuditEvent) -> AuditLog:
    log.append(event)
    return log


def gate_event_detail(outcome: GateOutcome, *, case_id: str = "", source: str = "recomputed") -> dict[str, Any]:
    decisions = [
        {
            "device_id": dev,
            "iqa": format_percent(value),
            "iqa_exact": exact(value),
            "decision": "retained" if dev in outcome.retained else "discarded",
        }
        for dev, value in outcome.per_device_value.items()
    ]
    detail: dict[str, Any] = {
        "cutoff": format_percent(outcome.cutoff),
        "retained": list(outcome.retained),
        "discarded": list(outcome.discarded),
        "decisions": decisions,
        "source": source,
    }
    if case_id:
        detail["case_id"] = case_id
    return detail
