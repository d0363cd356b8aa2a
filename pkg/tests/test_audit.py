import json
import re
import threading

import pytest

from iotiqa.audit import AuditAction, AuditEvent, AuditLog, append_audit, read_audit, utc_now
from iotiqa.errors import AuditError, JustificationRequired, SinkUnavailable


def _clock():
    return "2024-01-02T03:04:05Z"


def test_timestamp_format():
    assert re.fullmatch(r"\d{4}-\d\d-\d\dT\d\d:\d\d:\d\dZ", utc_now())


def test_record_assigns_increasing_sequences(tmp_path):
    log = AuditLog(tmp_path / "a.jsonl", clock=_clock)
    first = log.record(AuditAction.CASE_LOADED, actor="ann", detail={"case": "x"})
    second = log.record("ScoreSet", actor="ann", detail={"factor": "DTC"})
    assert (first.sequence, second.sequence) == (1, 2)
    lines = (tmp_path / "a.jsonl").read_text().splitlines()
    assert len(lines) == 2
    assert json.loads(lines[0]) == {
        "action": "CaseLoaded", "actor": "ann", "detail": {"case": "x"},
        "justification": "", "sequence": 1, "timestamp": "2024-01-02T03:04:05Z",
    }


def test_restart_continues_numbering(tmp_path):
    path = tmp_path / "a.jsonl"
    AuditLog(path).record("CaseLoaded")
    AuditLog(path).record("CaseLoaded")
    assert [e.sequence for e in read_audit(path)] == [1, 2]


def test_append_checks_sequence():
    log = AuditLog(clock=_clock)
    append_audit(log, AuditEvent(1, _clock(), "a", AuditAction.CASE_LOADED))
    with pytest.raises(AuditError):
        log.append(AuditEvent(1, _clock(), "a", AuditAction.CASE_LOADED))
    with pytest.raises(AuditError):
        log.append(AuditEvent(3, _clock(), "a", AuditAction.CASE_LOADED))
    assert len(log) == 1


@pytest.mark.parametrize("action", ["ScoreChanged", "GateApplied"])
def test_justification_required(action):
    log = AuditLog()
    with pytest.raises(JustificationRequired):
        log.record(action, justification="  ")
    assert len(log) == 0


def test_round_trip_event():
    event = AuditEvent(4, _clock(), "bob", AuditAction.GATE_APPLIED, {"cutoff": "50.00"}, "reason ü")
    assert AuditEvent.from_json(event.to_json()) == event


def test_unwritable_sink(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    log = AuditLog(blocker / "a.jsonl")
    with pytest.raises(SinkUnavailable):
        log.record("CaseLoaded")


def test_concurrent_records_stay_ordered(tmp_path):
    log = AuditLog(tmp_path / "a.jsonl")
    threads = [threading.Thread(target=lambda: [log.record("CaseLoaded") for _ in range(10)]) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert [e.sequence for e in log.events] == list(range(1, 41))
