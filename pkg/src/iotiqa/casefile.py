"""Case-file parsing, validation and canonical serialization.

Case files are UTF-8 JSON documents (schema_version 1)::

    {
      "schema_version": 1,
      "case_id": "case-17",
      "missing_policy": "available_only",
      "weights": null,
      "threshold": {"cutoff": "50", "justification": "..."},
      "audit_log": "case-17.audit.jsonl",
      "devices": [
        {
          "device_id": "1",
          "kind": "smartphone",
          "scores": {
            "DTC": {"value": "0.56", "justification": "...", "provenance": "..."}
          },
          "layered_scores": {
            "DST": {"physical": {"value": "0.40", "justification": "...", "provenance": "..."}}
          }
        }
      ],
      "expected": null
    }

Scores are two-decimal strings so no binary float ever touches them. Parsing
collects every finding before raising, each with a path-like locator such as
``devices/4/scores/DTC/value``.
"""

from __future__ import annotations

import json
import os
import tempfile
from collections.abc import Mapping
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

from .errors import (
    CaseSyntaxError,
    CaseValidationError,
    Finding,
    IqaError,
    SchemaError,
)
from .model import (
    SCHEMA_VERSION,
    CaseFile,
    DeviceAssessment,
    Expectations,
    FactorId,
    FactorScore,
    Layer,
    LayeredFactorScore,
    MissingPolicy,
    ThresholdPolicy,
    Weights,
    to_score_value,
)

SUPPORTED_VERSIONS = frozenset({SCHEMA_VERSION})

_TOP_KEYS = {"schema_version", "case_id", "missing_policy", "weights", "threshold", "audit_log", "devices", "expected"}
_DEVICE_KEYS = {"device_id", "kind", "scores", "layered_scores"}
_SCORE_KEYS = {"value", "justification", "provenance"}
_EXPECTED_KEYS = {"source", "notes", "devices", "aggregates"}


class _Obj(dict):
    """JSON object that remembers keys it saw more than once."""

    duplicates: list[str]


def _pairs_hook(pairs: list[tuple[str, Any]]) -> _Obj:
    obj = _Obj()
    obj.duplicates = []
    for key, value in pairs:
        if key in obj:
            obj.duplicates.append(key)
        obj[key] = value
    return obj


class _Collector:
    def __init__(self) -> None:
        self.schema: list[Finding] = []
        self.validation: list[Finding] = []

    def structure(self, locator: str, message: str) -> None:
        self.schema.append(Finding(locator, message))

    def invalid(self, locator: str, message: str) -> None:
        self.validation.append(Finding(locator, message))

    def object(self, node: Any, locator: str, allowed: set[str] | None = None) -> bool:
        if not isinstance(node, dict):
            self.structure(locator, f"expected an object, got {_kind(node)}")
            return False
        for key in getattr(node, "duplicates", []):
            self.invalid(f"{locator}/{key}", "duplicate key")
        if allowed is not None:
            for key in node:
                if key not in allowed:
                    self.structure(f"{locator}/{key}", "unknown field")
        return True

    def text(self, node: Mapping[str, Any], key: str, locator: str, *, required: bool = True) -> str | None:
        if key not in node:
            if required:
                self.structure(f"{locator}/{key}", "missing field")
            return None
        value = node[key]
        if not isinstance(value, str):
            self.structure(f"{locator}/{key}", f"expected text, got {_kind(value)}")
            return None
        return value


def _kind(node: Any) -> str:
    if node is None:
        return "null"
    if isinstance(node, bool):
        return "boolean"
    if isinstance(node, (int, Decimal)):
        return "number"
    if isinstance(node, str):
        return "text"
    if isinstance(node, list):
        return "array"
    return "object"


def _number_text(node: Any) -> str | None:
    if isinstance(node, bool):
        return None
    if isinstance(node, (str, int, Decimal)):
        return str(node)
    return None


def _score(
    out: _Collector, node: Any, locator: str, factor: FactorId, layer: Layer | None = None
) -> FactorScore | LayeredFactorScore | None:
    if not out.object(node, locator, _SCORE_KEYS):
        return None
    ok = True
    for key in sorted(_SCORE_KEYS - node.keys()):
        out.structure(f"{locator}/{key}", "missing field")
        ok = False
    raw = node.get("value")
    value = _number_text(raw)
    if "value" in node and value is None:
        out.structure(f"{locator}/value", f"expected a decimal string, got {_kind(raw)}")
        ok = False
    for key in ("justification", "provenance"):
        if key in node and not isinstance(node[key], str):
            out.structure(f"{locator}/{key}", f"expected text, got {_kind(node[key])}")
            ok = False
    if not ok:
        return None
    # Check each invariant separately so one bad field does not hide another.
    failed = False
    try:
        to_score_value(value)  # type: ignore[arg-type]
    except IqaError as exc:
        out.invalid(f"{locator}/value", str(exc))
        failed = True
    for key in ("justification", "provenance"):
        if not node[key].strip():
            out.invalid(f"{locator}/{key}", f"{key} must be non-empty")
            failed = True
    if failed:
        return None
    if layer is None:
        return FactorScore(factor, value, node["justification"], node["provenance"])  # type: ignore[arg-type]
    return LayeredFactorScore(factor, layer, value, node["justification"], node["provenance"])  # type: ignore[arg-type]


def _factor(out: _Collector, key: str, locator: str) -> FactorId | None:
    try:
        return FactorId(key)
    except ValueError:
        out.invalid(locator, f"unknown factor {key!r} (expected one of {', '.join(f.value for f in FactorId)})")
        return None


def _device(out: _Collector, node: Any, index: int, seen: set[str]) -> DeviceAssessment | None:
    locator = f"devices[{index}]"
    if not out.object(node, locator):
        return None
    device_id = out.text(node, "device_id", locator)
    if device_id is not None:
        if not device_id.strip():
            out.invalid(f"{locator}/device_id", "device_id must be non-empty")
            device_id = None
        else:
            locator = f"devices/{device_id}"
            if device_id in seen:
                out.invalid(locator, f"duplicate device id {device_id!r}")
            seen.add(device_id)
    for key in node:
        if key not in _DEVICE_KEYS:
            out.structure(f"{locator}/{key}", "unknown field")
    kind = out.text(node, "kind", locator)
    scores: dict[FactorId, FactorScore] = {}
    raw_scores = node.get("scores")
    if raw_scores is None:
        out.structure(f"{locator}/scores", "missing field")
    elif out.object(raw_scores, f"{locator}/scores"):
        for key, cell in raw_scores.items():
            factor = _factor(out, key, f"{locator}/scores/{key}")
            if factor is None:
                continue
            score = _score(out, cell, f"{locator}/scores/{key}", factor)
            if score is not None:
                scores[factor] = score  # type: ignore[assignment]
    layered: dict[tuple[FactorId, Layer], LayeredFactorScore] = {}
    raw_layered = node.get("layered_scores", {})
    if raw_layered is not None and out.object(raw_layered, f"{locator}/layered_scores"):
        for key, by_layer in raw_layered.items():
            loc = f"{locator}/layered_scores/{key}"
            factor = _factor(out, key, loc)
            if factor is None or not out.object(by_layer, loc):
                continue
            for layer_key, cell in by_layer.items():
                try:
                    layer = Layer(layer_key)
                except ValueError:
                    out.invalid(f"{loc}/{layer_key}", f"unknown layer {layer_key!r}")
                    continue
                score = _score(out, cell, f"{loc}/{layer_key}", factor, layer)
                if score is not None:
                    layered[(factor, layer)] = score  # type: ignore[assignment]
    if device_id is None or kind is None:
        return None
    return DeviceAssessment(device_id, kind, scores, layered)


def _weights(out: _Collector, node: Any) -> Weights | None:
    if node is None or not out.object(node, "weights"):
        return None
    parsed: dict[FactorId, Fraction] = {}
    for key, raw in node.items():
        factor = _factor(out, key, f"weights/{key}")
        text = _number_text(raw)
        if text is None:
            out.structure(f"weights/{key}", f"expected a number, got {_kind(raw)}")
            continue
        try:
            weight = Fraction(text)
        except (ValueError, ZeroDivisionError):
            out.invalid(f"weights/{key}", f"not a rational number: {text!r}")
            continue
        if weight < 0:
            out.invalid(f"weights/{key}", "weight must be nonnegative")
            continue
        if factor is not None:
            parsed[factor] = weight
    try:
        return Weights(parsed)
    except ValueError as exc:
        out.invalid("weights", str(exc))
        return None


def _percentage(out: _Collector, raw: Any, locator: str) -> Decimal | None:
    text = _number_text(raw)
    try:
        value = Decimal(text) if text is not None else None
    except InvalidOperation:
        value = None
    if value is None or not value.is_finite():
        out.invalid(locator, f"expected a percentage, got {raw!r}")
        return None
    if not 0 <= value <= 100:
        out.invalid(locator, f"percentage {value} outside [0, 100]")
        return None
    return value


def _threshold(out: _Collector, node: Any) -> ThresholdPolicy | None:
    if node is None or not out.object(node, "threshold", {"cutoff", "justification"}):
        return None
    cutoff = _percentage(out, node.get("cutoff"), "threshold/cutoff") if "cutoff" in node else None
    if "cutoff" not in node:
        out.structure("threshold/cutoff", "missing field")
    justification = out.text(node, "justification", "threshold")
    if justification is not None and not justification.strip():
        out.invalid("threshold/justification", "a threshold must be justified")
        return None
    if cutoff is None or justification is None:
        return None
    return ThresholdPolicy(Fraction(cutoff), justification)


def _expected(out: _Collector, node: Any) -> Expectations | None:
    if node is None or not out.object(node, "expected", _EXPECTED_KEYS):
        return None
    sections: dict[str, dict[str, Decimal]] = {}
    for section in ("devices", "aggregates"):
        raw = node.get(section, {})
        values: dict[str, Decimal] = {}
        if out.object(raw, f"expected/{section}"):
            for key, cell in raw.items():
                value = _percentage(out, cell, f"expected/{section}/{key}")
                if value is not None:
                    values[key] = value
        sections[section] = values
    source = out.text(node, "source", "expected", required=False) or ""
    notes = node.get("notes", [])
    if not isinstance(notes, list) or not all(isinstance(n, str) for n in notes):
        out.structure("expected/notes", "expected an array of text")
        notes = []
    return Expectations(sections["devices"], sections["aggregates"], source, tuple(notes))


def _check_expected_devices(out: _Collector, expected: Expectations | None, device_ids: set[str]) -> None:
    if expected is None:
        return
    for key in expected.devices:
        if key not in device_ids:
            out.invalid(f"expected/devices/{key}", "no device with this id")


def _decode(data: bytes | str) -> Any:
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CaseSyntaxError([Finding(f"byte {exc.start}", "input is not valid UTF-8")]) from exc
    else:
        text = data
    try:
        return json.loads(text, parse_float=Decimal, object_pairs_hook=_pairs_hook)
    except json.JSONDecodeError as exc:
        raise CaseSyntaxError([Finding(f"line {exc.lineno} column {exc.colno}", exc.msg)]) from exc


def parse_case(data: bytes | str) -> CaseFile:
    """Parse and fully validate a case document, reporting every finding at once."""
    doc = _decode(data)
    out = _Collector()
    if not out.object(doc, "$", _TOP_KEYS):
        raise SchemaError(out.schema)
    version = doc.get("schema_version")
    if "schema_version" not in doc:
        out.structure("schema_version", "missing field")
    elif isinstance(version, bool) or not isinstance(version, int):
        out.structure("schema_version", f"expected an integer, got {_kind(version)}")
    elif version not in SUPPORTED_VERSIONS:
        raise SchemaError([Finding("schema_version", f"unsupported schema version {version}")])
    case_id = out.text(doc, "case_id", "$")
    if case_id is not None and not case_id.strip():
        out.invalid("case_id", "case_id must be non-empty")
    policy = MissingPolicy.AVAILABLE_ONLY
    if "missing_policy" in doc:
        try:
            policy = MissingPolicy.parse(str(doc["missing_policy"]))
        except ValueError:
            out.invalid("missing_policy", f"unknown policy {doc['missing_policy']!r}")
    weights = _weights(out, doc.get("weights"))
    threshold = _threshold(out, doc.get("threshold"))
    audit_log = doc.get("audit_log")
    if audit_log is not None and not isinstance(audit_log, str):
        out.structure("audit_log", f"expected text or null, got {_kind(audit_log)}")
        audit_log = None
    devices: list[DeviceAssessment] = []
    raw_devices = doc.get("devices")
    seen: set[str] = set()
    if "devices" not in doc:
        out.structure("devices", "missing field")
    elif not isinstance(raw_devices, list):
        out.structure("devices", f"expected an array, got {_kind(raw_devices)}")
    else:
        for index, node in enumerate(raw_devices):
            device = _device(out, node, index, seen)
            if device is not None:
                devices.append(device)
    expected = _expected(out, doc.get("expected"))
    _check_expected_devices(out, expected, seen)

    if out.schema:
        raise SchemaError(out.schema + out.validation)
    if out.validation:
        raise CaseValidationError(out.validation)
    return CaseFile(
        case_id=case_id,  # type: ignore[arg-type]
        devices=tuple(devices),
        schema_version=version,
        weights=weights,
        missing_policy=policy,
        threshold=threshold,
        audit_log=audit_log,
        expected=expected,
    )


def validate_document(data: bytes | str) -> list[Finding]:
    """All findings for a document; empty when it parses cleanly."""
    try:
        parse_case(data)
    except (CaseSyntaxError, SchemaError, CaseValidationError) as exc:
        return list(exc.findings)
    return []


# -- serialization ----------------------------------------------------------------


def rational_text(value: Fraction) -> str:
    """Decimal text when the rational terminates, else ``p/q``."""
    value = Fraction(value)
    for places in range(0, 31):
        scaled = value * 10**places
        if scaled.denominator == 1:
            text = f"{Decimal(scaled.numerator).scaleb(-places):f}"
            return text
    return f"{value.numerator}/{value.denominator}"


def _score_doc(score: FactorScore | LayeredFactorScore) -> dict[str, str]:
    return {
        "value": f"{score.value:.2f}",
        "justification": score.justification,
        "provenance": score.provenance,
    }


def case_to_document(case: CaseFile) -> dict[str, Any]:
    devices = []
    for dev in case.devices:
        layered: dict[str, dict[str, Any]] = {}
        for (factor, layer), score in dev.layered_scores.items():
            layered.setdefault(factor.value, {})[layer.value] = _score_doc(score)
        devices.append(
            {
                "device_id": dev.device_id,
                "kind": dev.kind,
                "scores": {f.value: _score_doc(s) for f, s in dev.scores.items()},
                "layered_scores": layered,
            }
        )
    expected = None
    if case.expected is not None:
        expected = {
            "source": case.expected.source,
            "notes": list(case.expected.notes),
            "devices": {k: f"{v:.2f}" for k, v in case.expected.devices.items()},
            "aggregates": {k: f"{v:.2f}" for k, v in case.expected.aggregates.items()},
        }
    return {
        "schema_version": case.schema_version,
        "case_id": case.case_id,
        "missing_policy": case.missing_policy.value,
        "weights": None
        if case.weights is None
        else {f.value: rational_text(w) for f, w in case.weights.values.items()},
        "threshold": None
        if case.threshold is None
        else {"cutoff": rational_text(case.threshold.cutoff), "justification": case.threshold.justification},
        "audit_log": case.audit_log,
        "devices": devices,
        "expected": expected,
    }


def serialize_case(case: CaseFile) -> bytes:
    """Canonical UTF-8 JSON: fixed key order, two-decimal score strings, trailing newline."""
    text = json.dumps(case_to_document(case), indent=2, ensure_ascii=False)
    return (text + "\n").encode("utf-8")


# -- files --------------------------------------------------------------------------


def atomic_write(path: str | os.PathLike[str], data: bytes | str) -> Path:
    """Write via a temp file in the same directory, then rename over ``path``."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    payload = data.encode("utf-8") if isinstance(data, str) else data
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
    return target


def load_case(path: str | os.PathLike[str]) -> CaseFile:
    return parse_case(Path(path).read_bytes())


def save_case(path: str | os.PathLike[str], case: CaseFile) -> Path:
    return atomic_write(path, serialize_case(case))


FIXTURES = ("case_study_2",)


def fixture_path(name: str = "case_study_2") -> Path:
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}")
    return Path(str(resources.files("iotiqa").joinpath("data", f"{name}.json")))


def load_fixture(name: str = "case_study_2") -> CaseFile:
    return load_case(fixture_path(name))
