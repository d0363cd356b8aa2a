import copy
import json
import random
from decimal import Decimal
from fractions import Fraction

import pytest

from iotiqa.casefile import (
    atomic_write,
    case_to_document,
    fixture_path,
    load_case,
    parse_case,
    rational_text,
    save_case,
    serialize_case,
    validate_document,
)
from iotiqa.errors import CaseSyntaxError, CaseValidationError, SchemaError
from iotiqa.model import FactorId, Layer, MissingPolicy


def _doc():
    return json.loads(fixture_path().read_text(encoding="utf-8"))


def _dump(doc) -> str:
    return json.dumps(doc)


def _locators(exc) -> list[str]:
    return [f.locator for f in exc.findings]


def test_fixture_contents(cs2):
    assert cs2.case_id
    assert cs2.device_ids == ("1", "2", "3", "4", "5", "6")
    assert cs2.device("3").kind == "drone"
    for dev in cs2.devices:
        assert FactorId.CS not in dev.scores
        assert len(dev.scores) == 8
    assert cs2.device("1").scores[FactorId.DTC].value == Decimal("0.56")
    assert cs2.expected.devices["4"] == Decimal("89.79")
    assert cs2.expected.aggregates["IQA_tot"] == Decimal("62.04")
    assert cs2.missing_policy is MissingPolicy.AVAILABLE_ONLY


def test_layered_scores_parse():
    doc = _doc()
    cell = {"value": "0.40", "justification": "j", "provenance": "p"}
    doc["devices"][0]["layered_scores"] = {"DST": {"physical": cell, "network": dict(cell, value="1")}}
    case = parse_case(_dump(doc))
    dev = case.device("1")
    assert dev.layered_scores[(FactorId.DST, Layer.NETWORK)].value == Decimal("1.00")
    assert serialize_case(parse_case(serialize_case(case))) == serialize_case(case)


def test_numbers_accepted_as_json_numbers():
    doc = _doc()
    doc["devices"][0]["scores"]["DTC"]["value"] = 0.5
    assert parse_case(_dump(doc)).device("1").scores[FactorId.DTC].value == Decimal("0.50")


def test_serialized_scores_are_two_decimal_strings(cs2):
    doc = case_to_document(cs2)
    values = [s["value"] for d in doc["devices"] for s in d["scores"].values()]
    assert all(isinstance(v, str) and len(v.split(".")[1]) == 2 for v in values)
    assert list(doc) == ["schema_version", "case_id", "missing_policy", "weights", "threshold",
                         "audit_log", "devices", "expected"]


@pytest.mark.parametrize("value, text", [(Fraction(1, 2), "0.5"), (Fraction(3), "3"), (Fraction(1, 3), "1/3"),
                                         (Fraction(1, 8), "0.125")])
def test_rational_text(value, text):
    assert rational_text(value) == text
    assert Fraction(text) == value


def test_syntax_errors():
    with pytest.raises(CaseSyntaxError) as info:
        parse_case("{not json")
    assert info.value.findings[0].locator.startswith("line 1")
    with pytest.raises(CaseSyntaxError):
        parse_case(b"\xff\xfe")


def test_unsupported_schema_version():
    doc = _doc()
    doc["schema_version"] = 2
    with pytest.raises(SchemaError) as info:
        parse_case(_dump(doc))
    assert _locators(info.value) == ["schema_version"]


def test_unknown_field_is_a_schema_finding():
    doc = _doc()
    doc["devices"][1]["colour"] = "red"
    with pytest.raises(SchemaError) as info:
        parse_case(_dump(doc))
    assert "devices/2/colour" in _locators(info.value)


def test_all_findings_reported_together():
    doc = _doc()
    doc["devices"][0]["scores"]["DTC"]["value"] = "1.50"
    doc["devices"][3]["scores"]["OS"]["justification"] = " "
    doc["devices"][5]["scores"]["XYZ"] = doc["devices"][5]["scores"]["OS"]
    with pytest.raises(CaseValidationError) as info:
        parse_case(_dump(doc))
    assert set(_locators(info.value)) == {
        "devices/1/scores/DTC/value",
        "devices/4/scores/OS/justification",
        "devices/6/scores/XYZ",
    }
    assert len(validate_document(_dump(doc))) == 3


def test_duplicate_device_and_duplicate_key():
    doc = _doc()
    doc["devices"][1]["device_id"] = "1"
    with pytest.raises(CaseValidationError) as info:
        parse_case(_dump(doc))
    assert "devices/1" in _locators(info.value)
    text = '{"schema_version": 1, "case_id": "a", "case_id": "b", "devices": []}'
    with pytest.raises(CaseValidationError) as info:
        parse_case(text)
    assert _locators(info.value) == ["$/case_id"]


def test_expected_must_reference_known_devices():
    doc = _doc()
    doc["expected"]["devices"]["9"] = "50.00"
    with pytest.raises(CaseValidationError) as info:
        parse_case(_dump(doc))
    assert _locators(info.value) == ["expected/devices/9"]


# Mutations paired with the locator the finding must name.
MUTATIONS = [
    (lambda d, i, f: d["devices"][i]["scores"][f].__setitem__("value", "1.01"), "devices/{id}/scores/{f}/value"),
    (lambda d, i, f: d["devices"][i]["scores"][f].__setitem__("value", "-0.10"), "devices/{id}/scores/{f}/value"),
    (lambda d, i, f: d["devices"][i]["scores"][f].__setitem__("value", "0.555"), "devices/{id}/scores/{f}/value"),
    (lambda d, i, f: d["devices"][i]["scores"][f].__setitem__("value", "abc"), "devices/{id}/scores/{f}/value"),
    (lambda d, i, f: d["devices"][i]["scores"][f].__setitem__("value", True), "devices/{id}/scores/{f}/value"),
    (lambda d, i, f: d["devices"][i]["scores"][f].__setitem__("provenance", ""), "devices/{id}/scores/{f}/provenance"),
    (lambda d, i, f: d["devices"][i]["scores"][f].pop("justification"), "devices/{id}/scores/{f}/justification"),
    (lambda d, i, f: d["devices"][i]["scores"][f].__setitem__("extra", 1), "devices/{id}/scores/{f}/extra"),
    (lambda d, i, f: d["devices"][i]["scores"].__setitem__(f, []), "devices/{id}/scores/{f}"),
    (lambda d, i, f: d["devices"][i].pop("kind"), "devices/{id}/kind"),
    (lambda d, i, f: d["devices"][i].__setitem__("scores", 3), "devices/{id}/scores"),
    (lambda d, i, f: d["devices"][i].__setitem__("layered_scores", {f: {"top": {}}}), "devices/{id}/layered_scores/{f}/top"),
    (lambda d, i, f: d["devices"][i].pop("device_id"), "devices[{i}]/device_id"),
]


def test_fuzzed_mutations_name_their_locator():
    rng = random.Random(7)
    base = _doc()
    for _ in range(300):
        mutate, template = rng.choice(MUTATIONS)
        doc = copy.deepcopy(base)
        i = rng.randrange(len(doc["devices"]))
        f = rng.choice(sorted(doc["devices"][i]["scores"]))
        mutate(doc, i, f)
        with pytest.raises((SchemaError, CaseValidationError)) as info:
            parse_case(_dump(doc))
        want = template.format(id=doc["devices"][i].get("device_id"), i=i, f=f)
        assert want in _locators(info.value), (want, _locators(info.value))


def test_top_level_findings():
    doc = _doc()
    doc["missing_policy"] = "guess"
    doc["weights"] = {"DTC": -1, "ZZZ": 1}
    doc["threshold"] = {"cutoff": "120", "justification": "x"}
    with pytest.raises(CaseValidationError) as info:
        parse_case(_dump(doc))
    assert {"missing_policy", "weights/DTC", "weights/ZZZ", "threshold/cutoff"} <= set(_locators(info.value))


def test_save_and_load(tmp_path, cs2):
    target = save_case(tmp_path / "sub" / "case.json", cs2)
    assert load_case(target) == cs2
    assert not [p for p in target.parent.iterdir() if p.name.endswith(".tmp")]


def test_atomic_write_leaves_old_file_on_failure(tmp_path, monkeypatch):
    target = tmp_path / "f.txt"
    atomic_write(target, "old")

    def boom(*_):
        raise OSError("disk full")

    monkeypatch.setattr("iotiqa.casefile.os.replace", boom)
    with pytest.raises(OSError):
        atomic_write(target, "new")
    assert target.read_text() == "old"
    assert [p.name for p in tmp_path.iterdir()] == ["f.txt"]
