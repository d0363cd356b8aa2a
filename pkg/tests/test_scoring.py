from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iotiqa.audit import AuditLog
from iotiqa.errors import (
    EmptyAssessment,
    MissingFactors,
    MissingJustification,
    NoLayeredScores,
    NonUniformWeights,
    ZeroWeightSum,
)
from iotiqa.model import CaseFile, DeviceAssessment, FactorId, InfoStatus, Layer, MissingPolicy, ThresholdPolicy, Weights
from iotiqa.scoring import (
    aggregate_device_values,
    case_iqa,
    category_iqa,
    decompose,
    device_iqa,
    gate,
    gate_values,
    layer_iqa,
    recombine,
)

from helpers import FACTOR_VALUES, case_from_raw, device_from_raw, flat_mean_percent, mean_of_device_means

ALL = [f.value for f in FactorId]

hundredths = st.integers(0, 100)
complete_row = st.fixed_dictionaries({f: hundredths for f in ALL})
partial_row = st.dictionaries(st.sampled_from(ALL), hundredths, min_size=1)


def rows_strategy(row):
    return st.lists(row, min_size=1, max_size=12).map(lambda rs: {f"d{i:02d}": r for i, r in enumerate(rs)})


# -- worked examples -----------------------------------------------------------


def test_device_4_available_only():
    dev = device_from_raw("4", FACTOR_VALUES["4"])
    assert device_iqa(dev).value == Fraction(472, 8) == Fraction(59)


def test_device_5_available_only():
    dev = device_from_raw("5", FACTOR_VALUES["5"])
    assert device_iqa(dev).value == Fraction(295, 8)


def test_device_4_strict_names_cs():
    dev = device_from_raw("4", FACTOR_VALUES["4"])
    with pytest.raises(MissingFactors) as info:
        device_iqa(dev, MissingPolicy.STRICT)
    assert {d: list(v) for d, v in info.value.missing.items()} == {"4": ["CS"]}
    assert "CS" in str(info.value)


def test_device_4_impute_zero_uses_nine_slots():
    dev = device_from_raw("4", FACTOR_VALUES["4"])
    result = device_iqa(dev, MissingPolicy.IMPUTE_ZERO)
    assert result.value == Fraction(472, 9)
    assert result.numerator_terms == 9


def test_complete_uniform_equals_flat_formula():
    rows = {"a": {f: 50 for f in ALL}, "b": {f: 100 for f in ALL}}
    assert case_iqa(case_from_raw(rows)).value == 75


def test_status_as_reality_on_fixture(cs2):
    # CS is absent everywhere, so AsReality averages DTC and DST only
    assert category_iqa(cs2, InfoStatus.AS_REALITY).value == flat_mean_percent(FACTOR_VALUES, ["DTC", "DST"])


def test_case_total_on_fixture(cs2):
    assert case_iqa(cs2).value == mean_of_device_means(FACTOR_VALUES)


def test_strict_case_collects_every_device(cs2):
    with pytest.raises(MissingFactors) as info:
        case_iqa(cs2, MissingPolicy.STRICT)
    assert sorted(info.value.missing) == ["1", "2", "3", "4", "5", "6"]


def test_empty_device_and_empty_case():
    with pytest.raises(EmptyAssessment):
        device_iqa(DeviceAssessment("x", "k", []))
    with pytest.raises(EmptyAssessment):
        case_iqa(CaseFile("c", ()))
    with pytest.raises(EmptyAssessment):
        aggregate_device_values([])


def test_zero_weight_on_only_present_factor():
    dev = device_from_raw("x", {"DTC": 40})
    with pytest.raises(ZeroWeightSum):
        device_iqa(dev, weights=Weights({FactorId.DTC: 0}))


def test_category_without_any_factor_of_status():
    case = case_from_raw({"a": {"DTC": 10}})
    with pytest.raises(EmptyAssessment):
        category_iqa(case, InfoStatus.ABOUT_REALITY)


def test_category_skips_devices_without_status_factors():
    case = case_from_raw({"a": {"CM": 40, "SR": 60}, "b": {"DTC": 10}})
    res = category_iqa(case, InfoStatus.ABOUT_REALITY)
    assert res.value == 50
    assert "skipped b" in res.basis
    imputed = category_iqa(case, InfoStatus.ABOUT_REALITY, MissingPolicy.IMPUTE_ZERO)
    assert imputed.value == 25


def test_weighted_device_mean():
    dev = device_from_raw("x", {"DTC": 100, "OS": 0})
    w = Weights({FactorId.DTC: 3})
    assert device_iqa(dev, weights=w).value == 75


def test_recombine_with_published_status_values():
    value = recombine(Fraction("61.96"), Fraction("56.30"), Fraction("54.74"))
    assert round(float(value), 2) == 57.49


def test_decompose_complete_case():
    rows = {"a": {f: i * 10 for i, f in enumerate(ALL)}, "b": {f: 100 - i for i, f in enumerate(ALL)}}
    dec = decompose(case_from_raw(rows))
    assert dec.holds
    assert dec.total == flat_mean_percent(rows)


def test_decompose_refuses_incomplete_and_weighted(cs2):
    with pytest.raises(MissingFactors):
        decompose(cs2)
    rows = {"a": {f: 50 for f in ALL}}
    with pytest.raises(NonUniformWeights):
        decompose(case_from_raw(rows, weights=Weights({FactorId.CS: 2})))


# -- layers --------------------------------------------------------------------


def _layer_case(cells_by_device):
    return CaseFile(
        "layers",
        tuple(device_from_raw(d, {"DTC": 50}, layers=c) for d, c in cells_by_device.items()),
    )


def test_layer_basic_and_h():
    case = _layer_case({
        "a": {("DTC", "physical"): 100, ("DST", "physical"): 50},
        "b": {("OS", "physical"): 20},
        "c": {("OS", "network"): 20},
    })
    res = layer_iqa(case, Layer.PHYSICAL)
    assert res.raw_value == Fraction(3, 4) + Fraction(1, 5)
    assert res.h == 2
    assert res.normalized_value == res.raw_value / 2 * 100


def test_layer_policies():
    case = _layer_case({"a": {("DTC", "network"): 90}, "b": {("OS", "physical"): 20}})
    with pytest.raises(MissingFactors):
        layer_iqa(case, Layer.NETWORK, MissingPolicy.STRICT)
    imputed = layer_iqa(case, Layer.NETWORK, MissingPolicy.IMPUTE_ZERO)
    assert imputed.raw_value == Fraction(90, 900)
    assert imputed.h == 2
    with pytest.raises(NoLayeredScores):
        layer_iqa(case, Layer.APPLICATION)


# -- gate ----------------------------------------------------------------------


def test_gate_ties_are_retained():
    outcome = gate_values({"a": Fraction(50), "b": Fraction(4999, 100)}, ThresholdPolicy(50, "screening"))
    assert outcome.retained == ("a",)
    assert outcome.discarded == ("b",)


def test_gate_on_case_records_event():
    case = case_from_raw({"a": {"DTC": 80}, "b": {"DTC": 20}})
    log = AuditLog()
    outcome = gate(case, ThresholdPolicy(50, "screening"), audit=log, actor="me")
    assert outcome.discarded == ("b",)
    (event,) = log.events
    assert event.action.value == "GateApplied"
    assert event.justification == "screening"
    assert [d["decision"] for d in event.detail["decisions"]] == ["retained", "discarded"]


def test_gate_without_threshold():
    with pytest.raises(MissingJustification):
        gate(case_from_raw({"a": {"DTC": 80}}))


# -- properties ----------------------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(rows_strategy(partial_row))
def test_total_is_mean_of_device_means(rows):
    assert case_iqa(case_from_raw(rows)).value == mean_of_device_means(rows)


@settings(max_examples=200, deadline=None)
@given(rows_strategy(complete_row))
def test_partition_identity_property(rows):
    case = case_from_raw(rows)
    parts = [category_iqa(case, s).value for s in InfoStatus]
    assert recombine(*parts) == case_iqa(case).value == flat_mean_percent(rows)


@settings(max_examples=200, deadline=None)
@given(rows_strategy(partial_row))
def test_policy_ordering(rows):
    # imputing zeros can only lower a device, dropping gaps is the upper reading
    case = case_from_raw(rows)
    for dev in case.devices:
        avail = device_iqa(dev, MissingPolicy.AVAILABLE_ONLY).value
        zero = device_iqa(dev, MissingPolicy.IMPUTE_ZERO).value
        assert zero <= avail
        if len(dev.scores) == 9:
            assert zero == avail == device_iqa(dev, MissingPolicy.STRICT).value


@settings(max_examples=200, deadline=None)
@given(partial_row, st.dictionaries(st.sampled_from(ALL), st.integers(0, 10), min_size=1))
def test_weighted_mean_stays_within_present_values(row, raw_weights):
    if not any(raw_weights.get(f, 1) > 0 for f in row):
        return
    weights = Weights(raw_weights)
    dev = device_from_raw("x", row)
    value = device_iqa(dev, weights=weights).value
    present = [v for f, v in row.items() if weights.weight(FactorId(f)) > 0]
    assert min(present) <= value <= max(present)
