"""Whole-case assessment: every coefficient the toolkit computes, in one report.

:func:`assess` is what the CLI and the renderers consume. When the case file
embeds expected results, each one is compared against the recomputation and
any gap wider than :data:`DISCREPANCY_TOLERANCE` percentage points becomes a
:class:`Discrepancy` with an explanation of whether missing factors could
account for it.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import TYPE_CHECKING

from .errors import EmptyAssessment, MissingFactors, ScoringError
from .model import TAXONOMY, CaseFile, FactorId, InfoStatus, Layer, MissingPolicy, ThresholdPolicy, Weights
from .rounding import format_percent, format_signed
from .scoring import (
    UNIFORM,
    Decomposition,
    GateOutcome,
    IqaResult,
    LayerIqaResult,
    aggregate_device_values,
    case_iqa,
    category_iqa,
    decompose,
    device_results,
    gate_values,
    layer_iqa,
)

if TYPE_CHECKING:
    from .audit import AuditLog

DISCREPANCY_TOLERANCE = Decimal("0.05")
TOTAL_LABEL = "IQA_tot"


def device_label(device_id: str) -> str:
    return f"IQA_device{device_id}"


@dataclass(frozen=True)
class DeviceResult:
    device_id: str
    kind: str
    result: IqaResult
    missing: tuple[FactorId, ...] = ()


@dataclass(frozen=True)
class Discrepancy:
    label: str
    expected: Decimal
    recomputed: Fraction | None
    explanation: str

    @property
    def delta(self) -> Fraction | None:
        if self.recomputed is None:
            return None
        return self.recomputed - Fraction(self.expected)


@dataclass(frozen=True)
class AssessmentReport:
    case_id: str
    policy: MissingPolicy
    weights_basis: str
    devices: tuple[DeviceResult, ...]
    total: IqaResult | None
    categories: Mapping[InfoStatus, IqaResult | None] = field(default_factory=dict)
    category_notes: Mapping[InfoStatus, str] = field(default_factory=dict)
    layers: Mapping[Layer, LayerIqaResult] = field(default_factory=dict)
    decomposition: Decomposition | None = None
    gate: GateOutcome | None = None
    missing_by_factor: Mapping[FactorId, tuple[str, ...]] = field(default_factory=dict)
    expected: Mapping[str, Decimal] = field(default_factory=dict)
    discrepancies: tuple[Discrepancy, ...] = ()
    notes: tuple[str, ...] = ()

    @classmethod
    def from_values(
        cls,
        case_id: str,
        device_values: Mapping[str, Fraction | Decimal | str],
        aggregates: Mapping[str, Fraction | Decimal | str] | None = None,
        *,
        kinds: Mapping[str, str] | None = None,
    ) -> AssessmentReport:
        """Report over already-computed per-device percentages.

        The total is their mean unless ``aggregates`` supplies ``IQA_tot``.
        """
        aggregates = {k: Fraction(str(v)) for k, v in (aggregates or {}).items()}
        kinds = kinds or {}
        devices = tuple(
            DeviceResult(dev, kinds.get(dev, ""), IqaResult(Fraction(str(v)), 1, "supplied value"))
            for dev, v in device_values.items()
        )
        total = None
        if TOTAL_LABEL in aggregates:
            total = IqaResult(aggregates[TOTAL_LABEL], 1, "supplied value")
        elif devices:
            total = IqaResult(
                aggregate_device_values(d.result.value for d in devices),
                len(devices),
                f"mean over {len(devices)} supplied device value(s)",
            )
        categories = {
            s: IqaResult(aggregates[s.label], 1, "supplied value") for s in InfoStatus if s.label in aggregates
        }
        return cls(case_id, MissingPolicy.AVAILABLE_ONLY, "supplied values", devices, total, categories)

    @property
    def per_device_value(self) -> dict[str, Fraction]:
        return {d.device_id: d.result.value for d in self.devices}

    def ranking(self) -> list[DeviceResult]:
        """Best first; equal values ordered by device id."""
        return sorted(self.devices, key=lambda d: (-d.result.value, d.device_id))

    def best(self) -> DeviceResult | None:
        ranked = self.ranking()
        return ranked[0] if ranked else None

    def worst(self) -> DeviceResult | None:
        # lowest value; ties resolved to the lexicographically first id
        if not self.devices:
            return None
        return min(self.devices, key=lambda d: (d.result.value, d.device_id))


def _explain(
    expected: Decimal,
    present_sum: Fraction,
    present_count: int,
    slots: int,
    missing_labels: Sequence[str],
) -> str:
    """Say whether ``missing_labels`` could close the gap between recomputed and expected.

    ``slots`` is the full term count of the nine-factor formula for this label
    (9 per device, or k*n for a status coefficient); each missing slot can hold
    any value in [0, 1].
    """
    missing = slots - present_count
    if missing <= 0:
        return "all factors present; the expected value does not follow from the recorded scores"
    low = present_sum / slots * 100
    high = (present_sum + missing) / slots * 100
    names = ", ".join(missing_labels)
    if low <= Fraction(expected) <= high:
        implied = Fraction(expected) / 100 * slots - present_sum
        return (
            f"{missing} missing factor value(s) ({names}); expected value is reachable with them "
            f"summing to {format_percent(implied)} (mean {format_percent(implied / missing)})"
        )
    return (
        f"irreconcilable: with {missing} missing factor value(s) ({names}) anywhere in [0, 1], "
        f"the result can only span {format_percent(low)}-{format_percent(high)}"
    )


def _discrepancies(
    case: CaseFile,
    devices: Sequence[DeviceResult],
    total: IqaResult | None,
    categories: Mapping[InfoStatus, IqaResult | None],
    weights: Weights,
) -> tuple[Discrepancy, ...]:
    expected = case.expected
    if expected is None:
        return ()
    analyse = weights.is_uniform
    found: list[Discrepancy] = []

    def check(label: str, want: Decimal, got: Fraction | None, factors: Sequence[FactorId], devs) -> None:
        if got is not None and abs(got - Fraction(want)) <= Fraction(DISCREPANCY_TOLERANCE):
            return
        if not analyse:
            why = "non-uniform weights; no missing-factor analysis"
        else:
            present_sum = sum(
                (d.scores[f].fraction for d in devs for f in factors if f in d.scores), Fraction(0)
            )
            present = sum(1 for d in devs for f in factors if f in d.scores)
            absent = sorted({f for d in devs for f in factors if f not in d.scores}, key=list(FactorId).index)
            why = _explain(want, present_sum, present, len(factors) * len(devs), [f.value for f in absent])
        if got is None:
            why = "not computable from this case; " + why
        found.append(Discrepancy(label, want, got, why))

    results = {d.device_id: d.result.value for d in devices}
    for dev_id, want in expected.devices.items():
        if dev_id in results:
            check(device_label(dev_id), want, results[dev_id], tuple(FactorId), [case.device(dev_id)])
    for status in InfoStatus:
        if status.label in expected.aggregates:
            res = categories.get(status)
            check(
                status.label,
                expected.aggregates[status.label],
                res.value if res else None,
                TAXONOMY.factors_with_status(status),
                case.devices,
            )
    if TOTAL_LABEL in expected.aggregates:
        check(
            TOTAL_LABEL,
            expected.aggregates[TOTAL_LABEL],
            total.value if total else None,
            tuple(FactorId),
            case.devices,
        )
    return tuple(found)


def _ranking_note(case: CaseFile, devices: Sequence[DeviceResult]) -> str | None:
    if case.expected is None or not case.expected.devices or not devices:
        return None
    exp = case.expected.devices
    exp_best = min(exp, key=lambda k: (-exp[k], k))
    exp_worst = min(exp, key=lambda k: (exp[k], k))
    got_best = min(devices, key=lambda d: (-d.result.value, d.device_id)).device_id
    got_worst = min(devices, key=lambda d: (d.result.value, d.device_id)).device_id
    if (exp_best, exp_worst) == (got_best, got_worst):
        return None
    return (
        f"ranking differs from expectations: expected best {exp_best} / worst {exp_worst}, "
        f"recomputed best {got_best} / worst {got_worst}"
    )


def assess(
    case: CaseFile,
    *,
    policy: MissingPolicy | None = None,
    weights: Weights | None = None,
    threshold: ThresholdPolicy | None = None,
    audit: AuditLog | None = None,
    actor: str = "",
) -> AssessmentReport:
    """Compute every coefficient for ``case``.

    Device and total coefficients must succeed (errors propagate); status
    and layer coefficients that cannot be computed under an available-only
    policy are reported as absent with a note. A threshold (argument or the
    case's own) is applied and, when ``audit`` is given, logged.
    """
    if not case.devices:
        raise EmptyAssessment(f"case {case.case_id} has no devices")
    policy = MissingPolicy(policy) if policy is not None else case.missing_policy
    weights = weights or case.weights or UNIFORM

    per_device = device_results(case, policy, weights)
    devices = tuple(
        DeviceResult(d.device_id, d.kind, per_device[d.device_id], d.absent) for d in case.devices
    )
    total = case_iqa(case, policy, weights)

    categories: dict[InfoStatus, IqaResult | None] = {}
    category_notes: dict[InfoStatus, str] = {}
    for status in InfoStatus:
        try:
            categories[status] = category_iqa(case, status, policy, weights)
        except MissingFactors:
            raise
        except ScoringError as exc:
            categories[status] = None
            category_notes[status] = str(exc)

    layers: dict[Layer, LayerIqaResult] = {}
    for layer in Layer:
        if any(d.layer_scores(layer) for d in case.devices):
            layers[layer] = layer_iqa(case, layer, policy)

    decomposition = None
    if weights.is_uniform and all(not d.absent for d in case.devices):
        decomposition = decompose(case)

    threshold = threshold or case.threshold
    outcome = None
    if threshold is not None:
        outcome = gate_values(
            {d.device_id: d.result.value for d in devices},
            threshold,
            audit=audit,
            actor=actor,
            case_id=case.case_id,
        )

    missing_by_factor = {
        f: tuple(d.device_id for d in case.devices if f not in d.scores)
        for f in FactorId
        if any(f not in d.scores for d in case.devices)
    }
    notes = list(case.expected.notes) if case.expected else []
    ranking_note = _ranking_note(case, devices)
    if ranking_note:
        notes.append(ranking_note)
    expected: dict[str, Decimal] = {}
    if case.expected is not None:
        expected.update({device_label(k): v for k, v in case.expected.devices.items()})
        expected.update(case.expected.aggregates)

    return AssessmentReport(
        case_id=case.case_id,
        policy=policy,
        weights_basis=weights.describe(),
        devices=devices,
        total=total,
        categories=categories,
        category_notes=category_notes,
        layers=layers,
        decomposition=decomposition,
        gate=outcome,
        missing_by_factor=missing_by_factor,
        expected=expected,
        discrepancies=_discrepancies(case, devices, total, categories, weights),
        notes=tuple(notes),
    )


def describe_discrepancy(d: Discrepancy) -> str:
    got = "n/a" if d.recomputed is None else format_percent(d.recomputed) + "%"
    delta = "" if d.delta is None else f", delta {format_signed(d.delta)}"
    return f"{d.label}: expected {d.expected:.2f}%, recomputed {got}{delta}; {d.explanation}"
