"""IQA coefficients: total, per device, per information status, per IoT layer.

All results are exact :class:`~fractions.Fraction` percentages. The per-device
coefficient is a weighted mean of factor values scaled to 100; the case-level
coefficient is the mean of the per-device ones, which reduces to the flat
``sum / (9n) * 100`` when every device is complete and weights are uniform.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING

from .errors import (
    EmptyAssessment,
    MissingFactors,
    MissingJustification,
    NoLayeredScores,
    NonUniformWeights,
    ScoringError,
    ZeroWeightSum,
)
from .model import (
    TAXONOMY,
    CaseFile,
    DeviceAssessment,
    FactorId,
    InfoStatus,
    Layer,
    MissingPolicy,
    ThresholdPolicy,
    Weights,
    layered_name,
)

if TYPE_CHECKING:
    from .audit import AuditLog

ALL_FACTORS: tuple[FactorId, ...] = tuple(FactorId)
UNIFORM = Weights({})


@dataclass(frozen=True)
class IqaResult:
    value: Fraction
    numerator_terms: int
    basis: str

    def __post_init__(self) -> None:
        if not 0 <= self.value <= 100:
            raise ValueError(f"IQA {self.value} outside [0, 100]")
        if self.numerator_terms < 1:
            raise ValueError("an IQA needs at least one aggregated term")


@dataclass(frozen=True)
class LayerIqaResult:
    layer: Layer
    raw_value: Fraction
    normalized_value: Fraction
    per_device_terms: Mapping[str, Fraction]

    @property
    def h(self) -> int:
        return len(self.per_device_terms)


@dataclass(frozen=True)
class GateOutcome:
    retained: tuple[str, ...]
    discarded: tuple[str, ...]
    cutoff: Fraction
    per_device_value: Mapping[str, Fraction]
    justification: str = ""


@dataclass(frozen=True)
class Decomposition:
    as_reality: Fraction
    about_reality: Fraction
    for_reality: Fraction
    recombined: Fraction
    total: Fraction

    @property
    def holds(self) -> bool:
        return self.recombined == self.total


def recombine(as_reality: Fraction, about_reality: Fraction, for_reality: Fraction) -> Fraction:
    """Weight the three status coefficients back together by factor count (3/2/4)."""
    sizes = [len(TAXONOMY.factors_with_status(s)) for s in InfoStatus]
    parts = [Fraction(as_reality), Fraction(about_reality), Fraction(for_reality)]
    return sum((k * p for k, p in zip(sizes, parts)), Fraction(0)) / sum(sizes)


def _describe(policy: MissingPolicy, weights: Weights) -> str:
    return f"{policy.value}, {weights.describe()}"


def _weighted_mean(
    device: DeviceAssessment,
    factors: Sequence[FactorId],
    policy: MissingPolicy,
    weights: Weights,
) -> tuple[Fraction, int] | None:
    """Weighted mean of ``device``'s values over ``factors`` and the term count.

    Returns None when the device has nothing scorable in ``factors`` (the
    caller decides whether that is an error or a skip).
    """
    included = [f for f in factors if weights.weight(f) > 0]
    if not included:
        raise ZeroWeightSum("every factor in scope has weight 0")
    present = [f for f in included if f in device.scores]
    absent = [f for f in included if f not in device.scores]
    if policy is MissingPolicy.STRICT and absent:
        raise MissingFactors({device.device_id: [f.value for f in absent]})
    if not present:
        if policy is MissingPolicy.IMPUTE_ZERO:
            return Fraction(0), len(included)
        return None
    terms = present if policy is MissingPolicy.AVAILABLE_ONLY else included
    if weights.is_uniform:
        # common weight cancels; stay in integer hundredths until the end
        return Fraction(sum(device.scores[f].hundredths for f in present), 100 * len(terms)), len(terms)
    numerator = sum((weights.weight(f) * device.scores[f].fraction for f in present), Fraction(0))
    denominator = sum((weights.weight(f) for f in terms), Fraction(0))
    return numerator / denominator, len(terms)


def _tag(exc: ScoringError, device_id: str) -> ScoringError:
    exc.device_id = device_id
    if not isinstance(exc, MissingFactors) and exc.args and not str(exc.args[0]).startswith("device "):
        exc.args = (f"device {device_id}: {exc.args[0]}",) + exc.args[1:]
    return exc


def device_iqa(
    assessment: DeviceAssessment,
    policy: MissingPolicy = MissingPolicy.AVAILABLE_ONLY,
    weights: Weights | None = None,
) -> IqaResult:
    weights = weights or UNIFORM
    policy = MissingPolicy(policy)
    if not assessment.scores:
        raise _tag(EmptyAssessment("no factor scores"), assessment.device_id)
    try:
        result = _weighted_mean(assessment, ALL_FACTORS, policy, weights)
    except ScoringError as exc:
        raise _tag(exc, assessment.device_id)
    if result is None:
        raise _tag(ZeroWeightSum("all assessed factors have weight 0"), assessment.device_id)
    mean, terms = result
    return IqaResult(mean * 100, terms, _describe(policy, weights))


def aggregate_device_values(values: Iterable[Fraction]) -> Fraction:
    """Case-level coefficient from per-device coefficients (arithmetic mean)."""
    values = [Fraction(v) for v in values]
    if not values:
        raise EmptyAssessment("no devices to aggregate")
    return sum(values, Fraction(0)) / len(values)


def _resolve(case: CaseFile, policy: MissingPolicy | None, weights: Weights | None) -> tuple[MissingPolicy, Weights]:
    return (
        MissingPolicy(policy) if policy is not None else case.missing_policy,
        weights or case.weights or UNIFORM,
    )


def device_results(
    case: CaseFile,
    policy: MissingPolicy | None = None,
    weights: Weights | None = None,
) -> dict[str, IqaResult]:
    """Per-device IQA for every device; strict-mode gaps are reported together."""
    policy, weights = _resolve(case, policy, weights)
    results: dict[str, IqaResult] = {}
    missing: dict[str, tuple[str, ...]] = {}
    for dev in case.devices:
        try:
            results[dev.device_id] = device_iqa(dev, policy, weights)
        except MissingFactors as exc:
            missing.update(exc.missing)
    if missing:
        raise MissingFactors(missing)
    return results


def case_iqa(
    case: CaseFile,
    policy: MissingPolicy | None = None,
    weights: Weights | None = None,
) -> IqaResult:
    if not case.devices:
        raise EmptyAssessment(f"case {case.case_id} has no devices")
    policy, weights = _resolve(case, policy, weights)
    per_device = device_results(case, policy, weights)
    value = aggregate_device_values(r.value for r in per_device.values())
    terms = sum(r.numerator_terms for r in per_device.values())
    return IqaResult(value, terms, f"{_describe(policy, weights)}, mean over {len(per_device)} device(s)")


def category_iqa(
    case: CaseFile,
    status: InfoStatus,
    policy: MissingPolicy | None = None,
    weights: Weights | None = None,
) -> IqaResult:
    """IQA restricted to the factors of one information status.

    Under available_only, devices with none of the status's factors are
    skipped and named in ``basis``.
    """
    status = InfoStatus(status)
    policy, weights = _resolve(case, policy, weights)
    factors = TAXONOMY.factors_with_status(status)
    if not any(f in dev.scores for dev in case.devices for f in factors):
        raise EmptyAssessment(f"{status.label}: no device has a score for {', '.join(f.value for f in factors)}")
    means: list[Fraction] = []
    terms = 0
    skipped: list[str] = []
    missing: dict[str, tuple[str, ...]] = {}
    for dev in case.devices:
        try:
            result = _weighted_mean(dev, factors, policy, weights)
        except MissingFactors as exc:
            missing.update(exc.missing)
            continue
        if result is None:
            skipped.append(dev.device_id)
            continue
        means.append(result[0])
        terms += result[1]
    if missing:
        raise MissingFactors(missing)
    if not means:
        raise EmptyAssessment(f"{status.label}: no device has a score for {', '.join(f.value for f in factors)}")
    basis = f"{_describe(policy, weights)}, {status.label} over {len(means)} device(s)"
    if skipped:
        basis += f"; skipped {', '.join(skipped)}"
    return IqaResult(aggregate_device_values(means) * 100, terms, basis)


def layer_iqa(
    case: CaseFile,
    layer: Layer,
    policy: MissingPolicy | None = None,
) -> LayerIqaResult:
    """Per-layer coefficient: sum over devices of the mean evaluable layered factor.

    ``raw_value`` is the plain sum of per-device means (range [0, h]);
    ``normalized_value`` divides by the number of contributing devices and
    scales to a percentage.
    """
    layer = Layer(layer)
    policy = MissingPolicy(policy) if policy is not None else case.missing_policy
    terms: dict[str, Fraction] = {}
    missing: dict[str, tuple[str, ...]] = {}
    if not any(dev.layer_scores(layer) for dev in case.devices):
        raise NoLayeredScores(f"no device has {layer.value}-layer scores")
    for dev in case.devices:
        cells = dev.layer_scores(layer)
        if policy is MissingPolicy.IMPUTE_ZERO:
            total = sum((s.fraction for s in cells.values()), Fraction(0))
            terms[dev.device_id] = total / len(ALL_FACTORS)
            continue
        if not cells:
            if policy is MissingPolicy.STRICT:
                missing[dev.device_id] = tuple(layered_name(f, layer) for f in ALL_FACTORS)
            continue
        terms[dev.device_id] = sum((s.fraction for s in cells.values()), Fraction(0)) / len(cells)
    if missing:
        raise MissingFactors(missing)
    raw = sum(terms.values(), Fraction(0))
    return LayerIqaResult(layer, raw, raw / len(terms) * 100, terms)


def decompose(case: CaseFile) -> Decomposition:
    """Status coefficients of a complete case and the identity tying them to the total.

    Only defined on complete data with uniform weights; anything else raises
    rather than report an identity that cannot hold.
    """
    if case.weights is not None and not case.weights.is_uniform:
        raise NonUniformWeights("decomposition requires uniform weights")
    strict = MissingPolicy.STRICT
    i, ii, iii = (category_iqa(case, s, strict, UNIFORM).value for s in InfoStatus)
    total = case_iqa(case, strict, UNIFORM).value
    return Decomposition(i, ii, iii, recombine(i, ii, iii), total)


def gate_values(
    per_device_value: Mapping[str, Fraction],
    threshold: ThresholdPolicy,
    *,
    audit: AuditLog | None = None,
    actor: str = "",
    case_id: str = "",
    source: str = "recomputed",
) -> GateOutcome:
    """Split devices at ``threshold.cutoff``; values equal to the cutoff are retained."""
    if not isinstance(threshold.justification, str) or not threshold.justification.strip():
        raise MissingJustification("a threshold gate needs a justification")
    values = {dev: Fraction(v) for dev, v in per_device_value.items()}
    retained = tuple(dev for dev, v in values.items() if v >= threshold.cutoff)
    discarded = tuple(dev for dev, v in values.items() if v < threshold.cutoff)
    outcome = GateOutcome(retained, discarded, threshold.cutoff, values, threshold.justification)
    if audit is not None:
        from .audit import gate_event_detail

        audit.record(
            "GateApplied",
            actor=actor,
            detail=gate_event_detail(outcome, case_id=case_id, source=source),
            justification=threshold.justification,
        )
    return outcome


def gate(
    case: CaseFile,
    threshold: ThresholdPolicy | None = None,
    *,
    audit: AuditLog | None = None,
    actor: str = "",
) -> GateOutcome:
    threshold = threshold or case.threshold
    if threshold is None:
        raise MissingJustification("no threshold policy given and none set on the case")
    values = {dev: r.value for dev, r in device_results(case).items()}
    return gate_values(values, threshold, audit=audit, actor=actor, case_id=case.case_id)
