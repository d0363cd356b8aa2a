"""Domain types: factors, scores, devices, cases, and the fixed taxonomies.

Score values are exact hundredths held as :class:`~decimal.Decimal` quantized
to two places; everything derived from them (means, percentages, weights) is
a :class:`~fractions.Fraction`, so no binary floating point enters scoring.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace
from decimal import Decimal, InvalidOperation
from enum import Enum
from fractions import Fraction
from types import MappingProxyType
from typing import Union

from .errors import (
    DuplicateEntry,
    MissingJustification,
    MissingProvenance,
    OutOfRange,
    PrecisionError,
)

Number = Union[Decimal, Fraction, int, float, str]

HUNDREDTH = Decimal("0.01")


class FactorId(str, Enum):
    DTC = "DTC"  # device technical status
    DST = "DST"  # device security status
    CS = "CS"  # cloud service security status
    CM = "CM"  # cloud service manipulation of raw data
    SR = "SR"  # source reliability
    PC = "PC"  # privacy / data-protection compliance
    TDA = "TDA"  # technical data accessibility
    OT = "OT"  # observer technological advancement
    OS = "OS"  # observer skills

    def __str__(self) -> str:
        return self.value


FACTOR_NAMES: Mapping[FactorId, str] = MappingProxyType(
    {
        FactorId.DTC: "device technical status",
        FactorId.DST: "device security status",
        FactorId.CS: "cloud service security status",
        FactorId.CM: "cloud service manipulation of raw data",
        FactorId.SR: "source reliability",
        FactorId.PC: "privacy compliance",
        FactorId.TDA: "technical data accessibility",
        FactorId.OT: "observer technological advancement",
        FactorId.OS: "observer skills",
    }
)


class Layer(str, Enum):
    PHYSICAL = "physical"
    NETWORK = "network"
    APPLICATION = "application"

    @property
    def suffix(self) -> str:
        """One-letter suffix used in layered factor names (DSTp, DSTn, DSTa)."""
        return self.value[0]

    def __str__(self) -> str:
        return self.value


class Category(str, Enum):
    INTRINSIC = "intrinsic"
    CONTEXTUAL = "contextual"
    REPRESENTATIONAL = "representational"
    ACCESSIBILITY = "accessibility"

    def __str__(self) -> str:
        return self.value


class InfoStatus(str, Enum):
    AS_REALITY = "as_reality"
    ABOUT_REALITY = "about_reality"
    FOR_REALITY = "for_reality"

    @property
    def label(self) -> str:
        return _STATUS_LABELS[self]

    @property
    def description(self) -> str:
        return _STATUS_DESCRIPTIONS[self]

    def __str__(self) -> str:
        return self.value


_STATUS_LABELS = {
    InfoStatus.AS_REALITY: "IQA_I",
    InfoStatus.ABOUT_REALITY: "IQA_II",
    InfoStatus.FOR_REALITY: "IQA_III",
}
_STATUS_DESCRIPTIONS = {
    InfoStatus.AS_REALITY: "information as reality (relevance)",
    InfoStatus.ABOUT_REALITY: "information about reality (uncertainty)",
    InfoStatus.FOR_REALITY: "information for reality (accountability)",
}


class MissingPolicy(str, Enum):
    STRICT = "strict"
    AVAILABLE_ONLY = "available_only"
    IMPUTE_ZERO = "impute_zero"

    @classmethod
    def parse(cls, text: str) -> MissingPolicy:
        return cls(text.strip().lower().replace("-", "_"))

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class TaxonomyTable:
    category: Mapping[FactorId, Category]
    info_status: Mapping[FactorId, InfoStatus]

    def factors_with_status(self, status: InfoStatus) -> tuple[FactorId, ...]:
        return tuple(f for f in FactorId if self.info_status[f] is status)

    def factors_in_category(self, category: Category) -> tuple[FactorId, ...]:
        return tuple(f for f in FactorId if self.category[f] is category)


TAXONOMY = TaxonomyTable(
    category=MappingProxyType(
        {
            FactorId.DTC: Category.INTRINSIC,
            FactorId.DST: Category.CONTEXTUAL,
            FactorId.CS: Category.CONTEXTUAL,
            FactorId.CM: Category.REPRESENTATIONAL,
            FactorId.SR: Category.REPRESENTATIONAL,
            FactorId.PC: Category.ACCESSIBILITY,
            FactorId.TDA: Category.ACCESSIBILITY,
            FactorId.OT: Category.ACCESSIBILITY,
            FactorId.OS: Category.ACCESSIBILITY,
        }
    ),
    info_status=MappingProxyType(
        {
            FactorId.DTC: InfoStatus.AS_REALITY,
            FactorId.DST: InfoStatus.AS_REALITY,
            FactorId.CS: InfoStatus.AS_REALITY,
            FactorId.CM: InfoStatus.ABOUT_REALITY,
            FactorId.SR: InfoStatus.ABOUT_REALITY,
            FactorId.PC: InfoStatus.FOR_REALITY,
            FactorId.TDA: InfoStatus.FOR_REALITY,
            FactorId.OT: InfoStatus.FOR_REALITY,
            FactorId.OS: InfoStatus.FOR_REALITY,
        }
    ),
)


def category_of(factor: FactorId) -> Category:
    return TAXONOMY.category[FactorId(factor)]


def info_status_of(factor: FactorId) -> InfoStatus:
    return TAXONOMY.info_status[FactorId(factor)]


def expand_layers(factor: FactorId) -> list[tuple[FactorId, Layer]]:
    """The physical, network and application variants of ``factor``."""
    factor = FactorId(factor)
    return [(factor, layer) for layer in Layer]


def layered_name(factor: FactorId, layer: Layer) -> str:
    return f"{FactorId(factor).value}{Layer(layer).suffix}"


# -- values -------------------------------------------------------------------


def to_score_value(value: Number) -> Decimal:
    """Coerce ``value`` to an exact two-place Decimal in [0, 1].

    Floats go through ``repr`` so ``0.56`` means 0.56, not its binary
    neighbour. Raises OutOfRange / PrecisionError.
    """
    if isinstance(value, bool):
        raise PrecisionError(f"not a number: {value!r}")
    try:
        if isinstance(value, Fraction):
            if 100 % value.denominator:
                raise PrecisionError(f"{value} is not an exact hundredth")
            dec = Decimal(value.numerator * (100 // value.denominator)) / 100
        elif isinstance(value, float):
            dec = Decimal(repr(value))
        else:
            dec = Decimal(str(value).strip()) if isinstance(value, str) else Decimal(value)
    except InvalidOperation as exc:
        raise PrecisionError(f"not a decimal number: {value!r}") from exc
    if not dec.is_finite():
        raise OutOfRange(f"not a finite number: {value!r}")
    if dec < 0 or dec > 1:
        raise OutOfRange(f"{value} outside [0.00, 1.00]")
    scaled = dec * 100
    if scaled != scaled.to_integral_value():
        raise PrecisionError(f"{value} has more than two decimal places")
    return dec.quantize(HUNDREDTH)


def _require_text(text: str, what: str, exc: type[Exception]) -> str:
    if not isinstance(text, str) or not text.strip():
        raise exc(f"{what} must be non-empty text")
    return text


@dataclass(frozen=True)
class FactorScore:
    factor: FactorId
    value: Decimal
    justification: str
    provenance: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "factor", FactorId(self.factor))
        object.__setattr__(self, "value", to_score_value(self.value))
        _require_text(self.justification, "justification", MissingJustification)
        _require_text(self.provenance, "provenance", MissingProvenance)

    @property
    def hundredths(self) -> int:
        return int(self.value * 100)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.hundredths, 100)


@dataclass(frozen=True)
class LayeredFactorScore:
    factor: FactorId
    layer: Layer
    value: Decimal
    justification: str
    provenance: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "factor", FactorId(self.factor))
        object.__setattr__(self, "layer", Layer(self.layer))
        object.__setattr__(self, "value", to_score_value(self.value))
        _require_text(self.justification, "justification", MissingJustification)
        _require_text(self.provenance, "provenance", MissingProvenance)

    @property
    def key(self) -> tuple[FactorId, Layer]:
        return (self.factor, self.layer)

    @property
    def hundredths(self) -> int:
        return int(self.value * 100)

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.hundredths, 100)


def make_score(factor: FactorId, value: Number, justification: str, provenance: str) -> FactorScore:
    return FactorScore(FactorId(factor), value, justification, provenance)  # type: ignore[arg-type]


def make_layered_score(
    factor: FactorId, layer: Layer, value: Number, justification: str, provenance: str
) -> LayeredFactorScore:
    return LayeredFactorScore(FactorId(factor), Layer(layer), value, justification, provenance)  # type: ignore[arg-type]


# -- devices and cases ----------------------------------------------------------


def _index_scores(scores: Iterable[FactorScore] | Mapping[FactorId, FactorScore]) -> dict[FactorId, FactorScore]:
    if isinstance(scores, Mapping):
        out = {}
        for key, score in scores.items():
            if FactorId(key) is not score.factor:
                raise ValueError(f"score for {score.factor} filed under {key}")
            out[score.factor] = score
        return out
    out = {}
    for score in scores:
        if score.factor in out:
            raise DuplicateEntry(f"duplicate score for factor {score.factor}")
        out[score.factor] = score
    return out


def _index_layered(
    scores: Iterable[LayeredFactorScore] | Mapping[tuple[FactorId, Layer], LayeredFactorScore],
) -> dict[tuple[FactorId, Layer], LayeredFactorScore]:
    items = scores.values() if isinstance(scores, Mapping) else scores
    out: dict[tuple[FactorId, Layer], LayeredFactorScore] = {}
    for score in items:
        if score.key in out:
            raise DuplicateEntry(f"duplicate layered score for {layered_name(*score.key)}")
        out[score.key] = score
    return out


@dataclass(frozen=True)
class DeviceAssessment:
    """One seized device and whatever factor scores could be assessed for it.

    Scores may be partial; completeness is a per-operation policy.
    """

    device_id: str
    kind: str
    scores: Mapping[FactorId, FactorScore] = field(default_factory=dict)
    layered_scores: Mapping[tuple[FactorId, Layer], LayeredFactorScore] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not isinstance(self.device_id, str) or not self.device_id.strip():
            raise ValueError("device_id must be non-empty text")
        ordered = _index_scores(self.scores)
        object.__setattr__(self, "scores", MappingProxyType({f: ordered[f] for f in FactorId if f in ordered}))
        layered = _index_layered(self.layered_scores)
        object.__setattr__(
            self,
            "layered_scores",
            MappingProxyType({(f, l): layered[(f, l)] for f in FactorId for l in Layer if (f, l) in layered}),
        )

    @property
    def present(self) -> tuple[FactorId, ...]:
        return tuple(self.scores)

    @property
    def absent(self) -> tuple[FactorId, ...]:
        return tuple(f for f in FactorId if f not in self.scores)

    def layer_scores(self, layer: Layer) -> dict[FactorId, LayeredFactorScore]:
        return {f: s for (f, l), s in self.layered_scores.items() if l is layer}

    def with_score(self, score: FactorScore) -> DeviceAssessment:
        return replace(self, scores={**self.scores, score.factor: score})

    def with_layered_score(self, score: LayeredFactorScore) -> DeviceAssessment:
        return replace(self, layered_scores={**self.layered_scores, score.key: score})

    def without_factor(self, factor: FactorId) -> DeviceAssessment:
        return replace(self, scores={f: s for f, s in self.scores.items() if f is not factor})



def _to_fraction(value: Number) -> Fraction:
    if isinstance(value, bool):
        raise ValueError(f"not a number: {value!r}")
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


@dataclass(frozen=True)
class Weights:
    """Per-factor weights. Factors not listed keep weight 1; weight 0 excludes."""

    values: Mapping[FactorId, Fraction]
    _table: Mapping[FactorId, Fraction] = field(init=False, repr=False, compare=False)
    _uniform: bool = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        parsed = {}
        for key, raw in self.values.items():
            weight = _to_fraction(raw)
            if weight < 0:
                raise ValueError(f"weight for {key} is negative")
            parsed[FactorId(key)] = weight
        object.__setattr__(self, "values", MappingProxyType({f: parsed[f] for f in FactorId if f in parsed}))
        table = {f: parsed.get(f, Fraction(1)) for f in FactorId}
        if not any(w > 0 for w in table.values()):
            raise ValueError("at least one weight must be positive")
        object.__setattr__(self, "_table", MappingProxyType(table))
        object.__setattr__(self, "_uniform", len(set(table.values())) == 1)

    def weight(self, factor: FactorId) -> Fraction:
        return self._table[factor]

    @property
    def is_uniform(self) -> bool:
        return self._uniform

    def describe(self) -> str:
        if self.is_uniform:
            return "uniform weights"
        return "weights " + ", ".join(f"{f}={self.weight(f)}" for f in FactorId)



@dataclass(frozen=True)
class ThresholdPolicy:
    cutoff: Fraction
    justification: str

    def __post_init__(self) -> None:
        cutoff = _to_fraction(self.cutoff)
        if not 0 <= cutoff <= 100:
            raise OutOfRange(f"cutoff {cutoff} outside [0, 100]")
        object.__setattr__(self, "cutoff", cutoff)
        _require_text(self.justification, "threshold justification", MissingJustification)


@dataclass(frozen=True)
class Expectations:
    """Previously published results embedded in a case file for cross-checking."""

    devices: Mapping[str, Decimal] = field(default_factory=dict)
    aggregates: Mapping[str, Decimal] = field(default_factory=dict)
    source: str = ""
    notes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "devices", MappingProxyType({k: Decimal(v) for k, v in self.devices.items()}))
        object.__setattr__(self, "aggregates", MappingProxyType({k: Decimal(v) for k, v in self.aggregates.items()}))
        object.__setattr__(self, "notes", tuple(self.notes))



SCHEMA_VERSION = 1


@dataclass(frozen=True)
class CaseFile:
    case_id: str
    devices: tuple[DeviceAssessment, ...]
    schema_version: int = SCHEMA_VERSION
    weights: Weights | None = None
    missing_policy: MissingPolicy = MissingPolicy.AVAILABLE_ONLY
    threshold: ThresholdPolicy | None = None
    audit_log: str | None = None
    expected: Expectations | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "devices", tuple(self.devices))
        object.__setattr__(self, "missing_policy", MissingPolicy(self.missing_policy))
        if not isinstance(self.schema_version, int) or self.schema_version < 1:
            raise ValueError("schema_version must be an integer >= 1")
        seen: set[str] = set()
        for dev in self.devices:
            if dev.device_id in seen:
                raise DuplicateEntry(f"duplicate device id {dev.device_id!r}")
            seen.add(dev.device_id)

    @property
    def device_ids(self) -> tuple[str, ...]:
        return tuple(d.device_id for d in self.devices)

    def device(self, device_id: str) -> DeviceAssessment:
        for dev in self.devices:
            if dev.device_id == device_id:
                return dev
        raise KeyError(device_id)

    def replace_device(self, device: DeviceAssessment) -> CaseFile:
        devices = tuple(device if d.device_id == device.device_id else d for d in self.devices)
        if device.device_id not in self.device_ids:
            raise KeyError(device.device_id)
        return replace(self, devices=devices)

    def with_devices(self, devices: Iterable[DeviceAssessment]) -> CaseFile:
        return replace(self, devices=tuple(devices))
