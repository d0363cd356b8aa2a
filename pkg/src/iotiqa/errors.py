"""Exception hierarchy for the IQA toolkit.

Every error the library raises derives from :class:`IqaError`; the CLI maps
them onto exit code 2 (domain failure). Validation errors that represent bad
input values additionally derive from :class:`ValueError`.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass


class IqaError(Exception):
    """Base class for all toolkit errors."""


# -- score construction -------------------------------------------------------


class ScoreError(IqaError, ValueError):
    pass


class OutOfRange(ScoreError):
    pass


class PrecisionError(ScoreError):
    pass


class MissingJustification(ScoreError):
    pass


class MissingProvenance(ScoreError):
    pass


class DuplicateEntry(IqaError, ValueError):
    """A device id, factor, or (factor, layer) cell appears twice."""


# -- scoring ------------------------------------------------------------------


class ScoringError(IqaError):
    device_id: str | None = None


class MissingFactors(ScoringError):
    """Strict policy met an absent factor.

    ``missing`` maps a device id to the labels of the factors it lacks, so a
    single error can report every device at once.
    """

    def __init__(self, missing: Mapping[str, Iterable[str]]):
        self.missing = {dev: tuple(labels) for dev, labels in missing.items()}
        parts = [f"device {dev}: {', '.join(labels)}" for dev, labels in self.missing.items()]
        super().__init__("missing factors under strict policy -> " + "; ".join(parts))


class EmptyAssessment(ScoringError):
    pass


class ZeroWeightSum(ScoringError):
    pass


class NoLayeredScores(ScoringError):
    pass


class NonUniformWeights(ScoringError):
    pass


# -- checklist ----------------------------------------------------------------


class ChecklistError(IqaError, ValueError):
    pass


class IncompleteAnswers(ChecklistError):
    pass


class MixedArity(ChecklistError):
    pass


# -- case documents -----------------------------------------------------------


@dataclass(frozen=True)
class Finding:
    """One problem found in a case document, with a path-like locator."""

    locator: str
    message: str

    def __str__(self) -> str:
        return f"{self.locator}: {self.message}"


class CaseDocumentError(IqaError):
    def __init__(self, findings: Iterable[Finding]):
        self.findings = tuple(findings)
        lines = "\n".join(f"  {f}" for f in self.findings)
        super().__init__(f"{type(self).__name__}: {len(self.findings)} finding(s)\n{lines}")


class CaseSyntaxError(CaseDocumentError):
    pass


class SchemaError(CaseDocumentError):
    pass


class CaseValidationError(CaseDocumentError, ValueError):
    pass


# -- audit ----------------------------------------------------------------------


class AuditError(IqaError):
    pass


class JustificationRequired(AuditError, ValueError):
    pass


class SinkUnavailable(AuditError, OSError):
    pass


# -- reporting --------------------------------------------------------------------


class DegenerateSpec(IqaError, ValueError):
    pass
