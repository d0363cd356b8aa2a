"""Per-factor examiner checklists and the rubric that turns answers into scores.

Each question is answered on a five-level ordinal scale (No, Poor, Partial,
Good, Full -> 0, .25, .5, .75, 1) or with a direct numeric value; the factor
score is the mean of the per-question values, rounded half-up to hundredths.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from decimal import Decimal
from enum import Enum
from fractions import Fraction
from types import MappingProxyType
from typing import Any

from .errors import IncompleteAnswers, MissingJustification, MixedArity
from .model import FactorId, FactorScore, Number, to_score_value
from .rounding import round_half_up


class Level(str, Enum):
    NO = "No"
    POOR = "Poor"
    PARTIAL = "Partial"
    GOOD = "Good"
    FULL = "Full"

    @property
    def value_hundredths(self) -> int:
        return _LEVEL_HUNDREDTHS[self]

    @classmethod
    def parse(cls, text: str) -> Level:
        for level in cls:
            if level.value.lower() == text.strip().lower():
                return level
        raise ValueError(f"unknown level {text!r} (expected one of {', '.join(l.value for l in cls)})")

    def __str__(self) -> str:
        return self.value


_LEVEL_HUNDREDTHS = {Level.NO: 0, Level.POOR: 25, Level.PARTIAL: 50, Level.GOOD: 75, Level.FULL: 100}
LEVELS: tuple[Level, ...] = tuple(Level)


@dataclass(frozen=True)
class ChecklistTemplate:
    factor: FactorId
    questions: tuple[str, ...]
    note: str = ""


_EDITORIAL = "multi-part checklist item split into separate prompts"

_TEMPLATES: Mapping[FactorId, ChecklistTemplate] = MappingProxyType(
    {
        FactorId.DTC: ChecklistTemplate(
            FactorId.DTC,
            (
                "What is the technical status of the hardware part of the system?",
                "Is the software part of the system updated to the latest release?",
            ),
            _EDITORIAL,
        ),
        FactorId.DST: ChecklistTemplate(
            FactorId.DST,
            (
                "Is the hardware set up, wired, and maintained taking into account the security rules "
                "corresponding to the best practices?",
                "Is the software devoted to managing the system provided with proper and up-to-date "
                "antivirus protection?",
                "Are the accesses to the system properly logged?",
            ),
            _EDITORIAL,
        ),
        FactorId.CS: ChecklistTemplate(
            FactorId.CS,
            (
                "Is easily obtained the information about the channel towards data are broadcasted?",
                "Is the entity from which data originate certified and reliable?",
            ),
            _EDITORIAL,
        ),
        FactorId.CM: ChecklistTemplate(
            FactorId.CM,
            (
                "Are data stored, even for a short period of time, in a repository that could be totally "
                "or partially accessible by some agent?",
            ),
        ),
        FactorId.SR: ChecklistTemplate(
            FactorId.SR,
            (
                "Does the observer possess, or able to obtain, additional information about the source "
                "where the data originate?",
            ),
        ),
        FactorId.PC: ChecklistTemplate(
            FactorId.PC,
            ("Are the footage and related metadata saved and preserved following the most recent GDPR precepts?",),
        ),
        FactorId.TDA: ChecklistTemplate(
            FactorId.TDA,
            (
                "Are the technical specifications regarding the device and the format of the obtained data "
                "easily available, or provided directly by the owner of the data?",
            ),
        ),
        FactorId.OT: ChecklistTemplate(
            FactorId.OT,
            ("Is the observer recently acknowledged in some way as a valuable operator in the field?",),
        ),
        FactorId.OS: ChecklistTemplate(
            FactorId.OS,
            ("What is the expertise of the observer as a digital Forensics investigator?",),
        ),
    }
)


def checklist_for(factor: FactorId) -> ChecklistTemplate:
    return _TEMPLATES[FactorId(factor)]


@dataclass(frozen=True)
class Answer:
    """Answer to one checklist question: an ordinal ``level`` or a numeric ``override``."""

    question: int
    note: str
    level: Level | None = None
    override: Decimal | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.note, str) or not self.note.strip():
            raise MissingJustification(f"answer to question {self.question + 1} needs a note")
        if (self.level is None) == (self.override is None):
            raise ValueError("an answer has exactly one of level or override")
        if self.level is not None:
            object.__setattr__(self, "level", Level(self.level))
        else:
            object.__setattr__(self, "override", to_score_value(self.override))  # type: ignore[arg-type]

    @property
    def hundredths(self) -> int:
        if self.level is not None:
            return self.level.value_hundredths
        return int(self.override * 100)  # type: ignore[operator]

    @classmethod
    def of(cls, question: int, answer: Level | Number, note: str) -> Answer:
        if isinstance(answer, Level):
            return cls(question, note, level=answer)
        if isinstance(answer, str):
            try:
                return cls(question, note, level=Level.parse(answer))
            except ValueError:
                pass
        return cls(question, note, override=answer)  # type: ignore[arg-type]


def score_answers(
    factor: FactorId,
    answers: Iterable[Answer],
    provenance: str = "checklist rubric",
) -> FactorScore:
    """Turn one complete set of checklist answers into a FactorScore."""
    template = checklist_for(factor)
    by_question: dict[int, Answer] = {}
    for answer in answers:
        if not 0 <= answer.question < len(template.questions):
            raise MixedArity(
                f"{template.factor}: no question {answer.question + 1} (checklist has {len(template.questions)})"
            )
        if answer.question in by_question:
            raise MixedArity(f"{template.factor}: question {answer.question + 1} answered twice")
        by_question[answer.question] = answer
    unanswered = [i + 1 for i in range(len(template.questions)) if i not in by_question]
    if unanswered:
        raise IncompleteAnswers(f"{template.factor}: unanswered question(s) {', '.join(map(str, unanswered))}")
    mean = Fraction(sum(a.hundredths for a in by_question.values()), 100 * len(by_question))
    justification = " | ".join(
        f"Q{i + 1} [{_answer_label(by_question[i])}]: {by_question[i].note.strip()}" for i in sorted(by_question)
    )
    return FactorScore(template.factor, round_half_up(mean), justification, provenance)


def _answer_label(answer: Answer) -> str:
    return answer.level.value if answer.level is not None else f"{answer.override:.2f}"


def parse_answers(doc: Mapping[str, Any] | list[Any]) -> list[Answer]:
    """Read answers from a decoded answers file.

    Accepts ``{"answers": [...]}`` or a bare list. Each entry is
    ``{"question": 1, "level": "Good", "note": "..."}`` or carries a
    ``"value": "0.40"`` instead of ``"level"``. Question numbers are 1-based.
    """
    items = doc.get("answers") if isinstance(doc, Mapping) else doc
    if not isinstance(items, list):
        raise ValueError("answers file must hold a list of answers")
    answers = []
    for item in items:
        if not isinstance(item, Mapping) or "question" not in item:
            raise ValueError(f"malformed answer entry: {item!r}")
        question = int(item["question"]) - 1
        note = item.get("note", "")
        if "level" in item:
            answers.append(Answer(question, note, level=Level.parse(str(item["level"]))))
        elif "value" in item:
            answers.append(Answer(question, note, override=str(item["value"])))  # type: ignore[arg-type]
        else:
            raise ValueError(f"answer to question {question + 1} has neither level nor value")
    return answers
