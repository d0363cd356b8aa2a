"""Information-quality assessment of IoT evidence sources for forensic casework."""

from .assessment import AssessmentReport, assess
from .casefile import load_case, load_fixture, parse_case, serialize_case
from .checklist import Answer, Level, checklist_for, score_answers
from .model import (
    CaseFile,
    DeviceAssessment,
    FactorId,
    FactorScore,
    InfoStatus,
    Layer,
    LayeredFactorScore,
    MissingPolicy,
    ThresholdPolicy,
    Weights,
    category_of,
    expand_layers,
    info_status_of,
    make_score,
)
from .scoring import case_iqa, category_iqa, decompose, device_iqa, gate, layer_iqa

__version__ = "0.1.0"

__all__ = [
    "Answer",
    "AssessmentReport",
    "CaseFile",
    "DeviceAssessment",
    "FactorId",
    "FactorScore",
    "InfoStatus",
    "Layer",
    "LayeredFactorScore",
    "Level",
    "MissingPolicy",
    "ThresholdPolicy",
    "Weights",
    "assess",
    "case_iqa",
    "category_iqa",
    "category_of",
    "checklist_for",
    "decompose",
    "device_iqa",
    "expand_layers",
    "gate",
    "info_status_of",
    "layer_iqa",
    "load_case",
    "load_fixture",
    "make_score",
    "parse_case",
    "score_answers",
    "serialize_case",
]
