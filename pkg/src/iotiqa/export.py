"""Tabular export of an assessment: one row per device, then the aggregates."""

from __future__ import annotations

import csv
import io
from fractions import Fraction

from .assessment import TOTAL_LABEL, AssessmentReport, device_label
from .model import InfoStatus, Layer
from .rounding import format_percent, format_signed

LAYER_LABELS = {Layer.PHYSICAL: "IQA_p", Layer.NETWORK: "IQA_n", Layer.APPLICATION: "IQA_a"}


def table_rows(report: AssessmentReport) -> list[tuple[str, Fraction | None]]:
    rows: list[tuple[str, Fraction | None]] = [(device_label(d.device_id), d.result.value) for d in report.devices]
    for status in InfoStatus:
        result = report.categories.get(status)
        rows.append((status.label, result.value if result else None))
    rows.append((TOTAL_LABEL, report.total.value if report.total else None))
    for layer, result in report.layers.items():
        rows.append((LAYER_LABELS[layer], result.normalized_value))
    return rows


def export_table(report: AssessmentReport) -> str:
    """CSV text with LF line endings and two-decimal percentages.

    When the report carries expected values, two more columns hold the
    expected percentage and the signed difference recomputed minus expected.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    with_expected = bool(report.expected)
    header = ["label", "iqa_percent"]
    if with_expected:
        header += ["expected_percent", "discrepancy"]
    writer.writerow(header)
    for label, value in table_rows(report):
        row = [label, "" if value is None else format_percent(value)]
        if with_expected:
            want = report.expected.get(label)
            row.append("" if want is None else f"{want:.2f}")
            row.append("" if want is None or value is None else format_signed(value - Fraction(want)))
        writer.writerow(row)
    return buf.getvalue()
