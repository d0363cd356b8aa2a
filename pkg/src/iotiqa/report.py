"""Plain-text rendering of an :class:`~iotiqa.assessment.AssessmentReport`."""

from __future__ import annotations

from .assessment import AssessmentReport, describe_discrepancy
from .export import LAYER_LABELS
from .model import InfoStatus
from .rounding import format_percent


def _pct(value) -> str:
    return f"{format_percent(value):>6}%"


def _device_name(dev) -> str:
    return f"device {dev.device_id}" + (f" ({dev.kind})" if dev.kind else "")


def render_report(report: AssessmentReport) -> str:
    lines = [
        f"IQA assessment report: {report.case_id}",
        f"devices: {len(report.devices)}   missing-factor policy: {report.policy.value}   "
        f"weighting: {report.weights_basis}",
        "",
        "Per-device IQA (best first)",
    ]
    ranked = report.ranking()
    width = max((len(_device_name(d)) for d in ranked), default=0)
    for pos, dev in enumerate(ranked, 1):
        extra = f"  [{dev.result.numerator_terms} term(s)"
        extra += f"; missing {', '.join(f.value for f in dev.missing)}]" if dev.missing else "]"
        lines.append(f"  {pos:>2}. {_device_name(dev):<{width}}  {_pct(dev.result.value)}{extra}")
    best, worst = report.best(), report.worst()
    if best is not None and worst is not None:
        lines.append(f"  best:  {_device_name(best)} ({format_percent(best.result.value)}%)")
        lines.append(f"  worst: {_device_name(worst)} ({format_percent(worst.result.value)}%)")
        for which, pick in (("best", best), ("worst", worst)):
            tied = [d.device_id for d in report.devices if d.result.value == pick.result.value]
            if len(tied) > 1:
                lines.append(f"  note: {which} is tied between devices {', '.join(sorted(tied))}; "
                             "resolved by device id")

    lines += ["", "Information-status breakdown"]
    for status in InfoStatus:
        result = report.categories.get(status)
        value = _pct(result.value) if result else "    n/a"
        lines.append(f"  {status.label:<8} {status.description:<42} {value}")
        if status in report.category_notes:
            lines.append(f"           ({report.category_notes[status]})")
    if report.total is not None:
        lines.append(f"  {'IQA_tot':<8} {'all factors':<42} {_pct(report.total.value)}")
    if report.decomposition is not None:
        dec = report.decomposition
        state = "holds" if dec.holds else "DOES NOT HOLD"
        lines.append(f"  recombined (3*I + 2*II + 4*III)/9 = {format_percent(dec.recombined)}% ({state})")

    if report.layers:
        lines += ["", "IoT-layer breakdown"]
        for layer, res in report.layers.items():
            lines.append(
                f"  {LAYER_LABELS[layer]:<6} {layer.value:<12} raw {format_percent(res.raw_value):>6} "
                f"over {res.h} device(s), normalized {_pct(res.normalized_value)}"
            )

    if report.gate is not None:
        g = report.gate
        lines += ["", f"Threshold gate at {format_percent(g.cutoff)}% (ties retained)"]
        lines.append(f"  justification: {g.justification}")
        lines.append(f"  retained:  {', '.join(g.retained) or '(none)'}")
        lines.append(f"  discarded: {', '.join(g.discarded) or '(none)'}")

    if report.missing_by_factor:
        lines += ["", "Missing factors"]
        n = len(report.devices)
        for factor, devs in report.missing_by_factor.items():
            scope = f"all {n} devices" if len(devs) == n else f"{len(devs)} of {n} devices ({', '.join(devs)})"
            lines.append(f"  {factor.value}: not assessed on {scope}")

    if report.discrepancies or report.notes:
        lines += ["", "Discrepancies against embedded expected values (tolerance 0.05 points)"]
        if not report.discrepancies:
            lines.append("  none")
        for d in report.discrepancies:
            lines.append(f"  - {describe_discrepancy(d)}")
        for note in report.notes:
            lines.append(f"  note: {note}")
    return "\n".join(lines) + "\n"
