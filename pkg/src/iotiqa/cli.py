"""Command-line interface.

Subcommands: validate, assess, gate, chart, checklist.

Exit codes: 0 success, 2 domain or validation failure, 3 I/O failure.
The audit log defaults, in order, to --audit-log, $IOTIQA_AUDIT_LOG, the
case file's own ``audit_log`` reference (relative to the case file), and
finally ``<case>.audit.jsonl`` next to the case file.
"""

from __future__ import annotations

import argparse
import getpass
import hashlib
import json
import os
import sys
from collections.abc import Sequence
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

from .assessment import assess
from .audit import AUDIT_LOG_ENV, AuditAction, AuditLog
from .casefile import atomic_write, load_case, parse_case, save_case
from .checklist import Answer, Level, checklist_for, parse_answers, score_answers
from .errors import CaseDocumentError, IqaError
from .export import export_table
from .model import CaseFile, FactorId, InfoStatus, MissingPolicy, ThresholdPolicy, Weights
from .radar import case_overlay, category_spec, model_spec, render_radar
from .report import render_report
from .rounding import format_percent
from .scoring import gate_values

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_IO = 3


class UsageError(Exception):
    """Bad flag combination detected after argparse; exit 2."""


def _actor(args: argparse.Namespace) -> str:
    if getattr(args, "actor", None):
        return args.actor
    try:
        return getpass.getuser()
    except Exception:
        return "unknown"


def _audit_path(args: argparse.Namespace, case: CaseFile | None) -> Path:
    if getattr(args, "audit_log", None):
        return Path(args.audit_log)
    env = os.environ.get(AUDIT_LOG_ENV)
    if env:
        return Path(env)
    case_path = Path(args.case)
    if case is not None and case.audit_log:
        ref = Path(case.audit_log)
        return ref if ref.is_absolute() else case_path.parent / ref
    return case_path.with_name(case_path.stem + ".audit.jsonl")


def _weights(path: str | None) -> Weights | None:
    if not path:
        return None
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict):
        raise UsageError("weights file must be a JSON object mapping factor to weight")
    return Weights({FactorId(k): Fraction(str(v)) for k, v in doc.items()})


def _policy(text: str | None) -> MissingPolicy | None:
    return MissingPolicy.parse(text) if text else None


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


# -- subcommands ------------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    data = Path(args.case).read_bytes()
    try:
        case = parse_case(data)
    except CaseDocumentError as exc:
        for finding in exc.findings:
            print(f"{args.case}: {finding}")
        print(f"{len(exc.findings)} findings")
        return EXIT_DOMAIN
    print(f"{args.case}: case {case.case_id}, {len(case.devices)} device(s), schema v{case.schema_version}")
    print("0 findings")
    return EXIT_OK


def cmd_assess(args: argparse.Namespace) -> int:
    case = load_case(args.case)
    threshold = None
    if args.cutoff is not None:
        if not (args.justify or "").strip():
            raise UsageError("--cutoff needs --justify: a threshold must be explained")
        threshold = ThresholdPolicy(Fraction(args.cutoff), args.justify)
    log = AuditLog(_audit_path(args, case))
    report = assess(
        case,
        policy=_policy(args.policy),
        weights=_weights(args.weights),
        threshold=threshold,
        audit=log,
        actor=_actor(args),
    )
    text = render_report(report)
    table = export_table(report)
    outputs = []
    if args.out:
        out = Path(args.out)
        for name, payload in ((f"{case.case_id}.report.txt", text), (f"{case.case_id}.iqa.csv", table)):
            path = atomic_write(out / name, payload)
            outputs.append({"path": str(path), "sha256": _sha256(payload.encode("utf-8"))})
    sys.stdout.write(table if args.format == "csv" else text)
    if args.out:
        for item in outputs:
            print(f"wrote {item['path']}", file=sys.stderr)
    log.record(
        AuditAction.REPORT_EMITTED,
        actor=_actor(args),
        detail={
            "case_id": case.case_id,
            "policy": report.policy.value,
            "weights": report.weights_basis,
            "iqa_tot": format_percent(report.total.value) if report.total else None,
            "report_sha256": _sha256(text.encode("utf-8")),
            "csv_sha256": _sha256(table.encode("utf-8")),
            "outputs": outputs,
            "discrepancies": len(report.discrepancies),
        },
    )
    return EXIT_OK


def cmd_gate(args: argparse.Namespace) -> int:
    if not (args.justify or "").strip():
        print("error: gate requires --justify; discarding evidence must be explained", file=sys.stderr)
        return EXIT_DOMAIN
    case = load_case(args.case)
    threshold = ThresholdPolicy(Fraction(args.cutoff), args.justify)
    if args.source == "expected":
        if case.expected is None or not case.expected.devices:
            raise UsageError(f"case {case.case_id} embeds no expected per-device values")
        values = {dev: Fraction(v) for dev, v in case.expected.devices.items()}
    else:
        report = assess(case, policy=_policy(args.policy), weights=_weights(args.weights))
        values = report.per_device_value
    log = AuditLog(_audit_path(args, case))
    outcome = gate_values(
        values, threshold, audit=log, actor=_actor(args), case_id=case.case_id, source=args.source
    )
    print(f"gate at {format_percent(outcome.cutoff)}% on {args.source} values (ties retained)")
    print(f"justification: {outcome.justification}")
    for dev, value in outcome.per_device_value.items():
        decision = "retained" if dev in outcome.retained else "discarded"
        print(f"  device {dev}: {format_percent(value)}% {decision}")
    print(f"retained: {', '.join(outcome.retained) or '(none)'}")
    print(f"discarded: {', '.join(outcome.discarded) or '(none)'}")
    return EXIT_OK


def cmd_chart(args: argparse.Namespace) -> int:
    case = load_case(args.case)
    view = args.view
    if view == "devices":
        spec = case_overlay(case, union=args.union)
    elif view == "model":
        spec = model_spec()
    elif view == "categories":
        report = assess(case, policy=_policy(args.policy), weights=_weights(args.weights))
        missing = [s.label for s in InfoStatus if report.categories.get(s) is None]
        if missing:
            raise UsageError(f"cannot chart categories; not computable: {', '.join(missing)}")
        spec = category_spec(case.case_id, {s: report.categories[s].value for s in InfoStatus})  # type: ignore[union-attr]
    elif view.startswith("device:"):
        device_id = view.split(":", 1)[1]
        if device_id not in case.device_ids:
            raise UsageError(f"unknown device id {device_id!r} (case has {', '.join(case.device_ids)})")
        spec = case_overlay(case, [device_id], union=args.union, title=f"{case.case_id}: device {device_id}")
    else:
        raise UsageError(f"unknown view {view!r}; use devices, categories, model or device:<id>")
    svg = render_radar(spec)
    if args.out:
        atomic_write(args.out, svg)
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(svg)
    return EXIT_OK


def _prompt_answers(factor: FactorId) -> list[Answer]:
    template = checklist_for(factor)
    levels = "/".join(l.value for l in Level)
    answers = []
    print(f"Checklist for {factor.value} ({len(template.questions)} question(s))")
    for i, question in enumerate(template.questions):
        print(f"Q{i + 1}. {question}")
        raw = input(f"  answer [{levels} or a value 0.00-1.00]: ").strip()
        note = input("  note (why): ").strip()
        answers.append(Answer.of(i, raw, note))
    return answers


def cmd_checklist(args: argparse.Namespace) -> int:
    case = load_case(args.case)
    if args.device not in case.device_ids:
        raise UsageError(f"unknown device id {args.device!r} (case has {', '.join(case.device_ids)})")
    try:
        factor = FactorId(args.factor.upper())
    except ValueError as exc:
        raise UsageError(f"unknown factor {args.factor!r}") from exc
    if args.answers:
        answers = parse_answers(json.loads(Path(args.answers).read_text(encoding="utf-8")))
    else:
        answers = _prompt_answers(factor)
    actor = _actor(args)
    score = score_answers(factor, answers, provenance=args.provenance or f"checklist rubric, assessed by {actor}")
    device = case.device(args.device)
    old = device.scores.get(factor)
    audit_path = _audit_path(args, case)
    updated = case.replace_device(device.with_score(score))
    if updated.audit_log is None:
        try:
            ref = os.path.relpath(audit_path, Path(args.case).parent)
        except ValueError:
            ref = str(audit_path)
        updated = replace(updated, audit_log=ref)
    log = AuditLog(audit_path)
    detail = {
        "case_id": case.case_id,
        "device_id": args.device,
        "factor": factor.value,
        "new": f"{score.value:.2f}",
        "answers": [
            {"question": a.question + 1, "answer": a.level.value if a.level else f"{a.override:.2f}"}
            for a in sorted(answers, key=lambda a: a.question)
        ],
    }
    if old is None:
        action = AuditAction.SCORE_SET
    else:
        action = AuditAction.SCORE_CHANGED
        detail["old"] = f"{old.value:.2f}"
        detail["old_justification"] = old.justification
    save_case(args.case, updated)
    log.record(action, actor=actor, detail=detail, justification=score.justification)
    prev = f" (was {old.value:.2f})" if old is not None else ""
    print(f"device {args.device} {factor.value} = {score.value:.2f}{prev}")
    return EXIT_OK


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iotiqa", description="Information-quality assessment of IoT evidence.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *, audit: bool = True) -> None:
        p.add_argument("case", help="case file (.json)")
        if audit:
            p.add_argument("--audit-log", help=f"audit log path (default: ${AUDIT_LOG_ENV} or next to the case)")
            p.add_argument("--actor", help="who is running the assessment (default: login name)")

    def scoring(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--policy",
            choices=["strict", "available-only", "impute-zero", "available_only", "impute_zero"],
            help="missing-factor policy (default: the case's own)",
        )
        p.add_argument("--weights", help="JSON file mapping factor to weight; absent means uniform")

    p = sub.add_parser("validate", help="parse and validate a case file")
    common(p, audit=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("assess", help="compute all IQA coefficients and write report + CSV")
    common(p)
    scoring(p)
    p.add_argument("--out", help="directory for <case>.report.txt and <case>.iqa.csv")
    p.add_argument("--format", choices=["text", "csv"], default="text", help="what to print on stdout")
    p.add_argument("--cutoff", type=str, help="also apply a threshold gate at this percentage")
    p.add_argument("--justify", help="justification for --cutoff")
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("gate", help="apply an IN/OUT threshold to per-device IQA")
    common(p)
    scoring(p)
    p.add_argument("--cutoff", required=True, type=str, help="percentage in [0, 100]; ties are retained")
    p.add_argument("--justify", help="why this cutoff (required)")
    p.add_argument(
        "--source",
        choices=["recomputed", "expected"],
        default="recomputed",
        help="gate recomputed values, or the case's embedded expected values",
    )
    p.set_defaults(func=cmd_gate)

    p = sub.add_parser("chart", help="render a radar chart as SVG")
    common(p, audit=False)
    scoring(p)
    p.add_argument("--view", default="devices", help="devices | categories | model | device:<id>")
    p.add_argument("--union", action="store_true", help="use every factor any device has, gaps drawn at 0")
    p.add_argument("--out", help="SVG output path (default: stdout)")
    p.set_defaults(func=cmd_chart)

    p = sub.add_parser("checklist", help="score one factor of one device from its checklist")
    common(p)
    p.add_argument("--device", required=True)
    p.add_argument("--factor", required=True, help=", ".join(f.value for f in FactorId))
    p.add_argument("--answers", help="answers JSON file (default: prompt on the terminal)")
    p.add_argument("--provenance", help="provenance text stored with the score")
    p.set_defaults(func=cmd_checklist)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CaseDocumentError as exc:
        for finding in exc.findings:
            print(f"{args.case}: {finding}", file=sys.stderr)
        print(f"{len(exc.findings)} findings", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (IqaError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    raise SystemExit(main())
