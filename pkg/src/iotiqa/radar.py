"""Deterministic SVG radar charts.

Geometry: a 600x600 canvas, centre (300, 300), value 1.0 at radius 200 px.
Axis k of N points at angle 2*pi*k/N clockwise from 12 o'clock. Coordinates
are printed with three decimals; output contains no timestamps, ids or
randomness, so equal specs give identical bytes.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from xml.sax.saxutils import escape, quoteattr

from .errors import DegenerateSpec
from .model import CaseFile, FactorId, InfoStatus

CANVAS = 600
CENTER = (300.0, 300.0)
RADIUS = 200.0
GRID_LEVELS = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1))

# colour-blind-safe palette, cycled
PALETTE = ("#0072B2", "#D55E00", "#009E73", "#CC79A7", "#E69F00", "#56B4E9", "#F0E442", "#000000")

Value = Fraction | Decimal | float | int


@dataclass(frozen=True)
class RadarSeries:
    label: str
    values: tuple[Fraction, ...]
    missing: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(_fraction(v) for v in self.values))
        object.__setattr__(self, "missing", frozenset(self.missing))


@dataclass(frozen=True)
class RadarSpec:
    axes: tuple[str, ...]
    series: tuple[RadarSeries, ...]
    title: str = ""
    footnotes: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "axes", tuple(self.axes))
        object.__setattr__(self, "series", tuple(self.series))
        object.__setattr__(self, "footnotes", tuple(self.footnotes))
        validate_spec(self)


def _fraction(value: Value) -> Fraction:
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def validate_spec(spec: RadarSpec) -> None:
    if len(spec.axes) < 3:
        raise DegenerateSpec(f"a radar chart needs at least 3 axes, got {len(spec.axes)}")
    for series in spec.series:
        if len(series.values) != len(spec.axes):
            raise DegenerateSpec(
                f"series {series.label!r} has {len(series.values)} values for {len(spec.axes)} axes"
            )
        for v in series.values:
            if not 0 <= v <= 1:
                raise DegenerateSpec(f"series {series.label!r} value {v} outside [0, 1]")
        for i in series.missing:
            if not 0 <= i < len(spec.axes):
                raise DegenerateSpec(f"series {series.label!r} marks unknown axis {i} as missing")


def axis_angle(k: int, n: int) -> float:
    return 2 * math.pi * k / n


def vertex(value: Value, k: int, n: int) -> tuple[float, float]:
    """Canvas position of ``value`` on axis ``k`` of ``n``."""
    r = float(_fraction(value)) * RADIUS
    theta = axis_angle(k, n)
    return CENTER[0] + r * math.sin(theta), CENTER[1] - r * math.cos(theta)


def _num(x: float) -> str:
    text = f"{x:.3f}"
    return "0.000" if text == "-0.000" else text


def _points(values: Sequence[Value]) -> str:
    n = len(values)
    return " ".join(f"{_num(x)},{_num(y)}" for x, y in (vertex(v, k, n) for k, v in enumerate(values)))


def polygon_area(points: Sequence[tuple[float, float]]) -> float:
    """Shoelace area of a simple polygon."""
    total = 0.0
    for (x1, y1), (x2, y2) in zip(points, list(points[1:]) + list(points[:1])):
        total += x1 * y2 - x2 * y1
    return abs(total) / 2


def render_radar(spec: RadarSpec) -> str:
    validate_spec(spec)
    n = len(spec.axes)
    out: list[str] = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{CANVAS}" height="{CANVAS}" '
        f'viewBox="0 0 {CANVAS} {CANVAS}" font-family="sans-serif" font-size="12">',
        f"<title>{escape(spec.title)}</title>",
        f'<rect x="0" y="0" width="{CANVAS}" height="{CANVAS}" fill="#ffffff"/>',
        '<g class="grid" fill="none" stroke="#bbbbbb" stroke-width="1">',
    ]
    for level in GRID_LEVELS:
        out.append(f'<polygon class="gridline" data-level="{float(level):.2f}" points="{_points([level] * n)}"/>')
    for k in range(n):
        x, y = vertex(1, k, n)
        out.append(f'<line class="spoke" x1="{_num(CENTER[0])}" y1="{_num(CENTER[1])}" x2="{_num(x)}" y2="{_num(y)}"/>')
    out.append("</g>")

    out.append('<g class="axis-labels" fill="#333333">')
    for k, label in enumerate(spec.axes):
        x, y = vertex(Fraction(11, 10), k, n)
        theta = axis_angle(k, n)
        s = math.sin(theta)
        anchor = "middle" if abs(s) < 1e-9 else ("start" if s > 0 else "end")
        out.append(
            f'<text class="axis-label" x="{_num(x)}" y="{_num(y + 4)}" text-anchor="{anchor}">{escape(label)}</text>'
        )
    out.append("</g>")

    out.append('<g class="series">')
    for idx, series in enumerate(spec.series):
        colour = PALETTE[idx % len(PALETTE)]
        out.append(
            f'<polygon class="series" data-series={quoteattr(series.label)} points="{_points(series.values)}" '
            f'fill="{colour}" fill-opacity="0.12" stroke="{colour}" stroke-width="2"/>'
        )
        for k in sorted(series.missing):
            x, y = vertex(series.values[k], k, n)
            out.append(
                f'<circle class="missing" data-series={quoteattr(series.label)} data-axis={quoteattr(spec.axes[k])} '
                f'cx="{_num(x)}" cy="{_num(y)}" r="4" fill="#ffffff" stroke="{colour}" stroke-width="1.5"/>'
            )
    out.append("</g>")

    out.append('<g class="legend">')
    for idx, series in enumerate(spec.series):
        colour = PALETTE[idx % len(PALETTE)]
        y = 20 + 16 * idx
        out.append(f'<rect x="10" y="{y - 9}" width="10" height="10" fill="{colour}"/>')
        out.append(f'<text x="26" y="{y}">{escape(series.label)}</text>')
    out.append("</g>")

    if spec.title:
        out.append(f'<text class="chart-title" x="{CANVAS - 10}" y="20" text-anchor="end" font-size="14">'
                   f"{escape(spec.title)}</text>")
    for i, note in enumerate(spec.footnotes):
        y = CANVAS - 10 - 14 * (len(spec.footnotes) - 1 - i)
        out.append(f'<text class="footnote" x="10" y="{y}" font-size="10">{escape(note)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# -- spec builders ------------------------------------------------------------------


def _axes_for(case: CaseFile, union: bool) -> tuple[FactorId, ...]:
    if union:
        return tuple(f for f in FactorId if any(f in d.scores for d in case.devices))
    return tuple(f for f in FactorId if case.devices and all(f in d.scores for d in case.devices))


def case_overlay(
    case: CaseFile,
    device_ids: Iterable[str] | None = None,
    *,
    union: bool = False,
    title: str | None = None,
) -> RadarSpec:
    """One series per device over factor axes.

    Axes are the factors every device in the case has (``union=False``) or
    any device has (``union=True``); in the latter case gaps plot at 0 with a
    marker and a footnote. The axis set always comes from the whole case so
    per-device charts line up with the overlay.
    """
    axes = _axes_for(case, union)
    devices = case.devices if device_ids is None else tuple(case.device(d) for d in device_ids)
    series = []
    footnotes = []
    for dev in devices:
        values = []
        missing = set()
        for k, f in enumerate(axes):
            if f in dev.scores:
                values.append(dev.scores[f].fraction)
            else:
                values.append(Fraction(0))
                missing.add(k)
        label = f"device {dev.device_id}" + (f" ({dev.kind})" if dev.kind else "")
        series.append(RadarSeries(label, tuple(values), frozenset(missing)))
        if missing:
            footnotes.append(f"{label}: not assessed {', '.join(axes[k].value for k in sorted(missing))} (drawn at 0)")
    omitted = [f.value for f in FactorId if f not in axes]
    if omitted:
        footnotes.append(f"axes omitted (not assessed for every device): {', '.join(omitted)}")
    return RadarSpec(
        tuple(f.value for f in axes),
        tuple(series),
        title if title is not None else f"{case.case_id}: factor values",
        tuple(footnotes),
    )


def category_spec(label: str, values: dict[InfoStatus, Fraction], title: str = "") -> RadarSpec:
    """Three-axis chart of the status coefficients (percentages scaled to [0, 1])."""
    axes = tuple(s.label for s in InfoStatus)
    series = RadarSeries(label, tuple(Fraction(values[s]) / 100 for s in InfoStatus))
    return RadarSpec(axes, (series,), title or f"{label}: information-status coefficients")


def model_spec(axes: Sequence[str] | None = None) -> RadarSpec:
    """Reference chart with every axis at the maximum."""
    axes = tuple(axes) if axes is not None else tuple(f.value for f in FactorId)
    return RadarSpec(axes, (RadarSeries("best achievable", tuple(Fraction(1) for _ in axes)),), "best achievable result")
