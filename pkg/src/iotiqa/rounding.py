"""Half-up rounding of exact rationals for display."""

from __future__ import annotations

from decimal import Decimal
from fractions import Fraction


def round_half_up(value: Fraction | Decimal | int, places: int = 2) -> Decimal:
    """Round ``value`` to ``places`` decimals, ties away from zero.

    Works on the exact rational, so 0.625 becomes 0.63 and -0.625 becomes -0.63.
    """
    x = Fraction(value)
    scale = 10**places
    magnitude = abs(x) * scale
    q = (magnitude + Fraction(1, 2)).__floor__()
    sign = -1 if x < 0 else 1
    return Decimal(sign * q).scaleb(-places).quantize(Decimal(1).scaleb(-places))


def format_percent(value: Fraction | Decimal | int, places: int = 2) -> str:
    return f"{round_half_up(value, places):.{places}f}"


def format_signed(value: Fraction | Decimal | int, places: int = 2) -> str:
    rounded = round_half_up(value, places)
    if rounded == 0:
        rounded = abs(rounded)
    return f"{rounded:+.{places}f}"


def exact(value: Fraction) -> str:
    """Lossless text form of a rational: ``"59"`` or ``"1769/30"``."""
    return str(Fraction(value))
