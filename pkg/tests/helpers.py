"""Random case builders and engine-independent oracles for the test suite.

The oracles work from raw hundredths (plain ints) and never call into
``iotiqa.scoring``.
"""

from __future__ import annotations

import random
from fractions import Fraction

from iotiqa.model import (
    CaseFile,
    DeviceAssessment,
    FactorId,
    FactorScore,
    Layer,
    LayeredFactorScore,
    MissingPolicy,
)

FACTORS = list(FactorId)
LAYERS = list(Layer)

# Published per-factor values for the six case-study devices, as raw hundredths.
FACTOR_VALUES = {
    "1": {"DTC": 56, "DST": 62, "CM": 34, "SR": 48, "PC": 77, "TDA": 55, "OT": 84, "OS": 26},
    "2": {"DTC": 93, "DST": 12, "CM": 17, "SR": 76, "PC": 82, "TDA": 60, "OT": 7, "OS": 88},
    "3": {"DTC": 97, "DST": 48, "CM": 76, "SR": 50, "PC": 77, "TDA": 21, "OT": 89, "OS": 45},
    "4": {"DTC": 91, "DST": 16, "CM": 60, "SR": 98, "PC": 19, "TDA": 44, "OT": 80, "OS": 64},
    "5": {"DTC": 39, "DST": 30, "CM": 58, "SR": 56, "PC": 0, "TDA": 26, "OT": 7, "OS": 79},
    "6": {"DTC": 89, "DST": 82, "CM": 85, "SR": 18, "PC": 98, "TDA": 65, "OT": 89, "OS": 31},
}
PUBLISHED_DEVICE_IQA = {"1": "54.37", "2": "59.49", "3": "63.73", "4": "89.79", "5": "38.19", "6": "66.68"}


def score(factor, hundredths: int) -> FactorScore:
    return FactorScore(FactorId(factor), Fraction(hundredths, 100), "test value", "unit test")


def layered(factor, layer, hundredths: int) -> LayeredFactorScore:
    return LayeredFactorScore(FactorId(factor), Layer(layer), Fraction(hundredths, 100), "test value", "unit test")


def device_from_raw(device_id: str, raw: dict, kind: str = "synthetic", layers: dict | None = None) -> DeviceAssessment:
    scores = [score(f, v) for f, v in raw.items()]
    lay = [layered(f, l, v) for (f, l), v in (layers or {}).items()]
    return DeviceAssessment(device_id, kind, scores, lay)


def case_from_raw(rows: dict[str, dict], policy=MissingPolicy.AVAILABLE_ONLY, **kw) -> CaseFile:
    return CaseFile("synthetic", tuple(device_from_raw(d, r) for d, r in rows.items()), missing_policy=policy, **kw)


def random_rows(rng: random.Random, n_devices: int, *, complete: bool = True) -> dict[str, dict[str, int]]:
    rows = {}
    for i in range(n_devices):
        if complete:
            factors = FACTORS
        else:
            factors = [f for f in FACTORS if rng.random() < 0.7] or [rng.choice(FACTORS)]
        rows[f"d{i:02d}"] = {f.value: rng.randint(0, 100) for f in factors}
    return rows


def random_case(rng: random.Random, lo: int = 1, hi: int = 20, *, complete: bool = True, **kw) -> tuple[CaseFile, dict]:
    rows = random_rows(rng, rng.randint(lo, hi), complete=complete)
    return case_from_raw(rows, **kw), rows


# -- oracles ----------------------------------------------------------------------


def flat_mean_percent(rows: dict[str, dict[str, int]], factors=None) -> Fraction:
    """Sum of every selected value over (count of selected values), as a percentage."""
    names = [f.value if isinstance(f, FactorId) else f for f in (factors or FACTORS)]
    total = 0
    count = 0
    for row in rows.values():
        for name in names:
            if name in row:
                total += row[name]
                count += 1
    return Fraction(total, count)


def mean_of_device_means(rows: dict[str, dict[str, int]]) -> Fraction:
    means = [Fraction(sum(r.values()), len(r)) for r in rows.values()]
    return sum(means, Fraction(0)) / len(means)


def layer_sum_oracle(cells: dict[str, dict[tuple[str, str], int]], layer: str) -> Fraction:
    """Direct double summation: sum over devices of (sum_j f_j) / m_i for one layer."""
    raw = Fraction(0)
    for dev_cells in cells.values():
        values = [v for (f, l), v in dev_cells.items() if l == layer]
        if not values:
            continue
        s = 0
        for v in values:
            s += v
        raw += Fraction(s, 100 * len(values))
    return raw
