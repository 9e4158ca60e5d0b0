"""Model-agnostic predictive utility of an attribute for the label.

All three measures read only the attribute-label joint.  Sums go through
``math.fsum`` so that reordering rows or label columns cannot change a
value, not even in the last bit.
"""
from __future__ import annotations

import enum
import math

from .dataset import JointDistribution

__all__ = ["Measure", "chi_square", "deviation", "g3", "mutual_information", "utility"]


class Measure(str, enum.Enum):
    MUTUAL_INFORMATION = "mutual-information"
    CHI_SQUARE = "chi-square"
    G3 = "g3"

    @classmethod
    def parse(cls, name: "str | Measure") -> "Measure":
        if isinstance(name, Measure):
            return name
        aliases = {"mi": cls.MUTUAL_INFORMATION, "chi2": cls.CHI_SQUARE}
        key = str(name).strip().lower()
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown utility measure {name!r}; use mi, chi2 or g3") from None

    @property
    def short(self) -> str:
        return {"mutual-information": "mi", "chi-square": "chi2", "g3": "g3"}[self.value]


def _margins(j: JointDistribution):
    cells = j.cells
    total = math.fsum(cells.ravel().tolist())
    if not total > 0:
        raise ValueError("utility is undefined for a table with zero total")
    rows = [math.fsum(r) for r in cells.tolist()]
    cols = [math.fsum(c) for c in cells.T.tolist()]
    return cells.tolist(), rows, cols, total


def mutual_information(j: JointDistribution) -> float:
    """Mutual information in bits; empty cells contribute nothing."""
    cells, rows, cols, n = _margins(j)
    terms = []
    for i, row in enumerate(cells):
        for k, c in enumerate(row):
            if c > 0:
                terms.append(c / n * math.log2(c * n / (rows[i] * cols[k])))
    return max(math.fsum(terms), 0.0)


def chi_square(j: JointDistribution) -> float:
    """Pearson statistic with expected counts from the table's own margins."""
    cells, rows, cols, n = _margins(j)
    terms = []
    for i, row in enumerate(cells):
        for k, c in enumerate(row):
            e = rows[i] * cols[k] / n
            if e > 0:
                terms.append((c - e) ** 2 / e)
    return math.fsum(terms)


def g3(j: JointDistribution) -> float:
    """Fraction of records to delete so that the attribute determines the label."""
    if not j.is_integral():
        raise ValueError("g3 counts records; round the table first")
    cells, _, _, n = _margins(j)
    kept = math.fsum(max(row) for row in cells)
    return (n - kept) / n


_DISPATCH = {
    Measure.MUTUAL_INFORMATION: mutual_information,
    Measure.CHI_SQUARE: chi_square,
    Measure.G3: g3,
}


def utility(measure: Measure | str, j: JointDistribution,
            integral: JointDistribution | None = None) -> float:
    """Evaluate ``measure`` on ``j``.

    g3 is only defined on record counts, so for a fractional ``j`` it is
    evaluated on ``integral`` (the rounded version of ``j``) instead.
    """
    measure = Measure.parse(measure)
    if measure is Measure.G3 and not j.is_integral():
        if integral is None:
            raise ValueError("g3 on a fractional table needs its rounded counterpart")
        j = integral
    return _DISPATCH[measure](j)


def deviation(measure: Measure | str, reconstructed: JointDistribution,
              masked: JointDistribution,
              reconstructed_integral: JointDistribution | None = None) -> float:
    """Absolute utility change between a reconstructed and a masked joint."""
    if reconstructed.col_domain.values != masked.col_domain.values:
        raise ValueError("tables do not share the label domain")
    return abs(utility(measure, reconstructed, reconstructed_integral)
               - utility(measure, masked))

