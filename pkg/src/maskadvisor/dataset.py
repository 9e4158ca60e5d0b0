"""Datasets, attribute domains and frequency distributions.

Every column is held as integer codes into an :class:`AttributeDomain`, so
marginals and joints reduce to ``np.bincount`` calls.  All containers are
read-only once built.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import IO, Iterable, Iterator, Mapping, Sequence

import numpy as np

__all__ = [
    "AttributeDomain",
    "Dataset",
    "DatasetError",
    "JointDistribution",
    "MarginalDistribution",
    "canonical_order",
    "format_number",
    "joint",
    "load_dataset",
    "marginal",
    "read_summaries",
    "write_summaries",
]


class DatasetError(ValueError):
    """Malformed input data or a lookup of an unknown attribute."""


def _as_number(value: str) -> float | None:
    try:
        x = float(value)
    except (TypeError, ValueError):
        return None
    return x if math.isfinite(x) else None


def canonical_order(values: Iterable[str]) -> list[str]:
    """Sort distinct values numerically if they all parse as numbers, else lexicographically."""
    distinct = set(values)
    numbers = {v: _as_number(v) for v in distinct}
    if distinct and all(x is not None for x in numbers.values()):
        return sorted(distinct, key=lambda v: (numbers[v], v))
    return sorted(distinct)


def format_number(x: float) -> str:
    """Render a number without a trailing ``.0`` for integral values."""
    if x == 0:
        return "0"
    if float(x).is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(float(x))


@dataclass(frozen=True)
class AttributeDomain:
    """Ordered, distinct values of one attribute (or of the label)."""

    name: str
    values: tuple[str, ...]
    _index: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        values = tuple(str(v) for v in self.values)
        if not values:
            raise DatasetError(f"domain of {self.name!r} is empty")
        index = {v: i for i, v in enumerate(values)}
        if len(index) != len(values):
            raise DatasetError(f"domain of {self.name!r} has repeated values")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_index", MappingProxyType(index))

    @classmethod
    def canonical(cls, name: str, values: Iterable[str]) -> "AttributeDomain":
        return cls(name, tuple(canonical_order(str(v) for v in values)))

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self) -> Iterator[str]:
        return iter(self.values)

    def __contains__(self, value) -> bool:
        return value in self._index

    def index(self, value: str) -> int:
        try:
            return self._index[value]
        except KeyError:
            raise DatasetError(f"{value!r} is not in the domain of {self.name!r}") from None

    @property
    def is_numeric(self) -> bool:
        return all(_as_number(v) is not None for v in self.values)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MarginalDistribution:
    """Frequency of each domain value of one attribute."""

    domain: AttributeDomain
    counts: Mapping[str, int]
    total: int

    def __post_init__(self):
        counts = {}
        for value, c in self.counts.items():
            if value not in self.domain:
                raise DatasetError(f"{value!r} is not in the domain of {self.domain.name!r}")
            if c < 0 or int(c) != c:
                raise DatasetError(f"count for {value!r} must be a non-negative integer, got {c}")
            counts[value] = int(c)
        # keys follow domain order so serialization is stable
        ordered = {v: counts.get(v, 0) for v in self.domain.values}
        if sum(ordered.values()) != self.total:
            raise DatasetError(
                f"counts of {self.domain.name!r} sum to {sum(ordered.values())}, not {self.total}"
            )
        object.__setattr__(self, "counts", MappingProxyType(ordered))
        object.__setattr__(self, "total", int(self.total))

    @classmethod
    def from_array(cls, domain: AttributeDomain, counts: Sequence[int]) -> "MarginalDistribution":
        counts = [c.item() if isinstance(c, np.generic) else c for c in counts]
        return cls(domain, dict(zip(domain.values, counts)), round(sum(counts)))

    def as_array(self) -> np.ndarray:
        return np.array([self.counts[v] for v in self.domain.values], dtype=float)

    def __eq__(self, other):
        if not isinstance(other, MarginalDistribution):
            return NotImplemented
        return (self.domain == other.domain and dict(self.counts) == dict(other.counts)
                and self.total == other.total)

    def to_dict(self) -> dict[str, int]:
        return dict(self.counts)


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Dense attribute-by-label contingency table.

    Cells are real-valued so that fitted (fractional) tables and observed
    (integral) tables share one type.
    """

    row_domain: AttributeDomain
    col_domain: AttributeDomain
    cells: np.ndarray
    total: float = None  # type: ignore[assignment]

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=float)
        shape = (len(self.row_domain), len(self.col_domain))
        if cells.shape != shape:
            raise DatasetError(f"cells have shape {cells.shape}, domains imply {shape}")
        if not np.all(np.isfinite(cells)) or np.any(cells < 0):
            raise DatasetError("cells must be finite and non-negative")
        s = float(cells.sum())
        total = s if self.total is None else float(self.total)
        if abs(s - total) > 1e-6 * max(abs(total), 1.0):
            raise DatasetError(f"cells sum to {s}, declared total is {total}")
        object.__setattr__(self, "cells", _readonly(cells))
        object.__setattr__(self, "total", total)

    @property
    def shape(self) -> tuple[int, int]:
        return self.cells.shape

    def row_sums(self) -> np.ndarray:
        return self.cells.sum(axis=1)

    def col_sums(self) -> np.ndarray:
        return self.cells.sum(axis=0)

    def is_integral(self, atol: float = 1e-9) -> bool:
        return bool(np.all(np.abs(self.cells - np.round(self.cells)) <= atol))

    def row_marginal(self) -> MarginalDistribution:
        """Row sums as a marginal; only defined for integral tables."""
        return MarginalDistribution.from_array(self.row_domain, np.round(self.row_sums()))

    def col_marginal(self) -> MarginalDistribution:
        return MarginalDistribution.from_array(self.col_domain, np.round(self.col_sums()))

    def __eq__(self, other):
        if not isinstance(other, JointDistribution):
            return NotImplemented
        return (self.row_domain == other.row_domain and self.col_domain == other.col_domain
                and np.array_equal(self.cells, other.cells))

    def to_json(self, **metadata) -> dict:
        out = {
            "row_domain": {"name": self.row_domain.name, "values": list(self.row_domain.values)},
            "col_domain": {"name": self.col_domain.name, "values": list(self.col_domain.values)},
            "total": _json_number(self.total),
            "cells": [[_json_number(c) for c in row] for row in self.cells.tolist()],
        }
        if metadata:
            out["metadata"] = metadata
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> "JointDistribution":
        try:
            rows = AttributeDomain(obj["row_domain"]["name"], tuple(obj["row_domain"]["values"]))
            cols = AttributeDomain(obj["col_domain"]["name"], tuple(obj["col_domain"]["values"]))
            return cls(rows, cols, np.array(obj["cells"], dtype=float).reshape(len(rows), len(cols)),
                       obj.get("total"))
        except (KeyError, TypeError) as exc:
            raise DatasetError(f"malformed joint distribution: {exc}") from exc


def _json_number(x: float):
    return int(x) if float(x).is_integer() and abs(x) < 2**53 else float(x)


class Dataset:
    """Rows of discrete feature values plus a label, stored column-wise as codes.

    Parameters
    ----------
    attribute_names : sequence of str
        Feature columns, in file order.
    label_name : str
        Name of the class label column.
    domains : mapping
        ``AttributeDomain`` for every attribute and for the label.
    codes : mapping
        Integer code array (indices into the domain) for every column; all
        arrays have the same length ``N >= 1``.
    """

    def __init__(self, attribute_names: Sequence[str], label_name: str,
                 domains: Mapping[str, AttributeDomain], codes: Mapping[str, np.ndarray]):
        names = tuple(attribute_names)
        if label_name in names:
            raise DatasetError(f"label {label_name!r} is also listed as an attribute")
        if len(set(names)) != len(names):
            raise DatasetError("attribute names must be distinct")
        columns = names + (label_name,)
        lengths = set()
        frozen_codes = {}
        for name in columns:
            if name not in domains or name not in codes:
                raise DatasetError(f"column {name!r} lacks a domain or codes")
            c = np.asarray(codes[name])
            if c.ndim != 1 or not np.issubdtype(c.dtype, np.integer):
                raise DatasetError(f"codes of {name!r} must be a 1-D integer array")
            if c.size and (c.min() < 0 or c.max() >= len(domains[name])):
                raise DatasetError(f"codes of {name!r} fall outside its domain")
            lengths.add(c.size)
            c = c.view()
            c.setflags(write=False)
            frozen_codes[name] = c
        if len(lengths) != 1:
            raise DatasetError("columns have different lengths")
        if lengths.pop() < 1:
            raise DatasetError("empty dataset")
        self.attribute_names = names
        self.label_name = label_name
        self.domains = MappingProxyType({n: domains[n] for n in columns})
        self.codes = MappingProxyType(frozen_codes)

    @classmethod
    def from_records(cls, records: Iterable[Sequence[str]], attribute_names: Sequence[str],
                     label_name: str) -> "Dataset":
        """Build from ``(feature values..., label)`` tuples, one per record."""
        columns = list(attribute_names) + [label_name]
        raw: list[list[str]] = [[] for _ in columns]
        for k, rec in enumerate(records):
            if len(rec) != len(columns):
                raise DatasetError(f"record {k} has {len(rec)} values, expected {len(columns)}")
            for j, v in enumerate(rec):
                raw[j].append(str(v))
        domains, codes = {}, {}
        for name, values in zip(columns, raw):
            domains[name], codes[name] = _encode(name, values)
        return cls(attribute_names, label_name, domains, codes)

    @property
    def n_rows(self) -> int:
        return int(self.codes[self.label_name].size)

    N = n_rows

    @property
    def m(self) -> int:
        return len(self.attribute_names)

    @property
    def columns(self) -> tuple[str, ...]:
        return self.attribute_names + (self.label_name,)

    def column(self, name: str) -> list[str]:
        domain = self._domain(name)
        return [domain.values[c] for c in self.codes[name].tolist()]

    def rows(self) -> Iterator[tuple[tuple[str, ...], str]]:
        """Yield ``(feature_values, label_value)`` per record."""
        cols = [self.column(n) for n in self.attribute_names]
        labels = self.column(self.label_name)
        for i, y in enumerate(labels):
            yield tuple(c[i] for c in cols), y

    def _domain(self, name: str) -> AttributeDomain:
        try:
            return self.domains[name]
        except KeyError:
            raise DatasetError(f"unknown attribute {name!r}") from None

    def __repr__(self):
        return (f"Dataset(N={self.n_rows}, attributes={list(self.attribute_names)}, "
                f"label={self.label_name!r})")


def _encode(name: str, values: Sequence[str]) -> tuple[AttributeDomain, np.ndarray]:
    first_seen: dict[str, int] = {}
    raw = np.fromiter((first_seen.setdefault(v, len(first_seen)) for v in values),
                      dtype=np.int64, count=len(values))
    domain = AttributeDomain.canonical(name, first_seen)
    remap = np.empty(len(first_seen), dtype=np.int32)
    for v, i in first_seen.items():
        remap[i] = domain.index(v)
    return domain, remap[raw]


def _equal_width_labels(values: Sequence[str], bins: int, column: str) -> list[str]:
    try:
        x = np.array([float(v) for v in values])
    except ValueError:
        raise DatasetError(f"column {column!r} is not numeric and cannot be binned") from None
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        return [f"[{format_number(lo)},{format_number(hi)}]"] * len(values)
    edges = np.linspace(lo, hi, bins + 1)
    idx = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, bins - 1)
    labels = [
        f"[{format_number(edges[i])},{format_number(edges[i + 1])}" + ("]" if i == bins - 1 else ")")
        for i in range(bins)
    ]
    return [labels[i] for i in idx]


def load_dataset(source: str | IO[str], label_name: str,
                 bins: Mapping[str, int] | None = None) -> Dataset:
    """Read a comma-separated file with a header row.

    Parameters
    ----------
    source : path or text stream
    label_name : str
        Header name of the class label.
    bins : mapping, optional
        Column name to bin count; those numeric columns are discretized into
        equal-width intervals before encoding.  No binning happens otherwise.

    Raises
    ------
    DatasetError
        On an empty file, a missing label column or a ragged row.
    """
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, newline="", encoding="utf-8") as fh:
            return load_dataset(fh, label_name, bins)
    reader = csv.reader(source)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DatasetError("empty file") from None
    if label_name not in header:
        raise DatasetError(f"label column {label_name!r} not found in header {header}")
    width = len(header)
    raw: list[list[str]] = [[] for _ in header]
    for row in reader:
        if not row:
            continue
        if len(row) != width:
            raise DatasetError(f"ragged row at line {reader.line_num}: "
                               f"{len(row)} fields, header has {width}")
        for j, v in enumerate(row):
            raw[j].append(v.strip())
    if not raw[0]:
        raise DatasetError("empty dataset")
    by_name = dict(zip(header, raw))
    for name, b in (bins or {}).items():
        if name not in by_name:
            raise DatasetError(f"cannot bin unknown column {name!r}")
        by_name[name] = _equal_width_labels(by_name[name], int(b), name)
    attributes = [h for h in header if h != label_name]
    domains, codes = {}, {}
    for name in header:
        domains[name], codes[name] = _encode(name, by_name[name])
    return Dataset(attributes, label_name, domains, codes)


def marginal(d: Dataset, attribute: str) -> MarginalDistribution:
    """Frequency of each observed value of ``attribute`` (a feature or the label)."""
    domain = d._domain(attribute)
    counts = np.bincount(d.codes[attribute], minlength=len(domain))
    return MarginalDistribution.from_array(domain, counts)


def joint(d: Dataset, attribute: str) -> JointDistribution:
    """Observed attribute-by-label contingency table."""
    if attribute not in d.attribute_names:
        raise DatasetError(f"unknown attribute {attribute!r}")
    rows, cols = d.domains[attribute], d.domains[d.label_name]
    flat = d.codes[attribute].astype(np.int64) * len(cols) + d.codes[d.label_name]
    cells = np.bincount(flat, minlength=len(rows) * len(cols)).reshape(len(rows), len(cols))
    return JointDistribution(rows, cols, cells.astype(float), float(d.n_rows))


def write_summaries(d: Dataset, out: IO[str] | None = None) -> str:
    """Serialize every attribute's marginal (label included) as JSON text."""
    doc = {
        "total": d.n_rows,
        "label": d.label_name,
        "marginals": {name: marginal(d, name).to_dict() for name in d.columns},
    }
    text = json.dumps(doc, indent=2) + "\n"
    if out is not None:
        out.write(text)
    return text


def read_summaries(source: str | IO[str]) -> dict[str, MarginalDistribution]:
    """Parse a summary file into marginals keyed by attribute name."""
    if isinstance(source, str) and not source.lstrip().startswith("{"):
        with open(source, encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = json.load(io.StringIO(source) if isinstance(source, str) else source)
    try:
        total = int(doc["total"])
        out = {}
        for name, counts in doc["marginals"].items():
            domain = AttributeDomain.canonical(name, counts)
            out[name] = MarginalDistribution(domain, counts, total)
        return out
    except (KeyError, TypeError) as exc:
        raise DatasetError(f"malformed summary file: {exc}") from exc
