"""Masking functions, configurations and masked distributions.

A masking function maps each original value of an attribute to a masked
value.  Its inverse image (masked value -> set of originals) is all that the
reconstruction step needs, and masked joints are computed straight from the
coded columns, never from a materialized masked dataset.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import IO, Iterable, Mapping, Sequence

import numpy as np

from .dataset import (
    AttributeDomain,
    Dataset,
    DatasetError,
    JointDistribution,
    MarginalDistribution,
    canonical_order,
    format_number,
)

__all__ = [
    "GeneratorPolicy",
    "InverseImage",
    "KINDS",
    "MaskingConfiguration",
    "MaskingError",
    "MaskingFunction",
    "aggregate_joint",
    "apply_mask",
    "dump_configurations",
    "generate_configurations",
    "inverse_image",
    "load_configurations",
    "mask_dataset",
    "masked_joint",
    "masked_marginal",
    "write_csv",
]

KINDS = ("identity", "suppress", "bucketize", "generalize", "blur-numeric", "blur-prefix")
SUPPRESSED = "*"


class MaskingError(ValueError):
    pass


def _number(value, kind: str) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise MaskingError(f"{kind} needs a numeric value, got {value!r}") from None
    if not math.isfinite(x):
        raise MaskingError(f"{kind} needs a finite value, got {value!r}")
    return x


def _bound(x) -> float:
    return float(x) if x is not None else math.inf


@dataclass(frozen=True, eq=False)
class MaskingFunction:
    """One masking function and its parameters.

    Use the constructors (:meth:`identity`, :meth:`generalize_ranges`, ...)
    rather than building ``params`` by hand.
    """

    kind: str
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise MaskingError(f"unknown masking kind {self.kind!r}")
        p = dict(self.params)
        if self.kind == "bucketize":
            width = float(p.get("width", 0))
            if not width > 0:
                raise MaskingError("bucketize width must be positive")
            p = {"width": width, "origin": float(p.get("origin", 0.0))}
        elif self.kind == "blur-numeric":
            k = float(p.get("k", 0))
            if not k > 0:
                raise MaskingError("blur-numeric multiple must be positive")
            p = {"k": k}
        elif self.kind == "blur-prefix":
            keep = p.get("keep")
            if not isinstance(keep, (int, np.integer)) or isinstance(keep, bool) or keep < 0:
                raise MaskingError("blur-prefix keep must be a non-negative integer")
            p = {"keep": int(keep)}
        elif self.kind == "generalize":
            if ("mapping" in p) == ("ranges" in p):
                raise MaskingError("generalize takes exactly one of 'mapping' or 'ranges'")
            if "mapping" in p:
                p = {"mapping": MappingProxyType({str(k): str(v) for k, v in p["mapping"].items()})}
            else:
                rules = []
                for rule in p["ranges"]:
                    if isinstance(rule, Mapping):
                        lo, hi, cat = rule.get("lo"), rule.get("hi"), rule["category"]
                    else:
                        lo, hi, cat = rule
                    lo = -math.inf if lo is None else float(lo)
                    hi = _bound(hi)
                    if not lo < hi:
                        raise MaskingError(f"empty generalize range [{lo}, {hi})")
                    rules.append((lo, hi, str(cat)))
                p = {"ranges": tuple(rules)}
        else:
            p = {}
        object.__setattr__(self, "params", MappingProxyType(p))

    # constructors -------------------------------------------------------
    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def suppress(cls):
        return cls("suppress")

    @classmethod
    def bucketize(cls, width: float, origin: float = 0.0):
        return cls("bucketize", {"width": width, "origin": origin})

    @classmethod
    def blur_numeric(cls, k: float):
        return cls("blur-numeric", {"k": k})

    @classmethod
    def blur_prefix(cls, keep: int):
        return cls("blur-prefix", {"keep": keep})

    @classmethod
    def generalize_mapping(cls, mapping: Mapping[str, str]):
        return cls("generalize", {"mapping": mapping})

    @classmethod
    def generalize_ranges(cls, ranges: Iterable[tuple[float | None, float | None, str]]):
        """Half-open ``[lo, hi)`` intervals; ``None`` stands for an open end."""
        return cls("generalize", {"ranges": list(ranges)})

    # behaviour ----------------------------------------------------------
    def __call__(self, value: str) -> str:
        return apply_mask(self, value)

    @property
    def is_numeric(self) -> bool:
        return self.kind in ("bucketize", "blur-numeric") or (
            self.kind == "generalize" and "ranges" in self.params)

    def to_json(self) -> dict:
        p = self.params
        if self.kind == "generalize" and "ranges" in p:
            params = {"ranges": [
                {"lo": None if math.isinf(lo) else lo, "hi": None if math.isinf(hi) else hi,
                 "category": cat} for lo, hi, cat in p["ranges"]]}
        elif self.kind == "generalize":
            params = {"mapping": dict(p["mapping"])}
        else:
            params = dict(p)
        return {"kind": self.kind, "params": params}

    @classmethod
    def from_json(cls, obj: Mapping) -> "MaskingFunction":
        return cls(obj["kind"], obj.get("params") or {})

    def _key(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def __eq__(self, other):
        if not isinstance(other, MaskingFunction):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        if not self.params:
            return f"MaskingFunction({self.kind!r})"
        return f"MaskingFunction({self.kind!r}, {dict(self.to_json()['params'])})"


def apply_mask(f: MaskingFunction, value: str) -> str:
    """Masked value of one original value.

    Examples
    --------
    >>> apply_mask(MaskingFunction.blur_numeric(10), "53.5")
    '50'
    >>> apply_mask(MaskingFunction.blur_prefix(3), "12345")
    '123**'
    """
    kind, p = f.kind, f.params
    if kind == "identity":
        return value
    if kind == "suppress":
        return SUPPRESSED
    if kind == "bucketize":
        x = _number(value, kind)
        w, o = p["width"], p["origin"]
        lo = o + math.floor((x - o) / w) * w
        return f"[{format_number(lo)},{format_number(lo + w)})"
    if kind == "blur-numeric":
        x = _number(value, kind)
        k = p["k"]
        # nearest multiple, exact midpoints go down
        return format_number(math.ceil(x / k - 0.5) * k)
    if kind == "blur-prefix":
        s = str(value)
        keep = p["keep"]
        return s if len(s) <= keep else s[:keep] + "*" * (len(s) - keep)
    if "mapping" in p:
        try:
            return p["mapping"][value]
        except KeyError:
            raise MaskingError(f"generalize has no rule for {value!r}") from None
    x = _number(value, kind)
    for lo, hi, cat in p["ranges"]:
        if lo <= x < hi:
            return cat
    raise MaskingError(f"generalize has no range covering {value!r}")


@dataclass(frozen=True, eq=False)
class InverseImage:
    """Partition of an original domain by masked value."""

    original: AttributeDomain
    masked_domain: AttributeDomain
    preimages: Mapping[str, tuple[str, ...]]
    lookup: np.ndarray = field(repr=False)

    @classmethod
    def from_preimages(cls, original: AttributeDomain,
                       preimages: Mapping[str, Iterable[str]]) -> "InverseImage":
        """Build from an explicit masked-value -> originals mapping.

        Raises if the sets do not partition ``original``.
        """
        masked = AttributeDomain.canonical(original.name, preimages)
        lookup = np.full(len(original), -1, dtype=np.int64)
        groups = {}
        for mv in masked.values:
            members = tuple(preimages[mv])
            if not members:
                raise MaskingError(f"masked value {mv!r} has an empty preimage")
            for v in members:
                i = original.index(v)
                if lookup[i] != -1:
                    raise MaskingError(f"{v!r} appears in more than one preimage")
                lookup[i] = masked.index(mv)
            groups[mv] = tuple(sorted(members, key=original.index))
        if np.any(lookup < 0):
            missing = [original.values[i] for i in np.flatnonzero(lookup < 0)]
            raise MaskingError(f"preimages do not cover {missing}")
        lookup.setflags(write=False)
        return cls(original, masked, MappingProxyType(groups), lookup)

    def group_sizes(self) -> np.ndarray:
        return np.bincount(self.lookup, minlength=len(self.masked_domain))

    def indicator(self) -> np.ndarray:
        """``(masked, original)`` 0/1 membership matrix."""
        g = np.zeros((len(self.masked_domain), len(self.original)))
        g[self.lookup, np.arange(len(self.original))] = 1.0
        return g

    def to_json(self) -> dict:
        return {"attribute": self.original.name,
                "preimages": {k: list(v) for k, v in self.preimages.items()}}


def inverse_image(f: MaskingFunction, domain: AttributeDomain) -> InverseImage:
    """Group the values of ``domain`` by their masked output."""
    groups: dict[str, list[str]] = {}
    for v in domain.values:
        groups.setdefault(apply_mask(f, v), []).append(v)
    return InverseImage.from_preimages(domain, groups)


def aggregate_joint(j: JointDistribution, inv: InverseImage) -> JointDistribution:
    """Sum the rows of an original joint into masked rows."""
    if inv.original != j.row_domain:
        raise MaskingError("inverse image was built over a different domain")
    cells = np.zeros((len(inv.masked_domain), len(j.col_domain)))
    np.add.at(cells, inv.lookup, j.cells)
    return JointDistribution(inv.masked_domain, j.col_domain, cells, j.total)


def masked_joint(d: Dataset, attribute: str, f: MaskingFunction,
                 inv: InverseImage | None = None) -> JointDistribution:
    """Joint of the masked attribute and the label, computed from the coded column."""
    if attribute not in d.attribute_names:
        raise DatasetError(f"unknown attribute {attribute!r}")
    if inv is None:
        inv = inverse_image(f, d.domains[attribute])
    ny = len(d.domains[d.label_name])
    flat = inv.lookup[d.codes[attribute]] * ny + d.codes[d.label_name]
    cells = np.bincount(flat, minlength=len(inv.masked_domain) * ny)
    return JointDistribution(inv.masked_domain, d.domains[d.label_name],
                             cells.reshape(-1, ny).astype(float), float(d.n_rows))


def masked_marginal(m: MarginalDistribution, inv: InverseImage) -> MarginalDistribution:
    if inv.original != m.domain:
        raise MaskingError(f"inverse image does not match the domain of {m.domain.name!r}")
    counts = np.bincount(inv.lookup, weights=m.as_array(), minlength=len(inv.masked_domain))
    return MarginalDistribution.from_array(inv.masked_domain, np.round(counts))


@dataclass(frozen=True)
class MaskingConfiguration:
    """One masking function per attribute, keyed by an id."""

    id: str
    assignments: tuple[tuple[str, MaskingFunction], ...]

    def __post_init__(self):
        assignments = tuple((str(a), f) for a, f in self.assignments)
        names = [a for a, _ in assignments]
        if len(set(names)) != len(names):
            raise MaskingError(f"configuration {self.id!r} assigns an attribute twice")
        object.__setattr__(self, "assignments", assignments)

    @property
    def attributes(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.assignments)

    def function_for(self, attribute: str) -> MaskingFunction:
        for a, f in self.assignments:
            if a == attribute:
                return f
        raise MaskingError(f"configuration {self.id!r} has no assignment for {attribute!r}")

    def validate_for(self, attribute_names: Sequence[str], label_name: str | None = None):
        if label_name is not None and label_name in self.attributes:
            raise MaskingError(f"configuration {self.id!r} masks the label {label_name!r}")
        missing = [a for a in attribute_names if a not in self.attributes]
        extra = [a for a in self.attributes if a not in attribute_names]
        if missing or extra:
            raise MaskingError(f"configuration {self.id!r} does not match the attributes "
                               f"(missing {missing}, unknown {extra})")

    def to_json(self) -> dict:
        return {"id": self.id,
                "assignments": [{"attribute": a, **f.to_json()} for a, f in self.assignments]}

    @classmethod
    def from_json(cls, obj: Mapping) -> "MaskingConfiguration":
        try:
            return cls(obj["id"], tuple((a["attribute"], MaskingFunction.from_json(a))
                                        for a in obj["assignments"]))
        except KeyError as exc:
            raise MaskingError(f"configuration entry lacks {exc}") from exc


def load_configurations(source: str | IO[str]) -> list[MaskingConfiguration]:
    if isinstance(source, str):
        with open(source, encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = json.load(source)
    if not isinstance(doc, list):
        raise MaskingError("configuration file must hold a JSON array")
    configs = [MaskingConfiguration.from_json(c) for c in doc]
    ids = [c.id for c in configs]
    if len(set(ids)) != len(ids):
        raise MaskingError("configuration ids must be unique")
    return configs


def dump_configurations(configs: Sequence[MaskingConfiguration]) -> str:
    return json.dumps([c.to_json() for c in configs], indent=2) + "\n"


def mask_dataset(d: Dataset, config: MaskingConfiguration) -> Dataset:
    """Materialize the masked dataset.  Only for export and test oracles."""
    config.validate_for(d.attribute_names, d.label_name)
    records = []
    masked_cols = [[apply_mask(config.function_for(a), v) for v in d.column(a)]
                   for a in d.attribute_names]
    labels = d.column(d.label_name)
    for i, y in enumerate(labels):
        records.append(tuple(c[i] for c in masked_cols) + (y,))
    return Dataset.from_records(records, d.attribute_names, d.label_name)


def write_csv(d: Dataset, out: IO[str]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(d.columns)
    cols = [d.column(c) for c in d.columns]
    w.writerows(zip(*cols))


# configuration generator ------------------------------------------------

@dataclass(frozen=True)
class GeneratorPolicy:
    """Which masking kinds the generator may draw, and their parameter ranges.

    ``suppress_probability`` is applied per attribute before a kind is drawn
    uniformly from the allowed list for the attribute's type.
    """

    numeric_kinds: tuple[str, ...] = ("identity", "bucketize", "generalize", "blur-numeric")
    categorical_kinds: tuple[str, ...] = ("identity", "generalize", "blur-prefix")
    suppress_probability: float = 0.1
    blur_multiples: tuple[float, ...] = (5, 10, 100)
    quantile_spans: tuple[float, ...] = (0.1, 0.25, 0.5)
    max_generalize_groups: int = 4

    def __post_init__(self):
        for k in self.numeric_kinds + self.categorical_kinds:
            if k not in KINDS:
                raise MaskingError(f"unknown masking kind {k!r} in policy")
        if not 0 <= self.suppress_probability <= 1:
            raise MaskingError("suppress_probability must lie in [0, 1]")

    @classmethod
    def identity_only(cls):
        return cls(numeric_kinds=("identity",), categorical_kinds=("identity",),
                   suppress_probability=0.0)


def _weighted_quantile(values: np.ndarray, counts: np.ndarray, q: float) -> float:
    cum = np.cumsum(counts)
    return float(values[min(np.searchsorted(cum, q * cum[-1]), len(values) - 1)])


def _candidate_kinds(policy: GeneratorPolicy, domain: AttributeDomain) -> list[str]:
    kinds = list(policy.numeric_kinds if domain.is_numeric else policy.categorical_kinds)
    if len(domain) < 2:
        kinds = [k for k in kinds if k != "generalize"]
    if max(len(v) for v in domain.values) < 2:
        kinds = [k for k in kinds if k != "blur-prefix"]
    return [k for k in kinds if k != "suppress"]


def _draw_function(rng: np.random.Generator, policy: GeneratorPolicy,
                   m: MarginalDistribution) -> MaskingFunction:
    domain = m.domain
    kinds = _candidate_kinds(policy, domain)
    allow_suppress = policy.suppress_probability > 0 or "suppress" in (
        policy.numeric_kinds if domain.is_numeric else policy.categorical_kinds)
    if not kinds and not allow_suppress:
        raise MaskingError(f"policy allows no masking function for {domain.name!r}")
    if not kinds or rng.random() < policy.suppress_probability:
        return MaskingFunction.suppress()
    kind = kinds[int(rng.integers(len(kinds)))]
    if kind == "identity":
        return MaskingFunction.identity()
    if kind == "bucketize":
        values = np.array([float(v) for v in domain.values])
        span = float(policy.quantile_spans[int(rng.integers(len(policy.quantile_spans)))])
        start = float(rng.uniform(0, 1 - span))
        counts = m.as_array()
        width = (_weighted_quantile(values, counts, start + span)
                 - _weighted_quantile(values, counts, start))
        if width <= 0:
            width = (values.max() - values.min()) * span or 1.0
        return MaskingFunction.bucketize(float(np.format_float_positional(width, 4)),
                                         origin=float(values.min()))
    if kind == "blur-numeric":
        return MaskingFunction.blur_numeric(
            policy.blur_multiples[int(rng.integers(len(policy.blur_multiples)))])
    if kind == "blur-prefix":
        longest = max(len(v) for v in domain.values)
        return MaskingFunction.blur_prefix(int(rng.integers(1, longest)))
    n_groups = int(rng.integers(2, max(2, min(policy.max_generalize_groups, len(domain))) + 1))
    if domain.is_numeric:
        cuts = sorted(rng.choice(np.arange(1, len(domain)), size=n_groups - 1, replace=False))
        edges = [None] + [float(domain.values[c]) for c in cuts] + [None]
        rules = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            name = (f"[{'-inf' if lo is None else format_number(lo)},"
                    f"{'inf' if hi is None else format_number(hi)})")
            rules.append((lo, hi, name))
        return MaskingFunction.generalize_ranges(rules)
    order = rng.permutation(len(domain))
    labels = np.arange(len(domain)) % n_groups
    mapping = {domain.values[i]: f"grp{labels[k]}" for k, i in enumerate(order)}
    return MaskingFunction.generalize_mapping(mapping)


def generate_configurations(d: Dataset, k: int, seed: int,
                            policy: GeneratorPolicy | None = None) -> list[MaskingConfiguration]:
    """Draw ``k`` distinct configurations with ids ``cfg-000`` onwards.

    Every (config, attribute) draw uses its own generator keyed by
    ``(seed, config index, attribute index, attempt)``, so the output does
    not depend on iteration order.
    """
    if k < 1:
        raise MaskingError("k must be at least 1")
    policy = policy or GeneratorPolicy()
    marginals = {}
    for a in d.attribute_names:
        counts = np.bincount(d.codes[a], minlength=len(d.domains[a]))
        marginals[a] = MarginalDistribution.from_array(d.domains[a], counts)
    width = max(3, len(str(k - 1)))
    seen: set = set()
    configs = []
    for ci in range(k):
        for attempt in range(1000):
            fns = tuple(
                (a, _draw_function(np.random.default_rng([seed, ci, ai, attempt]), policy,
                                   marginals[a]))
                for ai, a in enumerate(d.attribute_names))
            if fns not in seen:
                break
        else:
            raise MaskingError(f"policy cannot produce {k} distinct configurations")
        seen.add(fns)
        configs.append(MaskingConfiguration(f"cfg-{ci:0{width}d}", fns))
    return configs
