"""Ground-truth evaluation: reconstruction error, synthetic data and timing."""
from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .advisor import AdvisoryReport, advise, derive_seed, provider_inputs
from .dataset import AttributeDomain, Dataset, JointDistribution, joint, marginal
from .masking import MaskingConfiguration, inverse_image, masked_joint
from .reconstruction import ConstraintSet, IpfSettings, reconstruct, sampling_reconstruct
from .utility import Measure, utility

__all__ = [
    "EvalRecord",
    "METHODS",
    "SynthSpec",
    "generate_synthetic",
    "run_benchmark",
    "summarize_records",
    "dumps_records",
    "time_advisory",
    "timing_breakdown",
    "tvd",
]

METHODS = ("ipf-with-1d", "ipf-no-1d", "sampling")


def tvd(p: JointDistribution, q: JointDistribution) -> float:
    """Total variation distance between two tables, aligned by value.

    Cells missing from one side count as zero.
    """
    if not (p.total > 0 and q.total > 0):
        raise ValueError("total variation needs positive totals")
    if p.row_domain.values == q.row_domain.values and p.col_domain.values == q.col_domain.values:
        a, b = p.cells, q.cells
    else:
        rows = list(dict.fromkeys(p.row_domain.values + q.row_domain.values))
        cols = list(dict.fromkeys(p.col_domain.values + q.col_domain.values))
        a, b = (_embed(t, rows, cols) for t in (p, q))
    return float(min(1.0, 0.5 * np.abs(a / a.sum() - b / b.sum()).sum()))


def _embed(t: JointDistribution, rows: list[str], cols: list[str]) -> np.ndarray:
    out = np.zeros((len(rows), len(cols)))
    ri = [rows.index(v) for v in t.row_domain.values]
    ci = [cols.index(v) for v in t.col_domain.values]
    out[np.ix_(ri, ci)] = t.cells
    return out


@dataclass(frozen=True)
class SynthSpec:
    """Knobs of the synthetic generator.

    With probability ``gamma`` a value is the fixed mode of its
    (attribute, label) pair, otherwise it is uniform over the domain.
    """

    rows: int
    attributes: int
    domain_size: int = 10
    label_classes: int = 4
    gamma: float = 0.5
    seed: int = 0

    def __post_init__(self):
        for name in ("rows", "attributes", "domain_size", "label_classes"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if not 0 <= self.gamma <= 1:
            raise ValueError("gamma must lie in [0, 1]")


def _compact(name: str, values: Sequence[str], codes: np.ndarray):
    present = np.bincount(codes, minlength=len(values)) > 0
    domain = AttributeDomain.canonical(name, [v for v, p in zip(values, present) if p])
    remap = np.full(len(values), -1, dtype=np.int32)
    for i, v in enumerate(values):
        if present[i]:
            remap[i] = domain.index(v)
    return domain, remap[codes]


def generate_synthetic(spec: SynthSpec) -> Dataset:
    """Synthetic labelled data with tunable attribute-label dependence.

    Labels are uniform over ``c0, c1, ...``; attribute values are the integers
    ``0 .. domain_size-1`` as strings.  Modes are distinct across classes
    whenever the domain is large enough.  Only observed values enter the
    domains.
    """
    n, d, k = spec.rows, spec.domain_size, spec.label_classes
    label_rng = np.random.default_rng([spec.seed, 0])
    labels = label_rng.integers(k, size=n, dtype=np.int32)
    width = len(str(spec.attributes - 1))
    names = [f"x{i:0{width}d}" for i in range(spec.attributes)]
    value_names = [str(v) for v in range(d)]
    domains, codes = {}, {}
    for i, name in enumerate(names):
        rng = np.random.default_rng([spec.seed, i + 1])
        if d >= k:
            modes = rng.permutation(d)[:k].astype(np.int32)
        else:
            modes = rng.integers(d, size=k, dtype=np.int32)
        use_mode = rng.random(n) < spec.gamma
        noise = rng.integers(d, size=n, dtype=np.int32)
        col = np.where(use_mode, modes[labels], noise)
        domains[name], codes[name] = _compact(name, value_names, col)
    domains["label"], codes["label"] = _compact("label", [f"c{j}" for j in range(k)], labels)
    return Dataset(names, "label", domains, codes)


@dataclass(frozen=True)
class EvalRecord:
    config_id: str
    attribute: str
    method: str
    tvd: float
    iterations: int
    deviations: dict = field(default_factory=dict)
    wall_time: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not 0 <= self.tvd <= 1:
            raise ValueError(f"tvd out of range: {self.tvd}")

    def to_json(self, timings: bool = False) -> dict:
        out = {"config_id": self.config_id, "attribute": self.attribute,
               "method": self.method, "tvd": self.tvd, "iterations": self.iterations,
               "deviations": dict(self.deviations)}
        if timings:
            out["wall_time"] = dict(self.wall_time)
        return out


def _bench_pair(d: Dataset, ci: int, ai: int, config: MaskingConfiguration, attribute: str,
                methods: Sequence[str], measures: Sequence[Measure],
                settings: IpfSettings) -> list[EvalRecord]:
    f = config.function_for(attribute)
    t0 = time.perf_counter()
    inv = inverse_image(f, d.domains[attribute])
    mj = masked_joint(d, attribute, f, inv)
    t_mask = time.perf_counter() - t0
    truth = joint(d, attribute)
    seed = derive_seed(settings.rounding_seed, ci, ai)
    pair_settings = IpfSettings(settings.tolerance, settings.max_iterations, seed, settings.norm)
    records = []
    for method in methods:
        t0 = time.perf_counter()
        if method == "sampling":
            est = est_int = sampling_reconstruct(mj, inv, seed)
            iterations = 0
        else:
            hist = marginal(d, attribute) if method == "ipf-with-1d" else None
            rec = reconstruct(ConstraintSet(inv, mj, hist), pair_settings)
            est, est_int, iterations = rec.fractional, rec.integral, rec.iterations
        t1 = time.perf_counter()
        u_mask = {m: utility(m, mj) for m in measures}
        devs = {m.short: abs(utility(m, est, est_int) - u_mask[m]) for m in measures}
        t2 = time.perf_counter()
        records.append(EvalRecord(config.id, attribute, method, tvd(truth, est), iterations, devs,
                                  {"masking": t_mask, "reconstruction": t1 - t0,
                                   "utility": t2 - t1}))
    return records


def run_benchmark(d: Dataset, configs: Sequence[MaskingConfiguration],
                  measures: Sequence[Measure | str] = ("mi",),
                  methods: Sequence[str] = METHODS,
                  settings: IpfSettings | None = None, jobs: int = 1) -> list[EvalRecord]:
    """Reconstruct every (configuration, attribute) with every method and score it.

    Records come back ordered by configuration, attribute, then method as
    given, whatever ``jobs`` is.
    """
    settings = settings or IpfSettings()
    measures = [Measure.parse(m) for m in measures]
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {METHODS}")
    for c in configs:
        c.validate_for(d.attribute_names, d.label_name)
    tasks = [(ci, ai, c, a) for ci, c in enumerate(configs)
             for ai, a in enumerate(d.attribute_names)]

    def work(task):
        ci, ai, c, a = task
        return _bench_pair(d, ci, ai, c, a, methods, measures, settings)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(work, tasks))
    else:
        chunks = [work(t) for t in tasks]
    return [r for chunk in chunks for r in chunk]


def summarize_records(records: Sequence[EvalRecord]) -> dict:
    """Median and quartiles of the per-configuration mean TVD, per method."""
    per_config: dict[str, dict[str, list[float]]] = {}
    for r in records:
        per_config.setdefault(r.method, {}).setdefault(r.config_id, []).append(r.tvd)
    out = {}
    for method, by_cfg in per_config.items():
        means = np.array([np.mean(v) for v in by_cfg.values()])
        out[method] = {"median_tvd": float(np.median(means)),
                       "p25": float(np.percentile(means, 25)),
                       "p75": float(np.percentile(means, 75)),
                       "configs": len(means)}
    return out


def timing_breakdown(records: Sequence[EvalRecord]) -> dict:
    seen = {}
    recon = util = 0.0
    for r in records:
        seen[(r.config_id, r.attribute)] = r.wall_time.get("masking", 0.0)
        recon += r.wall_time.get("reconstruction", 0.0)
        util += r.wall_time.get("utility", 0.0)
    mask = sum(seen.values())
    return {"masking": mask, "reconstruction": recon, "utility": util,
            "total": mask + recon + util}


def time_advisory(d: Dataset, configs: Sequence[MaskingConfiguration],
                  measure: Measure | str = "mi", case: str = "with-1d",
                  settings: IpfSettings | None = None,
                  jobs: int = 1) -> tuple[AdvisoryReport, dict]:
    """Run the provider-side advisory and report wall time per phase.

    ``masking`` covers the masked joints and histograms, the other phases
    come from :func:`~maskadvisor.advisor.advise`.
    """
    t0 = time.perf_counter()
    inputs = provider_inputs(d, configs, case)
    t_mask = time.perf_counter() - t0
    report = advise(configs, inputs, measure, settings, jobs)
    phases = {"masking": t_mask, **report.timings}
    phases["total"] = time.perf_counter() - t0
    return report, phases


def dumps_records(records: Sequence[EvalRecord]) -> str:
    return "".join(json.dumps(r.to_json()) + "\n" for r in records)
