"""Pick the masking configuration with the smallest predictive utility deviation.

For every configuration and attribute the original joint is reconstructed
from the masked joint (plus the histogram when available), the utility
measure is evaluated on both, and the absolute differences are averaged
over the attributes.  The configuration with the lowest average wins.
"""
from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from . import reconstruction as _recon
from .dataset import (
    AttributeDomain,
    Dataset,
    JointDistribution,
    MarginalDistribution,
    joint,
    marginal,
)
from .masking import InverseImage, MaskingConfiguration, inverse_image, masked_joint
from .reconstruction import ConstraintSet, IpfSettings
from .utility import Measure, utility

__all__ = [
    "AdvisoryError",
    "AdvisoryInput",
    "AdvisoryReport",
    "AttributeResult",
    "ConfigResult",
    "advise",
    "align_masked_joint",
    "derive_seed",
    "middleware_inputs",
    "provider_inputs",
    "truth_report",
]

# deviations closer than this to the minimum count as tied
TIE_TOLERANCE = 1e-12


class AdvisoryError(RuntimeError):
    """A reconstruction failed; the message names the configuration and attribute."""


def derive_seed(seed: int, config_index: int, attribute_index: int) -> int:
    """Independent per-(configuration, attribute) seed derived from a master seed."""
    ss = np.random.SeedSequence([seed, config_index, attribute_index])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class AdvisoryInput:
    masked_joint: JointDistribution
    inverse: InverseImage
    marginal: MarginalDistribution | None = None


@dataclass(frozen=True)
class AttributeResult:
    attribute: str
    utility_original: float
    utility_masked: float
    deviation: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class ConfigResult:
    config_id: str
    attributes: tuple[AttributeResult, ...]
    total_deviation: float


@dataclass
class AdvisoryReport:
    measure: Measure
    case: str
    configs: list[ConfigResult]
    selected: str
    timings: dict = field(default_factory=dict, compare=False, repr=False)

    def deviations(self) -> dict[str, float]:
        return {c.config_id: c.total_deviation for c in self.configs}

    def to_json(self) -> dict:
        return {
            "measure": self.measure.value,
            "case": self.case,
            "per_config": [
                {
                    "config_id": c.config_id,
                    "per_attribute": [
                        {"attribute": a.attribute, "utility_original": a.utility_original,
                         "utility_masked": a.utility_masked, "deviation": a.deviation,
                         "iterations": a.iterations, "converged": a.converged}
                        for a in c.attributes
                    ],
                    "total_deviation": c.total_deviation,
                }
                for c in self.configs
            ],
            "selected": self.selected,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"

    def render(self) -> str:
        """Aligned text table, one line per configuration, selection last."""
        width = max(len("config"), *(len(c.config_id) for c in self.configs))
        lines = [f"measure: {self.measure.value}   case: {self.case}",
                 f"{'config':<{width}}  {'total_deviation':>16}  worst_attribute"]
        for c in self.configs:
            worst = max(c.attributes, key=lambda a: a.deviation)
            mark = "  <- selected" if c.config_id == self.selected else ""
            lines.append(f"{c.config_id:<{width}}  {c.total_deviation:>16.6g}  "
                         f"{worst.attribute} ({worst.deviation:.4g}){mark}")
        lines.append(f"selected: {self.selected}")
        return "\n".join(lines) + "\n"


def _select(results: Sequence[ConfigResult]) -> str:
    best = min(r.total_deviation for r in results)
    tied = [r.config_id for r in results
            if r.total_deviation - best <= TIE_TOLERANCE * max(1.0, abs(best))]
    return min(tied)


def _evaluate_config(ci: int, config: MaskingConfiguration, attributes: Sequence[str],
                     inputs: Mapping[tuple[str, str], AdvisoryInput], measure: Measure,
                     settings: IpfSettings) -> tuple[ConfigResult, float, float]:
    per_attr = []
    t_recon = t_util = 0.0
    for ai, attribute in enumerate(attributes):
        try:
            item = inputs[(config.id, attribute)]
        except KeyError:
            raise AdvisoryError(f"no masked joint for configuration {config.id!r}, "
                                f"attribute {attribute!r}") from None
        t0 = time.perf_counter()
        try:
            cons = ConstraintSet(item.inverse, item.masked_joint, item.marginal)
            rec = _recon.reconstruct(
                cons, replace(settings, rounding_seed=derive_seed(settings.rounding_seed, ci, ai)))
        except (ValueError, ArithmeticError) as exc:
            raise AdvisoryError(f"configuration {config.id!r}, attribute {attribute!r}: "
                                f"{exc}") from exc
        t1 = time.perf_counter()
        u_orig = utility(measure, rec.fractional, rec.integral)
        u_mask = utility(measure, item.masked_joint)
        t_util += time.perf_counter() - t1
        t_recon += t1 - t0
        per_attr.append(AttributeResult(attribute, u_orig, u_mask, abs(u_orig - u_mask),
                                        rec.iterations, rec.converged))
    total = sum(a.deviation for a in per_attr) / len(per_attr)
    return ConfigResult(config.id, tuple(per_attr), total), t_recon, t_util


def advise(configs: Sequence[MaskingConfiguration],
           inputs: Mapping[tuple[str, str], AdvisoryInput],
           measure: Measure | str = Measure.MUTUAL_INFORMATION,
           settings: IpfSettings | None = None, jobs: int = 1) -> AdvisoryReport:
    """Score every configuration and select the one with minimal deviation.

    Parameters
    ----------
    configs : sequence of MaskingConfiguration
        Candidates; all must cover the same attributes.
    inputs : mapping
        ``(config id, attribute) -> AdvisoryInput``.  An input carrying a
        histogram is reconstructed with it, otherwise without.
    measure : Measure or str
    settings : IpfSettings, optional
        ``rounding_seed`` acts as the master seed; each pair gets
        ``derive_seed(seed, config index, attribute index)``.
    jobs : int
        Worker threads.  The report does not depend on it.

    Returns
    -------
    AdvisoryReport
        Ties within ``TIE_TOLERANCE`` go to the lowest configuration id.
    """
    if not configs:
        raise ValueError("no configurations to advise on")
    measure = Measure.parse(measure)
    settings = settings or IpfSettings()
    attributes = configs[0].attributes
    for c in configs:
        c.validate_for(attributes)
    ids = [c.id for c in configs]
    if len(set(ids)) != len(ids):
        raise ValueError("configuration ids must be unique")

    def work(args):
        ci, config = args
        return _evaluate_config(ci, config, attributes, inputs, measure, settings)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(work, enumerate(configs)))
    else:
        outcomes = [work(item) for item in enumerate(configs)]
    results = [o[0] for o in outcomes]
    with_hist = [inputs[(c.id, a)].marginal is not None for c in configs for a in attributes]
    case = "with-1d" if all(with_hist) else "no-1d" if not any(with_hist) else "mixed"
    timings = {"reconstruction": sum(o[1] for o in outcomes),
               "utility": sum(o[2] for o in outcomes)}
    return AdvisoryReport(measure, case, results, _select(results), timings)


def provider_inputs(d: Dataset, configs: Sequence[MaskingConfiguration],
                    case: str = "with-1d") -> dict[tuple[str, str], AdvisoryInput]:
    """Advisor inputs computed from raw data: masked joints and, for ``with-1d``, histograms."""
    if case not in ("with-1d", "no-1d"):
        raise ValueError(f"unknown case {case!r}")
    marginals = ({a: marginal(d, a) for a in d.attribute_names} if case == "with-1d" else {})
    out = {}
    for config in configs:
        config.validate_for(d.attribute_names, d.label_name)
        for a in d.attribute_names:
            inv = inverse_image(config.function_for(a), d.domains[a])
            out[(config.id, a)] = AdvisoryInput(masked_joint(d, a, config.function_for(a), inv),
                                                inv, marginals.get(a))
    return out


def align_masked_joint(j: JointDistribution, inv: InverseImage) -> JointDistribution:
    """Reindex a masked joint onto the inverse image's masked domain.

    Masked values the joint never observed get zero rows.
    """
    if j.row_domain.values == inv.masked_domain.values:
        return j
    unknown = [v for v in j.row_domain.values if v not in inv.masked_domain]
    if unknown:
        raise AdvisoryError(f"masked joint of {inv.original.name!r} has values {unknown} that "
                            "the masking function cannot produce over the given domain")
    cells = np.zeros((len(inv.masked_domain), len(j.col_domain)))
    for i, v in enumerate(j.row_domain.values):
        cells[inv.masked_domain.index(v)] = j.cells[i]
    return JointDistribution(inv.masked_domain, j.col_domain, cells, j.total)


def middleware_inputs(configs: Sequence[MaskingConfiguration],
                      masked_joints: Mapping[str, Mapping[str, JointDistribution]],
                      summaries: Mapping[str, MarginalDistribution] | None = None,
                      domains: Mapping[str, AttributeDomain] | None = None,
                      case: str = "with-1d") -> dict[tuple[str, str], AdvisoryInput]:
    """Advisor inputs from shared artifacts only (no raw data).

    The original domain of each attribute is taken from ``domains``, then
    from the histogram keys in ``summaries``, then from the preimages an
    explicit generalize mapping declares.
    """
    if case not in ("with-1d", "no-1d"):
        raise ValueError(f"unknown case {case!r}")
    summaries = summaries or {}
    domains = domains or {}
    out = {}
    for config in configs:
        if config.id not in masked_joints:
            raise AdvisoryError(f"no masked joints for configuration {config.id!r}")
        for a, f in config.assignments:
            if a not in masked_joints[config.id]:
                raise AdvisoryError(f"no masked joint for configuration {config.id!r}, "
                                    f"attribute {a!r}")
            if a in domains:
                domain = domains[a]
            elif a in summaries:
                domain = summaries[a].domain
            elif f.kind == "generalize" and "mapping" in f.params:
                domain = AttributeDomain.canonical(a, f.params["mapping"])
            else:
                raise AdvisoryError(f"no domain available for attribute {a!r}; "
                                    "supply a domains file or summaries")
            hist = None
            if case == "with-1d":
                if a not in summaries:
                    raise AdvisoryError(f"case with-1d needs a histogram for {a!r}")
                hist = summaries[a]
                if hist.domain != domain:
                    hist = MarginalDistribution(domain, dict(hist.counts), hist.total)
            inv = inverse_image(f, domain)
            out[(config.id, a)] = AdvisoryInput(
                align_masked_joint(masked_joints[config.id][a], inv), inv, hist)
    return out


def truth_report(d: Dataset, configs: Sequence[MaskingConfiguration],
                 measure: Measure | str = Measure.MUTUAL_INFORMATION) -> AdvisoryReport:
    """Deviation against the true joints instead of reconstructions.

    Needs the raw data, so it serves as a provider-side reference and as the
    brute-force check for :func:`advise`.
    """
    measure = Measure.parse(measure)
    truth = {a: utility(measure, joint(d, a)) for a in d.attribute_names}
    results = []
    for config in configs:
        config.validate_for(d.attribute_names, d.label_name)
        per_attr = []
        for a in d.attribute_names:
            u_mask = utility(measure, masked_joint(d, a, config.function_for(a)))
            per_attr.append(AttributeResult(a, truth[a], u_mask, abs(truth[a] - u_mask), 0, True))
        results.append(ConfigResult(config.id, tuple(per_attr),
                                    sum(r.deviation for r in per_attr) / len(per_attr)))
    return AdvisoryReport(measure, "truth", results, _select(results))
