"""Estimate an attribute-label joint from its masked view.

The fitted table starts uniform and is alternately rescaled so that

* every masked block ``(a', y)`` sums to the masked joint's cell, and
* (when the attribute's 1D histogram is known) every original row ``a``
  sums to its histogram count,

which is iterative proportional fitting with blocks playing the role of
columns.  The fractional fit is then rounded cell by cell.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import AttributeDomain, JointDistribution, MarginalDistribution
from .masking import InverseImage, masked_marginal

__all__ = [
    "ConstraintSet",
    "DegenerateFitError",
    "InfeasibleConstraintsError",
    "IpfSettings",
    "Reconstruction",
    "randomized_round",
    "reconstruct",
    "sampling_reconstruct",
    "uniform_init",
]


class InfeasibleConstraintsError(ValueError):
    """Histogram and masked joint disagree on some masked group."""


class DegenerateFitError(ArithmeticError):
    """A block or row with a positive target has no mass left to scale."""


@dataclass(frozen=True)
class IpfSettings:
    """Stopping rule and rounding seed.

    ``tolerance`` is relative to N and compared with the largest absolute
    constraint residual.  ``norm`` only records which distance the fit
    stands in for; the fit itself does not depend on it.
    """

    tolerance: float = 1e-9
    max_iterations: int = 1000
    rounding_seed: int = 0
    norm: str = "l2"

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.norm not in ("l1", "l2", "linf"):
            raise ValueError(f"unknown norm {self.norm!r}")


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    """Targets the fitted joint has to meet.

    Parameters
    ----------
    inverse : InverseImage
        Groups of original values behind each masked value.
    block_targets : JointDistribution
        The masked joint; one target per ``(masked value, label)`` block.
    row_targets : MarginalDistribution, optional
        1D histogram of the original attribute.  Its presence selects the
        "with histogram" case.
    """

    inverse: InverseImage
    block_targets: JointDistribution
    row_targets: MarginalDistribution | None = None
    group_targets: np.ndarray = field(init=False, repr=False)
    total: float = field(init=False)

    def __post_init__(self):
        inv, blocks = self.inverse, self.block_targets
        if blocks.row_domain.values != inv.masked_domain.values:
            raise InfeasibleConstraintsError(
                f"masked joint rows {list(blocks.row_domain.values)} do not match the "
                f"masked domain {list(inv.masked_domain.values)}")
        group = blocks.row_sums()
        total = float(blocks.total)
        if self.row_targets is not None:
            r = self.row_targets
            if r.domain.values != inv.original.values:
                raise InfeasibleConstraintsError(
                    f"histogram domain of {r.domain.name!r} does not match the masking domain")
            if abs(r.total - total) > 1e-9 * max(total, 1.0):
                raise InfeasibleConstraintsError(
                    f"histogram of {r.domain.name!r} totals {r.total}, masked joint totals {total}")
            implied = masked_marginal(r, inv).as_array()
            for mv, want, got in zip(inv.masked_domain.values, group, implied):
                if abs(want - got) > 1e-9 * max(total, 1.0):
                    raise InfeasibleConstraintsError(
                        f"attribute {r.domain.name!r}, masked value {mv!r}: histogram gives "
                        f"{got:g} records, masked joint gives {want:g}")
        object.__setattr__(self, "group_targets", group)
        object.__setattr__(self, "total", total)

    @property
    def case(self) -> str:
        return "no-1d" if self.row_targets is None else "with-1d"

    @property
    def row_domain(self) -> AttributeDomain:
        return self.inverse.original

    @property
    def col_domain(self) -> AttributeDomain:
        return self.block_targets.col_domain

    def residuals(self, cells: np.ndarray) -> float:
        """Largest absolute constraint violation of ``cells``, divided by N."""
        blocks = np.zeros_like(self.block_targets.cells)
        np.add.at(blocks, self.inverse.lookup, cells)
        worst = np.max(np.abs(blocks - self.block_targets.cells), initial=0.0)
        if self.row_targets is not None:
            rows = cells.sum(axis=1)
            worst = max(worst, np.max(np.abs(rows - self.row_targets.as_array()), initial=0.0))
        return float(worst) / max(self.total, 1.0)


@dataclass(frozen=True, eq=False)
class Reconstruction:
    fractional: JointDistribution
    integral: JointDistribution
    iterations: int
    residual: float
    converged: bool
    case: str
    seed: int
    residual_history: tuple[float, ...] = ()

    def metadata(self) -> dict:
        return {"case": self.case, "iterations": self.iterations, "residual": self.residual,
                "converged": self.converged, "seed": self.seed}


def uniform_init(row_domain: AttributeDomain, col_domain: AttributeDomain,
                 n: float) -> JointDistribution:
    """Table spreading ``n`` evenly over all cells."""
    if not n > 0:
        raise ValueError("total must be positive")
    cells = np.full((len(row_domain), len(col_domain)), n / (len(row_domain) * len(col_domain)))
    return JointDistribution(row_domain, col_domain, cells, float(n))


def randomized_round(cells: np.ndarray, seed: int) -> np.ndarray:
    """Round each cell up with probability equal to its fractional part.

    Cell ``i`` (row-major) consumes the ``i``-th draw of a Philox stream keyed
    by ``seed``, so its outcome does not depend on the other cells.
    """
    cells = np.asarray(cells, dtype=float)
    floor = np.floor(cells)
    frac = cells - floor
    u = np.random.Generator(np.random.Philox(seed)).random(cells.size).reshape(cells.shape)
    return floor + (u < frac)


def reconstruct(constraints: ConstraintSet,
                settings: IpfSettings | None = None) -> Reconstruction:
    """Fit the original joint to the constraints, then round it.

    Each sweep first rescales every masked block to its target and then,
    if a histogram is present, every row to its count.  The loop stops once
    the largest residual is at most ``tolerance * N`` or after
    ``max_iterations`` sweeps, in which case the best sweep is returned with
    ``converged=False``.

    Raises
    ------
    DegenerateFitError
        When a positive target meets an all-zero block or row.
    """
    settings = settings or IpfSettings()
    c = constraints
    n = c.total
    lookup = c.inverse.lookup
    targets = c.block_targets.cells
    rows = None if c.row_targets is None else c.row_targets.as_array()
    cells = uniform_init(c.row_domain, c.col_domain, n).cells.copy() if n > 0 else \
        np.zeros((len(c.row_domain), len(c.col_domain)))
    membership = c.inverse.indicator()

    # exact zero targets stay zero for good
    cells[targets[lookup] == 0] = 0.0
    if rows is not None:
        cells[rows == 0, :] = 0.0

    history: list[float] = []
    best, best_res = cells, np.inf
    for sweep in range(1, settings.max_iterations + 1):
        sums = membership @ cells
        if np.any((sums == 0) & (targets > 0)):
            g, y = np.argwhere((sums == 0) & (targets > 0))[0]
            raise DegenerateFitError(
                f"block ({c.inverse.masked_domain.values[g]!r}, {c.col_domain.values[y]!r}) "
                "has a positive target but no mass")
        denom = sums[lookup]
        # target * (cell / sum) keeps singleton blocks exact
        share = np.divide(cells, denom, out=np.zeros_like(cells), where=denom > 0)
        cells = targets[lookup] * share
        if rows is not None:
            current = cells.sum(axis=1)
            bad = (current == 0) & (rows > 0)
            if np.any(bad):
                raise DegenerateFitError(
                    f"row {c.row_domain.values[np.flatnonzero(bad)[0]]!r} has a positive "
                    "target but no mass")
            factor = np.divide(rows, current, out=np.zeros_like(rows), where=current > 0)
            cells = cells * factor[:, None]
        res = c.residuals(cells)
        history.append(res)
        if res < best_res:
            best, best_res = cells, res
        if res <= settings.tolerance:
            break

    converged = best_res <= settings.tolerance
    fractional = JointDistribution(c.row_domain, c.col_domain, best, float(best.sum()))
    integral = JointDistribution(c.row_domain, c.col_domain,
                                 randomized_round(best, settings.rounding_seed))
    return Reconstruction(fractional, integral, len(history), best_res, converged,
                          c.case, settings.rounding_seed, tuple(history))


def sampling_reconstruct(masked_joint: JointDistribution, inverse: InverseImage,
                         seed: int) -> JointDistribution:
    """Spread every masked record over its preimage uniformly at random.

    Each of the ``count`` records in masked cell ``(a', y)`` is assigned an
    original value drawn with replacement from the preimage of ``a'``.
    """
    if masked_joint.row_domain.values != inverse.masked_domain.values:
        raise ValueError("masked joint and inverse image disagree on the masked domain")
    if not masked_joint.is_integral():
        raise ValueError("sampling needs an integral masked joint")
    rng = np.random.default_rng(seed)
    counts = np.round(masked_joint.cells).astype(np.int64)
    out = np.zeros((len(inverse.original), len(masked_joint.col_domain)))
    for g in range(len(inverse.masked_domain)):
        members = np.flatnonzero(inverse.lookup == g)
        draws = rng.multinomial(counts[g], np.full(members.size, 1.0 / members.size))
        out[members, :] = draws.T
    return JointDistribution(inverse.original, masked_joint.col_domain, out, masked_joint.total)
