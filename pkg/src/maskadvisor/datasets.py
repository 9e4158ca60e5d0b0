"""Bundled example data.

``running_example`` is a 100-record health table whose Age x Health joint
and marginals are the worked example used throughout the docs; Weight and
Zip were filled in with plausible synthetic values.  ``excerpt`` is the
six-row preview table.
"""
from __future__ import annotations

from importlib import resources

from .dataset import Dataset, load_dataset
from .masking import MaskingConfiguration, MaskingFunction

__all__ = ["LABEL", "example_configurations", "excerpt", "running_example", "young_old"]

LABEL = "Health"


def _load(name: str) -> Dataset:
    with resources.files(__package__).joinpath("data", name).open(encoding="utf-8") as fh:
        return load_dataset(fh, LABEL)


def running_example() -> Dataset:
    return _load("running_example.csv")


def excerpt() -> Dataset:
    return _load("excerpt.csv")


def young_old() -> MaskingFunction:
    """Age generalization: Young below 45, Old from 45 up."""
    return MaskingFunction.generalize_ranges([(10, 45, "Young"), (45, None, "Old")])


def example_configurations() -> list[MaskingConfiguration]:
    """Two candidates: Young/Old on Age with the rest untouched, and all identity."""
    ident = MaskingFunction.identity()
    return [
        MaskingConfiguration("cfg-young-old", (("Age", young_old()), ("Weight", ident),
                                               ("Zip", ident))),
        MaskingConfiguration("cfg-identity", (("Age", ident), ("Weight", ident), ("Zip", ident))),
    ]
