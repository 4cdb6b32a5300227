"""Probability vectors over graph vertices.

Masses are kept as given: ``Fraction`` inputs stay exact through
:func:`mixture` and the kernel construction, floats stay floats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import (
    EmptyLowMassSet,
    InvalidDistribution,
    InvalidK,
    LabelMismatch,
    UnknownLabel,
)

Mass = Union[float, Fraction]

SUM_TOL = 1e-12
ZERO_SNAP = 1e-15


def _coerce(x) -> Mass:
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except ValueError as exc:
            raise InvalidDistribution(f"cannot parse mass {x!r}") from exc
    if isinstance(x, Rational):
        return Fraction(x)
    x = float(x)
    if not math.isfinite(x):
        raise InvalidDistribution(f"non-finite mass {x!r}")
    return 0.0 if abs(x) < ZERO_SNAP else x


@dataclass(frozen=True)
class Distribution:
    labels: tuple[str, ...]
    mass: tuple[Mass, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.mass):
            raise InvalidDistribution(
                f"{len(self.mass)} masses for {len(self.labels)} labels")
        if not self.labels:
            raise InvalidDistribution("empty distribution")
        if any(m < 0 for m in self.mass):
            raise InvalidDistribution("negative mass")
        if abs(float(sum(self.mass)) - 1.0) > SUM_TOL:
            raise InvalidDistribution(f"masses sum to {float(sum(self.mass))!r}")

    @classmethod
    def from_values(cls, labels: Sequence[str], mass: Sequence) -> "Distribution":
        return cls(tuple(str(x) for x in labels), tuple(_coerce(m) for m in mass))

    @classmethod
    def from_mapping(cls, labels: Sequence[str], mass: Mapping[str, object]) -> "Distribution":
        extra = set(mass) - set(labels)
        if extra:
            raise UnknownLabel(f"masses given for unknown labels {sorted(extra)}")
        return cls.from_values(labels, [mass.get(lab, 0) for lab in labels])

    @classmethod
    def uniform(cls, labels: Sequence[str], exact: bool = False) -> "Distribution":
        n = len(labels)
        w = Fraction(1, n) if exact else 1.0 / n
        return cls(tuple(labels), (w,) * n)

    @classmethod
    def dirac(cls, labels: Sequence[str], atom: str) -> "Distribution":
        if atom not in labels:
            raise UnknownLabel(f"{atom!r} is not a label")
        return cls(tuple(labels), tuple(Fraction(int(lab == atom)) for lab in labels))

    @cached_property
    def index(self) -> dict[str, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    @property
    def exact(self) -> bool:
        return all(isinstance(m, Fraction) for m in self.mass)

    @cached_property
    def array(self) -> np.ndarray:
        return np.array([float(m) for m in self.mass])

    def __getitem__(self, label: str) -> Mass:
        return self.mass[self.index[label]]

    def restrict(self, labels: Sequence[str]) -> "Distribution":
        """Restriction to ``labels``; all mass must already live there."""
        keep = set(labels)
        missing = keep - set(self.labels)
        if missing:
            raise UnknownLabel(f"unknown labels {sorted(missing)}")
        if any(m > 0 for lab, m in zip(self.labels, self.mass) if lab not in keep):
            raise InvalidDistribution("restriction would drop positive mass")
        ordered = [lab for lab in self.labels if lab in keep]
        return Distribution(tuple(ordered), tuple(self[lab] for lab in ordered))

    def extend(self, labels: Sequence[str]) -> "Distribution":
        """Zero-padded copy over a superset of the labels, in ``labels`` order."""
        if not set(self.labels) <= set(labels):
            raise LabelMismatch("extension must contain every current label")
        zero = Fraction(0) if self.exact else 0.0
        return Distribution(tuple(labels), tuple(
            self.mass[self.index[lab]] if lab in self.index else zero for lab in labels))

    def to_json(self) -> dict:
        return {"labels": list(self.labels),
                "mass": [str(m) if isinstance(m, Fraction) else float(m) for m in self.mass]}

    @classmethod
    def from_json(cls, obj: dict) -> "Distribution":
        return cls.from_values(obj["labels"], obj["mass"])


def support(d: Distribution) -> set[str]:
    return {lab for lab, m in zip(d.labels, d.mass) if m > 0}


def support_list(d: Distribution) -> list[str]:
    """Support in label order."""
    return [lab for lab, m in zip(d.labels, d.mass) if m > 0]


def tv_distance(d1: Distribution, d2: Distribution) -> Mass:
    if d1.labels != d2.labels:
        raise LabelMismatch("distributions live on different label lists")
    half = Fraction(1, 2) if d1.exact and d2.exact else 0.5
    return half * sum(abs(a - b) for a, b in zip(d1.mass, d2.mass))


def tv_array(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(a) - np.asarray(b)).sum())


def kbar(d: Distribution) -> int:
    """Smallest integer at least the reciprocal of the smallest positive mass."""
    positive = [m for m in d.mass if m > 0]
    if not positive:
        raise InvalidDistribution("no positive mass")
    m = min(positive)
    if isinstance(m, Fraction):
        return math.ceil(1 / m)
    r = 1.0 / m
    # 1/(1/3) and friends land a hair above an integer
    if abs(r - round(r)) <= 1e-9 * r:
        return int(round(r))
    return math.ceil(r)


def low_mass_set(d: Distribution, k: int) -> set[str]:
    if k < 2:
        raise InvalidK(f"k must be >= 2, got {k}")
    thr = Fraction(1, k) if d.exact else 1.0 / k
    return {lab for lab, m in zip(d.labels, d.mass) if m < thr}


def mixture(d: Distribution, k: int) -> Distribution:
    """(1/k)·uniform(A_k) + ((k-1)/k)·d where A_k holds masses below 1/k."""
    low = low_mass_set(d, k)
    if not low:
        raise EmptyLowMassSet(f"no state has mass below 1/{k}")
    if d.exact:
        spread, keep = Fraction(1, k * len(low)), Fraction(k - 1, k)
    else:
        spread, keep = 1.0 / (k * len(low)), (k - 1) / k
    mass = tuple(keep * m + (spread if lab in low else 0)
                 for lab, m in zip(d.labels, d.mass))
    return Distribution(d.labels, mass)
