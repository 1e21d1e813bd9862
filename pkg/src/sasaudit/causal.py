"""Observational and backdoor-adjusted expectations over scored corpora.

The adjusted (interventional) expectation stratifies on the protected
attribute Z and reweights by its empirical marginal:

    E[Y | do(X = x)] = sum_z E[Y | X = x, Z = z] * P(z)

Expectations are computed in exact rational arithmetic, so on corpora where
word polarity and protected class are exactly independent the adjustment is
the identity bit-for-bit and the deconfounding impact is exactly zero.

A zero observational expectation with a nonzero adjusted one makes the
relative impact undefined; that is a value (rendered "X"), not an error, and
it ranks worse than any finite impact.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .corpus import Polarity
from .errors import DegenerateDataError
from .sas import ScoredRecord
from .stats import Attribute, _ATTRIBUTE_LABEL


class PsiKind(str, Enum):
    WRS = "wrs"
    DIE = "die"


@dataclass(frozen=True)
class PsiScore:
    """A system's bias score; ``value=None`` is the undefined sentinel."""

    kind: PsiKind
    value: Optional[float]

    @property
    def is_undefined(self) -> bool:
        return self.value is None

    @property
    def sort_key(self) -> tuple[int, float]:
        # Undefined sorts after every finite value.
        if self.value is None:
            return (1, 0.0)
        return (0, self.value)

    @property
    def display(self) -> str:
        if self.value is None:
            return "X"
        return format(self.value, "g")


def format_value(value: Optional[float], digits: int = 2) -> str:
    return "X" if value is None else f"{value:.{digits}f}"


@dataclass(frozen=True)
class StratifiedTable:
    """Per-(polarity, class) counts and means, plus the class marginal."""

    strata: Mapping[tuple[Polarity, str], tuple[int, Fraction]]
    marginal: Mapping[str, Fraction]

    @classmethod
    def build(
        cls, scored: Sequence[ScoredRecord], z_attribute: Attribute
    ) -> "StratifiedTable":
        if not scored:
            raise DegenerateDataError("no scored records to stratify")
        label_of = _ATTRIBUTE_LABEL[Attribute(z_attribute)]
        sums: dict[tuple[Polarity, str], Fraction] = {}
        counts: dict[tuple[Polarity, str], int] = {}
        z_counts: dict[str, int] = {}
        for item in scored:
            key = (item.record.emotion.polarity, label_of(item.record))
            sums[key] = sums.get(key, Fraction(0)) + Fraction(item.score)
            counts[key] = counts.get(key, 0) + 1
            z_counts[key[1]] = z_counts.get(key[1], 0) + 1
        total = len(scored)
        strata = {
            key: (counts[key], sums[key] / counts[key]) for key in sorted(counts)
        }
        marginal = {z: Fraction(n, total) for z, n in sorted(z_counts.items())}
        return cls(strata=strata, marginal=marginal)


def _polarity_scores(
    scored: Sequence[ScoredRecord], polarity: Polarity
) -> list[float]:
    return [item.score for item in scored if item.record.emotion.polarity is polarity]


def _exact_observational(
    scored: Sequence[ScoredRecord], polarity: Polarity
) -> Fraction:
    values = _polarity_scores(scored, polarity)
    if not values:
        raise DegenerateDataError(f"no records with polarity {polarity.value!r}")
    return sum((Fraction(v) for v in values), Fraction(0)) / len(values)


def observational_expectation(
    scored: Sequence[ScoredRecord], polarity: Polarity
) -> float:
    """Mean score over records whose emotion word has the given polarity."""
    return float(_exact_observational(scored, polarity))


def _exact_interventional(
    scored: Sequence[ScoredRecord], polarity: Polarity, z_attribute: Attribute
) -> Fraction:
    table = StratifiedTable.build(scored, z_attribute)
    total = Fraction(0)
    for z, p_z in table.marginal.items():
        if p_z == 0:  # pragma: no cover - empirical marginals are positive
            continue
        stratum = table.strata.get((polarity, z))
        if stratum is None:
            raise DegenerateDataError(
                f"empty stratum (x={polarity.value}, z={z}) with P(z) = {p_z} > 0"
            )
        _, mean = stratum
        total += mean * p_z
    return total


def interventional_expectation(
    scored: Sequence[ScoredRecord], polarity: Polarity, z_attribute: Attribute
) -> float:
    """Backdoor-adjusted mean score for the given word polarity."""
    return float(_exact_interventional(scored, polarity, z_attribute))


def die_percent(obs: float, intv: float) -> Optional[float]:
    """Relative deconfounding impact in percent; None when undefined."""
    obs_f, intv_f = Fraction(obs), Fraction(intv)
    if obs_f == 0:
        return None if intv_f != 0 else 0.0
    try:
        return float(abs(obs_f - intv_f) / abs(obs_f) * 100)
    except OverflowError:
        # Subnormal observational mean against a finite adjusted one: the
        # ratio is defined but beyond float range.
        return float("inf")


@dataclass(frozen=True)
class DieScore:
    """Per-polarity impact percentages and their maximum (None dominates)."""

    per_polarity: Mapping[Polarity, Optional[float]]
    max_value: Optional[float]

    @classmethod
    def build(cls, per_polarity: Mapping[Polarity, Optional[float]]) -> "DieScore":
        values = list(per_polarity.values())
        max_value = None if any(v is None for v in values) else max(values)
        return cls(per_polarity=dict(per_polarity), max_value=max_value)


def die_score(scored: Sequence[ScoredRecord], z_attribute: Attribute) -> DieScore:
    per_polarity: dict[Polarity, Optional[float]] = {}
    for polarity in (Polarity.NEGATIVE, Polarity.POSITIVE):
        obs = _exact_observational(scored, polarity)
        intv = _exact_interventional(scored, polarity, z_attribute)
        if obs == 0:
            per_polarity[polarity] = None if intv != 0 else 0.0
        else:
            per_polarity[polarity] = float(abs(obs - intv) / abs(obs) * 100)
    return DieScore.build(per_polarity)


def compute_die_score(
    scored_datasets: Sequence[Sequence[ScoredRecord]], z_attribute: Attribute
) -> PsiScore:
    """Worst per-dataset deconfounding impact; undefined dominates."""
    maxima = [die_score(dataset, z_attribute).max_value for dataset in scored_datasets]
    if not maxima:
        raise DegenerateDataError("no datasets to score")
    if any(m is None for m in maxima):
        return PsiScore(PsiKind.DIE, None)
    return PsiScore(PsiKind.DIE, max(maxima))


def ate(scored: Sequence[ScoredRecord]) -> float:
    """Mean score difference, positive-word minus negative-word records."""
    pos = _exact_observational(scored, Polarity.POSITIVE)
    neg = _exact_observational(scored, Polarity.NEGATIVE)
    return float(pos - neg)
