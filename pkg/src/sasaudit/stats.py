"""Two-sample t statistics and the confidence-weighted rejection score.

The t statistic uses separate sample variances with a small epsilon added to
the denominator so that zero-variance pairs stay finite:

    t = |mean(a) - mean(b)| / (sqrt(s_a^2/n_a + s_b^2/n_b) + epsilon)

Means, variances and the Welch-Satterthwaite degrees of freedom are computed
in exact rational arithmetic; only the square root and the final division
happen in floating point. That makes the documented shift/scale invariances
exact instead of approximate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

import scipy.stats

from .corpus import Polarity  # noqa: F401  (re-exported for callers building tables)
from .errors import DegenerateDataError
from .sas import ScoredRecord

DEFAULT_EPSILON = 1e-4
DEFAULT_CI_WEIGHTS: tuple[tuple[int, float], ...] = ((95, 1.0), (70, 0.8), (60, 0.6))
DEFAULT_CI_LEVELS = tuple(ci for ci, _ in DEFAULT_CI_WEIGHTS)

# Above this the statistic is reported with the "high" display label.
HIGH_T_THRESHOLD = 1000.0


class Attribute(str, Enum):
    GENDER = "gender"
    RACE = "race"
    RG = "rg"


@dataclass(frozen=True)
class Sample:
    values: tuple[float, ...]
    label: str

    def __post_init__(self) -> None:
        if len(self.values) < 2:
            raise DegenerateDataError(
                f"sample {self.label!r} too small ({len(self.values)} < 2)"
            )


@dataclass(frozen=True)
class TTestResult:
    t_abs: float
    dof: float
    rejected_at: frozenset[int]

    @property
    def display(self) -> str:
        return "H" if self.t_abs > HIGH_T_THRESHOLD else f"{self.t_abs:.2f}"


def _exact_mean_var(values: Sequence[float]) -> tuple[Fraction, Fraction]:
    n = len(values)
    total = Fraction(0)
    total_sq = Fraction(0)
    for v in values:
        f = Fraction(v)
        total += f
        total_sq += f * f
    mean = total / n
    var = (n * total_sq - total * total) / (n * (n - 1))
    return mean, var


def critical_t(ci: float, dof: float) -> float:
    """Two-tailed critical value; dof floors to the nearest integer entry."""
    if not 0 < ci < 100:
        raise ValueError(f"unsupported confidence interval: {ci}")
    if dof < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {dof}")
    quantile = 1 - (1 - ci / 100) / 2
    return float(scipy.stats.t.ppf(quantile, math.floor(dof)))


def welch_t(
    a: Sample,
    b: Sample,
    epsilon: float = DEFAULT_EPSILON,
    ci_levels: Sequence[int] = DEFAULT_CI_LEVELS,
) -> TTestResult:
    """Two-sided test of equal means against every confidence level at once."""
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    mean_a, var_a = _exact_mean_var(a.values)
    mean_b, var_b = _exact_mean_var(b.values)
    n_a, n_b = len(a.values), len(b.values)
    delta = abs(mean_a - mean_b)
    radicand = var_a / n_a + var_b / n_b

    denom = math.sqrt(float(radicand)) + epsilon
    if denom == 0.0:
        t_abs = 0.0 if delta == 0 else math.inf
    else:
        t_abs = float(delta) / denom

    if radicand == 0:
        dof = float(max(n_a + n_b - 2, 1))
    else:
        # Welch-Satterthwaite, exact until the final float conversion.
        dof_exact = radicand * radicand / (
            (var_a / n_a) ** 2 / (n_a - 1) + (var_b / n_b) ** 2 / (n_b - 1)
        )
        dof = max(float(dof_exact), 1.0)

    rejected = frozenset(ci for ci in ci_levels if t_abs > critical_t(ci, dof))
    return TTestResult(t_abs=t_abs, dof=dof, rejected_at=rejected)


_ATTRIBUTE_LABEL = {
    Attribute.GENDER: lambda record: record.subject.gender.value,
    Attribute.RACE: lambda record: record.subject.race.value,
    Attribute.RG: lambda record: record.rg.value,
}


def class_samples(
    scored: Sequence[ScoredRecord], attribute: Attribute
) -> tuple[dict[str, Sample], tuple[str, ...]]:
    """Partition scores by protected-class label.

    Returns the usable samples plus the labels omitted for having fewer than
    two records.
    """
    if not scored:
        raise DegenerateDataError("no scored records to partition")
    label_of = _ATTRIBUTE_LABEL[Attribute(attribute)]
    buckets: dict[str, list[float]] = {}
    for item in scored:
        buckets.setdefault(label_of(item.record), []).append(item.score)
    samples = {}
    omitted = []
    for label in sorted(buckets):
        values = buckets[label]
        if len(values) < 2:
            omitted.append(label)
        else:
            samples[label] = Sample(tuple(values), label)
    return samples, tuple(omitted)


def pair_tests(
    scored: Sequence[ScoredRecord],
    attribute: Attribute,
    epsilon: float = DEFAULT_EPSILON,
    ci_levels: Sequence[int] = DEFAULT_CI_LEVELS,
) -> dict[tuple[str, str], TTestResult]:
    """Run the t test for every unordered pair of class labels."""
    samples, _ = class_samples(scored, attribute)
    return {
        (one, other): welch_t(samples[one], samples[other], epsilon, ci_levels)
        for one, other in combinations(sorted(samples), 2)
    }


def weighted_rejection_score(
    scored_datasets: Sequence[Sequence[ScoredRecord]],
    attributes: Sequence[Attribute],
    ci_weights: Mapping[int, float] | Sequence[tuple[int, float]] = DEFAULT_CI_WEIGHTS,
    epsilon: float = DEFAULT_EPSILON,
) -> float:
    """Sum, over datasets, attributes and class pairs, the weights of every
    confidence level at which the equal-means hypothesis is rejected.

    The accumulation is order-independent, so the nesting order of the loops
    does not matter.
    """
    weights = dict(ci_weights)
    psi = 0.0
    for dataset in scored_datasets:
        for attribute in attributes:
            for result in pair_tests(
                dataset, attribute, epsilon, tuple(weights)
            ).values():
                for ci in result.rejected_at:
                    psi += weights[ci]
    return psi
