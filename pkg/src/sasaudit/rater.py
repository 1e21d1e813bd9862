"""Partial orders over bias scores and level-based ratings.

Systems are sorted by their bias score (rejection-weight sum for the balanced
groups, worst deconfounding impact for the confounded ones), the sorted finite
scores are split into L contiguous partitions, and the 1-based partition index
is the rating. Undefined scores are pinned to the worst level L and take no
part in the split. Equal scores always share the earliest rating among their
partitions, so ties can never straddle a level boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Sequence

from .causal import PsiKind, PsiScore, compute_die_score
from .errors import DegenerateDataError
from .sas import ScoredRecord
from .stats import (
    DEFAULT_CI_WEIGHTS,
    DEFAULT_EPSILON,
    Attribute,
    weighted_rejection_score,
)

DEFAULT_LEVELS = 3


class RatingGroup(str, Enum):
    G1 = "G1"
    G2 = "G2"
    G3_R = "G3_R"
    G3_G = "G3_G"
    G3_RG = "G3_RG"
    G4 = "G4"

    @property
    def source_group(self) -> str:
        return {"G1": "G1", "G2": "G2", "G3_R": "G3", "G3_G": "G3", "G3_RG": "G3", "G4": "G4"}[
            self.value
        ]

    @property
    def uses_rejection_score(self) -> bool:
        return self in (RatingGroup.G1, RatingGroup.G3_R, RatingGroup.G3_G, RatingGroup.G3_RG)

    @property
    def attribute(self) -> Attribute:
        return {
            RatingGroup.G1: Attribute.GENDER,
            RatingGroup.G2: Attribute.GENDER,
            RatingGroup.G3_R: Attribute.RACE,
            RatingGroup.G3_G: Attribute.GENDER,
            RatingGroup.G3_RG: Attribute.RG,
            RatingGroup.G4: Attribute.RG,
        }[self]


RATING_GROUPS = tuple(RatingGroup)


@dataclass(frozen=True)
class PartialOrder:
    group: RatingGroup
    entries: tuple[tuple[str, PsiScore], ...]

    @classmethod
    def from_psi_map(
        cls, psi: Mapping[str, PsiScore], group: RatingGroup
    ) -> "PartialOrder":
        ordered = sorted(psi.items(), key=lambda item: (*item[1].sort_key, item[0]))
        return cls(group=group, entries=tuple(ordered))


def create_partial_order(
    scored_by_sas: Mapping[str, Sequence[Sequence[ScoredRecord]]],
    group: RatingGroup,
    ci_weights: Sequence[tuple[int, float]] = DEFAULT_CI_WEIGHTS,
    epsilon: float = DEFAULT_EPSILON,
) -> PartialOrder:
    """Score every system on the group's datasets and sort ascending."""
    psi: dict[str, PsiScore] = {}
    for name, datasets in scored_by_sas.items():
        if not datasets:
            raise DegenerateDataError(f"no datasets for sas {name!r}")
        if group.uses_rejection_score:
            value = weighted_rejection_score(
                datasets, [group.attribute], ci_weights, epsilon
            )
            psi[name] = PsiScore(PsiKind.WRS, value)
        else:
            psi[name] = compute_die_score(datasets, group.attribute)
    return PartialOrder.from_psi_map(psi, group)


def assign_rating(po: PartialOrder, levels: int = DEFAULT_LEVELS) -> dict[str, int]:
    """Split the sorted finite scores into ``levels`` partitions and rate.

    Partition sizes follow the array-split rule: the first ``n mod levels``
    partitions hold ``ceil(n / levels)`` entries, the rest ``floor(n / levels)``.
    """
    if levels < 2:
        raise ValueError(f"levels must be >= 2, got {levels}")
    ratings: dict[str, int] = {}
    finite = [(name, psi.value) for name, psi in po.entries if not psi.is_undefined]
    for name, psi in po.entries:
        if psi.is_undefined:
            ratings[name] = levels

    n = len(finite)
    if n:
        base, remainder = divmod(n, levels)
        sizes = [base + 1] * remainder + [base] * (levels - remainder)
        first_rating: dict[float, int] = {}
        index = 0
        for partition, size in enumerate(sizes, start=1):
            for _ in range(size):
                value = finite[index][1]
                first_rating.setdefault(value, partition)
                index += 1
        for name, value in finite:
            ratings[name] = first_rating[value]
    return ratings


def single_sas_rating(psi: PsiScore, levels: int = DEFAULT_LEVELS) -> int:
    """Absolute rating for a lone system: 1 iff its score is exactly zero."""
    if psi.value == 0:
        return 1
    return levels


def overall_rating(group_ratings: Sequence[int], levels: int = DEFAULT_LEVELS) -> int:
    """Mean of the per-group ratings, rounded half away from zero."""
    if not group_ratings:
        raise ValueError("no group ratings to average")
    mean = sum(group_ratings) / len(group_ratings)
    rounded = math.floor(mean + 0.5)
    return min(max(rounded, 1), levels)


GENDER_SIDE = (RatingGroup.G1, RatingGroup.G2)
RACE_SIDE = (RatingGroup.G3_R, RatingGroup.G3_G, RatingGroup.G3_RG, RatingGroup.G4)


def prominence_note(per_group: Mapping[RatingGroup, int]) -> Optional[str]:
    """Compare gender-side and race-side ratings; None if a group is missing."""
    if any(group not in per_group for group in GENDER_SIDE + RACE_SIDE):
        return None
    gender = sum(per_group[g] for g in GENDER_SIDE) / len(GENDER_SIDE)
    race = sum(per_group[g] for g in RACE_SIDE) / len(RACE_SIDE)
    if gender > race:
        return "gender-prominent"
    if gender < race:
        return "race-prominent"
    return "balanced"


@dataclass
class RatingReport:
    levels: int
    orders: dict[RatingGroup, PartialOrder]
    per_group: dict[RatingGroup, dict[str, int]]
    overall: dict[str, int]
    prominence: dict[str, Optional[str]]
    warnings: list[str] = field(default_factory=list)


def build_report(
    orders: Mapping[RatingGroup, PartialOrder], levels: int = DEFAULT_LEVELS
) -> RatingReport:
    """Assemble per-group and overall ratings from the group partial orders."""
    per_group: dict[RatingGroup, dict[str, int]] = {}
    warnings = []
    for group in RATING_GROUPS:
        if group not in orders:
            warnings.append(f"group {group.value} missing; column omitted")
            continue
        po = orders[group]
        if len(po.entries) == 1:
            name, psi = po.entries[0]
            per_group[group] = {name: single_sas_rating(psi, levels)}
        else:
            per_group[group] = assign_rating(po, levels)

    names = sorted({name for ratings in per_group.values() for name in ratings})
    overall = {}
    for name in names:
        present = [ratings[name] for ratings in per_group.values() if name in ratings]
        overall[name] = overall_rating(present, levels)
        if len(present) < len(per_group):
            warnings.append(
                f"sas {name!r} missing from some groups; overall averages "
                f"{len(present)} of {len(per_group)} group ratings"
            )
    prominence = {
        name: prominence_note(
            {group: ratings[name] for group, ratings in per_group.items() if name in ratings}
        )
        for name in names
    }
    for name, note in prominence.items():
        if note is None:
            warnings.append(f"sas {name!r}: prominence note needs all groups; omitted")
    return RatingReport(
        levels=levels,
        orders=dict(orders),
        per_group=per_group,
        overall=overall,
        prominence=prominence,
        warnings=warnings,
    )
