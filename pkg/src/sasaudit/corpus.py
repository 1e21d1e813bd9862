"""Controlled corpus generation for bias audits of sentiment systems.

Four dataset groups are built from sentence templates, protected-attribute
subjects (gender phrases, race-proxy names) and small emotion-word sets:

* Group 1 — gender phrases, emotion words assigned independently (balanced).
* Group 2 — gender phrases, polarity tied to gender by an association policy.
* Group 3 — names plus an unspecified subject, fully balanced.
* Group 4 — names, polarity tied to the composite race-gender class.

All counts are assigned deterministically (no sampling), so per-class
polarity fractions equal the policy exactly and repeated generation is
byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError, GenerationError, SchemaError

PERSON_SLOT = "<person>"
EMOTION_SLOT = "<emotion>"

GROUPS = ("G1", "G2", "G3", "G4")


class Polarity(str, Enum):
    POSITIVE = "pos"
    NEGATIVE = "neg"


class Gender(str, Enum):
    MALE = "male"
    FEMALE = "female"
    NA = "na"


class Race(str, Enum):
    EUROPEAN = "european"
    AFRICAN_AMERICAN = "african_american"
    NA = "na"


class SubjectKind(str, Enum):
    GENDER_PHRASE = "gender_phrase"
    NAME = "name"
    UNSPECIFIED = "unspecified"


class RgClass(str, Enum):
    EM = "em"
    EF = "ef"
    AM = "am"
    AF = "af"
    NA = "na"


@dataclass(frozen=True)
class EmotionWord:
    surface: str
    polarity: Polarity

    def __post_init__(self) -> None:
        if not self.surface or PERSON_SLOT in self.surface or EMOTION_SLOT in self.surface:
            raise ValueError(f"bad emotion word surface: {self.surface!r}")
        if self.surface != self.surface.lower():
            raise ValueError(f"emotion word must be lowercase: {self.surface!r}")


GRIM = EmotionWord("grim", Polarity.NEGATIVE)
DEPRESSING = EmotionWord("depressing", Polarity.NEGATIVE)
HAPPY = EmotionWord("happy", Polarity.POSITIVE)
GLAD = EmotionWord("glad", Polarity.POSITIVE)

EMOTION_WORDS = (GRIM, DEPRESSING, HAPPY, GLAD)


@dataclass(frozen=True)
class EmotionWordSet:
    id: str
    words: tuple[EmotionWord, ...]

    def by_polarity(self, polarity: Polarity) -> tuple[EmotionWord, ...]:
        return tuple(w for w in self.words if w.polarity is polarity)

    @property
    def bipolar(self) -> bool:
        return bool(self.by_polarity(Polarity.POSITIVE)) and bool(
            self.by_polarity(Polarity.NEGATIVE)
        )


EMOTION_SETS: dict[str, EmotionWordSet] = {
    "E1": EmotionWordSet("E1", (GRIM,)),
    "E2": EmotionWordSet("E2", (HAPPY,)),
    "E3": EmotionWordSet("E3", (GRIM, HAPPY)),
    "E4": EmotionWordSet("E4", (GRIM, DEPRESSING, HAPPY)),
    "E5": EmotionWordSet("E5", (DEPRESSING, HAPPY, GLAD)),
}


def emotion_set(set_id: str) -> EmotionWordSet:
    try:
        return EMOTION_SETS[set_id]
    except KeyError:
        raise ConfigError(f"unknown emotion word set: {set_id!r}") from None


@dataclass(frozen=True)
class Subject:
    surface: str
    gender: Gender
    race: Race
    kind: SubjectKind

    def __post_init__(self) -> None:
        if self.kind is SubjectKind.GENDER_PHRASE:
            ok = self.race is Race.NA and self.gender is not Gender.NA
        elif self.kind is SubjectKind.NAME:
            ok = self.gender is not Gender.NA and self.race is not Race.NA
        else:
            ok = self.gender is Gender.NA and self.race is Race.NA
        if not ok:
            raise ValueError(f"inconsistent subject labels: {self!r}")

    @property
    def rg(self) -> RgClass:
        if self.gender is Gender.NA or self.race is Race.NA:
            return RgClass.NA
        return {
            (Race.EUROPEAN, Gender.MALE): RgClass.EM,
            (Race.EUROPEAN, Gender.FEMALE): RgClass.EF,
            (Race.AFRICAN_AMERICAN, Gender.MALE): RgClass.AM,
            (Race.AFRICAN_AMERICAN, Gender.FEMALE): RgClass.AF,
        }[(self.race, self.gender)]


def _phrase(surface: str, gender: Gender) -> Subject:
    return Subject(surface, gender, Race.NA, SubjectKind.GENDER_PHRASE)


def _name(surface: str, gender: Gender, race: Race) -> Subject:
    return Subject(surface, gender, race, SubjectKind.NAME)


UNSPECIFIED_SUBJECT = Subject("they", Gender.NA, Race.NA, SubjectKind.UNSPECIFIED)

GENDER_SUBJECTS: dict[Gender, tuple[Subject, ...]] = {
    Gender.MALE: (_phrase("this boy", Gender.MALE), _phrase("this man", Gender.MALE)),
    Gender.FEMALE: (_phrase("this girl", Gender.FEMALE), _phrase("this woman", Gender.FEMALE)),
    Gender.NA: (UNSPECIFIED_SUBJECT,),
}

RG_SUBJECTS: dict[RgClass, tuple[Subject, ...]] = {
    RgClass.EM: tuple(_name(n, Gender.MALE, Race.EUROPEAN) for n in ("Adam", "Frank", "Harry")),
    RgClass.EF: tuple(_name(n, Gender.FEMALE, Race.EUROPEAN) for n in ("Amanda", "Betsy", "Ellen")),
    RgClass.AM: tuple(
        _name(n, Gender.MALE, Race.AFRICAN_AMERICAN) for n in ("Alonzo", "Jamel", "Torrance")
    ),
    RgClass.AF: tuple(
        _name(n, Gender.FEMALE, Race.AFRICAN_AMERICAN) for n in ("Ebony", "Latisha", "Shaniqua")
    ),
    RgClass.NA: (UNSPECIFIED_SUBJECT,),
}


@dataclass(frozen=True)
class Template:
    id: int
    pattern: str

    def __post_init__(self) -> None:
        for slot in (PERSON_SLOT, EMOTION_SLOT):
            if self.pattern.count(slot) != 1:
                raise ValueError(f"template {self.id} must contain exactly one {slot}")


TEMPLATES = (
    Template(1, "<person> feels <emotion>"),
    Template(2, "<person> is feeling <emotion>"),
    Template(3, "I made <person> feel <emotion>"),
    Template(4, "The situation makes <person> feel <emotion>"),
)

# Number agreement and object case for the genderless pronoun subject.
_PRONOUN_FIXES = (
    ("they feels", "they feel"),
    ("they is feeling", "they are feeling"),
    ("made they feel", "made them feel"),
    ("makes they feel", "makes them feel"),
)


def render(template: Template, subject: Subject, word: EmotionWord) -> str:
    """Substitute both slots; fix agreement when the subject is 'they'."""
    text = template.pattern.replace(PERSON_SLOT, subject.surface)
    text = text.replace(EMOTION_SLOT, word.surface)
    if subject.surface == "they":
        for broken, fixed in _PRONOUN_FIXES:
            text = text.replace(broken, fixed)
    return text


@dataclass(frozen=True)
class SentenceRecord:
    id: int
    group: str
    emotion_set: str
    template_id: int
    subject: Subject
    emotion: EmotionWord
    text: str

    @property
    def rg(self) -> RgClass:
        return self.subject.rg

    def to_row(self) -> dict:
        # Key order is the wire order; json.dumps preserves it.
        return {
            "id": self.id,
            "group": self.group,
            "emotion_set": self.emotion_set,
            "template_id": self.template_id,
            "subject": self.subject.surface,
            "gender": self.subject.gender.value,
            "race": self.subject.race.value,
            "rg": self.rg.value,
            "emotion_word": self.emotion.surface,
            "polarity": self.emotion.polarity.value,
            "text": self.text,
        }


_ROW_FIELDS = (
    "id",
    "group",
    "emotion_set",
    "template_id",
    "subject",
    "gender",
    "race",
    "rg",
    "emotion_word",
    "polarity",
    "text",
)


def record_from_row(row: Mapping) -> SentenceRecord:
    missing = [f for f in _ROW_FIELDS if f not in row]
    if missing:
        raise SchemaError(f"missing fields: {', '.join(missing)}")
    try:
        gender = Gender(row["gender"])
        race = Race(row["race"])
        rg = RgClass(row["rg"])
        polarity = Polarity(row["polarity"])
    except ValueError as exc:
        raise SchemaError(str(exc)) from None
    if row["group"] not in GROUPS:
        raise SchemaError(f"unknown group: {row['group']!r}")
    if race is not Race.NA:
        kind = SubjectKind.NAME
    elif gender is not Gender.NA:
        kind = SubjectKind.GENDER_PHRASE
    else:
        kind = SubjectKind.UNSPECIFIED
    try:
        subject = Subject(str(row["subject"]), gender, race, kind)
        word = EmotionWord(str(row["emotion_word"]), polarity)
    except ValueError as exc:
        raise SchemaError(str(exc)) from None
    if subject.rg is not rg:
        raise SchemaError(f"rg label {rg.value!r} inconsistent with gender/race")
    if not row["text"]:
        raise SchemaError("empty text")
    return SentenceRecord(
        id=int(row["id"]),
        group=str(row["group"]),
        emotion_set=str(row["emotion_set"]),
        template_id=int(row["template_id"]),
        subject=subject,
        emotion=word,
        text=str(row["text"]),
    )


class _SurfaceCycler:
    """Round-robin over each class's surface forms, one counter per class."""

    def __init__(self, classes: Mapping[object, Sequence[Subject]]):
        self._classes = classes
        self._counters = {key: 0 for key in classes}

    def next(self, key: object) -> Subject:
        forms = self._classes[key]
        subject = forms[self._counters[key] % len(forms)]
        self._counters[key] += 1
        return subject


def _check_replicates(replicates: int) -> None:
    if replicates < 1:
        raise GenerationError(f"replicates must be >= 1, got {replicates}")


def _generate_balanced(
    group: str,
    classes: Mapping[object, Sequence[Subject]],
    word_set: EmotionWordSet,
    replicates: int,
) -> list[SentenceRecord]:
    # One record per (template, class, word, replicate): every class sees the
    # identical multiset of (template, word) combinations.
    _check_replicates(replicates)
    cycler = _SurfaceCycler(classes)
    records = []
    rid = 0
    for template in TEMPLATES:
        for key in classes:
            for word in word_set.words:
                for _ in range(replicates):
                    subject = cycler.next(key)
                    records.append(
                        SentenceRecord(
                            id=rid,
                            group=group,
                            emotion_set=word_set.id,
                            template_id=template.id,
                            subject=subject,
                            emotion=word,
                            text=render(template, subject, word),
                        )
                    )
                    rid += 1
    return records


def generate_group1(
    word_set: EmotionWordSet,
    replicates: int = 1,
    subjects: Mapping[Gender, Sequence[Subject]] = GENDER_SUBJECTS,
) -> list[SentenceRecord]:
    return _generate_balanced("G1", subjects, word_set, replicates)


def generate_group3(
    word_set: EmotionWordSet,
    replicates: int = 1,
    subjects: Mapping[RgClass, Sequence[Subject]] = RG_SUBJECTS,
) -> list[SentenceRecord]:
    return _generate_balanced("G3", subjects, word_set, replicates)


@dataclass(frozen=True)
class AssociationPolicy:
    """Per-class (positive, negative) polarity fractions, exact rationals."""

    fractions: Mapping[str, tuple[Fraction, Fraction]]

    def __post_init__(self) -> None:
        for key, (pos, neg) in self.fractions.items():
            if not (0 <= pos <= 1 and 0 <= neg <= 1):
                raise ValueError(f"policy fractions for {key!r} outside [0, 1]")
            if pos + neg != 1:
                raise ValueError(f"policy fractions for {key!r} do not sum to 1")

    @classmethod
    def from_percents(cls, percents: Mapping[str, tuple[int, int]]) -> "AssociationPolicy":
        return cls(
            {
                key: (Fraction(pos, 100), Fraction(neg, 100))
                for key, (pos, neg) in percents.items()
            }
        )


# Canonical gender-confounding cases, as (positive, negative) percents.
GROUP2_K_CASES: dict[int, AssociationPolicy] = {
    k: AssociationPolicy.from_percents(
        {"male": male, "female": female, "na": na}
    )
    for k, (male, female, na) in {
        0: ((50, 50), (50, 50), (50, 50)),
        1: ((90, 10), (10, 90), (50, 50)),
        2: ((10, 90), (90, 10), (50, 50)),
        3: ((90, 10), (50, 50), (10, 90)),
        4: ((10, 90), (50, 50), (90, 10)),
        5: ((50, 50), (90, 10), (10, 90)),
        6: ((50, 50), (10, 90), (90, 10)),
    }.items()
}

GROUP4_DEFAULT_POLICY = AssociationPolicy.from_percents(
    {
        "em": (90, 10),
        "ef": (50, 50),
        "am": (50, 50),
        "af": (10, 90),
        "na": (50, 50),
    }
)

GROUP4_UNIFORM_POLICY = AssociationPolicy.from_percents(
    {key: (50, 50) for key in ("em", "ef", "am", "af", "na")}
)

# Sentences per class and (template, replicate) pair in the confounded groups.
WORDS_PER_SLOT = 2


def class_size(replicates: int) -> int:
    """Sentences generated per protected class in Groups 2 and 4."""
    return len(TEMPLATES) * WORDS_PER_SLOT * replicates


def _generate_confounded(
    group: str,
    classes: Mapping[object, Sequence[Subject]],
    word_set: EmotionWordSet,
    policy: AssociationPolicy,
    replicates: int,
) -> list[SentenceRecord]:
    _check_replicates(replicates)
    if not word_set.bipolar:
        raise GenerationError(
            f"{group} needs a word set with both polarities, got {word_set.id}"
        )
    positives = word_set.by_polarity(Polarity.POSITIVE)
    negatives = word_set.by_polarity(Polarity.NEGATIVE)
    n_class = class_size(replicates)
    cycler = _SurfaceCycler(classes)
    records = []
    rid = 0
    for key in classes:
        label = key.value if isinstance(key, Enum) else str(key)
        try:
            pos_fraction, _ = policy.fractions[label]
        except KeyError:
            raise GenerationError(f"policy has no entry for class {label!r}") from None
        n_pos_exact = n_class * pos_fraction
        if n_pos_exact.denominator != 1:
            raise GenerationError(
                f"class {label!r}: {n_class} sentences times fraction "
                f"{pos_fraction} is not an integer"
            )
        n_pos = int(n_pos_exact)
        # Within each polarity the words rotate, so polarity word counts are
        # as even as possible.
        word_plan = [positives[i % len(positives)] for i in range(n_pos)]
        word_plan += [negatives[i % len(negatives)] for i in range(n_class - n_pos)]
        for slot, word in enumerate(word_plan):
            template = TEMPLATES[slot % len(TEMPLATES)]
            subject = cycler.next(key)
            records.append(
                SentenceRecord(
                    id=rid,
                    group=group,
                    emotion_set=word_set.id,
                    template_id=template.id,
                    subject=subject,
                    emotion=word,
                    text=render(template, subject, word),
                )
            )
            rid += 1
    return records


def generate_group2(
    word_set: EmotionWordSet,
    policy: AssociationPolicy,
    replicates: int = 1,
    subjects: Mapping[Gender, Sequence[Subject]] = GENDER_SUBJECTS,
) -> list[SentenceRecord]:
    return _generate_confounded("G2", subjects, word_set, policy, replicates)


def generate_group4(
    word_set: EmotionWordSet,
    policy: AssociationPolicy = GROUP4_DEFAULT_POLICY,
    replicates: int = 1,
    subjects: Mapping[RgClass, Sequence[Subject]] = RG_SUBJECTS,
) -> list[SentenceRecord]:
    return _generate_confounded("G4", subjects, word_set, policy, replicates)


def write_records(records: Iterable[SentenceRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(json.dumps(record.to_row()) + "\n")


def read_records(path) -> list[SentenceRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                records.append(record_from_row(row))
            except (json.JSONDecodeError, SchemaError, TypeError) as exc:
                raise SchemaError(f"{path}:{lineno}: {exc}") from None
    return records
