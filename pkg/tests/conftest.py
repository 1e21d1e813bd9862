import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sasaudit import corpus, sas


@pytest.fixture(scope="session")
def e3():
    return corpus.emotion_set("E3")


def make_record(
    rid: int,
    subject: corpus.Subject,
    word: corpus.EmotionWord,
    group: str = "G2",
    set_id: str = "E3",
) -> corpus.SentenceRecord:
    template = corpus.TEMPLATES[rid % len(corpus.TEMPLATES)]
    return corpus.SentenceRecord(
        id=rid,
        group=group,
        emotion_set=set_id,
        template_id=template.id,
        subject=subject,
        emotion=word,
        text=corpus.render(template, subject, word),
    )


MALE = corpus.GENDER_SUBJECTS[corpus.Gender.MALE][0]
FEMALE = corpus.GENDER_SUBJECTS[corpus.Gender.FEMALE][0]
NA_SUBJECT = corpus.UNSPECIFIED_SUBJECT


def scored_corpus(plan) -> list[sas.ScoredRecord]:
    """Build a scored corpus from (subject, word, score) triples."""
    return [
        sas.ScoredRecord(make_record(i, subject, word), float(value))
        for i, (subject, word, value) in enumerate(plan)
    ]


def eight_record_corpus() -> list[sas.ScoredRecord]:
    """Confounded toy corpus: male 3 pos + 1 neg, female 1 pos + 3 neg,
    scored by gender alone (male -1, female +1).

    Hand enumeration: E[Y|pos] = (3*(-1) + 1) / 4 = -0.5,
    E[Y|neg] = (-1 + 3) / 4 = +0.5, and with P(m) = P(f) = 1/2 both
    adjusted expectations are (-1 + 1) / 2 = 0.
    """
    plan = [
        (MALE, corpus.HAPPY, -1),
        (MALE, corpus.HAPPY, -1),
        (MALE, corpus.HAPPY, -1),
        (MALE, corpus.GRIM, -1),
        (FEMALE, corpus.HAPPY, 1),
        (FEMALE, corpus.GRIM, 1),
        (FEMALE, corpus.GRIM, 1),
        (FEMALE, corpus.GRIM, 1),
    ]
    return scored_corpus(plan)
