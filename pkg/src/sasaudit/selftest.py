"""Built-in oracle checks runnable without a config (``sasaudit selftest``).

Each check compares pipeline output against values derived by hand or from
standard statistical tables; one line is printed per check.
"""

from __future__ import annotations

import math

from . import causal, corpus, rater, sas, stats
from .causal import PsiKind, PsiScore


def _record(rid: int, subject: corpus.Subject, word: corpus.EmotionWord) -> corpus.SentenceRecord:
    template = corpus.TEMPLATES[0]
    return corpus.SentenceRecord(
        id=rid,
        group="G2",
        emotion_set="E3",
        template_id=template.id,
        subject=subject,
        emotion=word,
        text=corpus.render(template, subject, word),
    )


def _eight_record_corpus() -> list[sas.ScoredRecord]:
    """Hand-enumerated confounded corpus: 3+1 words per male, mirrored for female."""
    male = corpus.GENDER_SUBJECTS[corpus.Gender.MALE][0]
    female = corpus.GENDER_SUBJECTS[corpus.Gender.FEMALE][0]
    plan = [
        (male, corpus.HAPPY),
        (male, corpus.HAPPY),
        (male, corpus.HAPPY),
        (male, corpus.GRIM),
        (female, corpus.HAPPY),
        (female, corpus.GRIM),
        (female, corpus.GRIM),
        (female, corpus.GRIM),
    ]
    records = [_record(i, subject, word) for i, (subject, word) in enumerate(plan)]
    return [sas.ScoredRecord(r, sas.score_biased_female(r)) for r in records]


def _checks():
    yield "pronoun agreement", lambda: (
        corpus.render(corpus.TEMPLATES[1], corpus.UNSPECIFIED_SUBJECT, corpus.GLAD)
        == "they are feeling glad"
        and corpus.render(corpus.TEMPLATES[2], corpus.UNSPECIFIED_SUBJECT, corpus.GRIM)
        == "I made them feel grim"
    )

    def balanced_cells():
        records = corpus.generate_group1(corpus.emotion_set("E3"), replicates=1)
        cells: dict[tuple, int] = {}
        for r in records:
            cells[(r.subject.gender, r.emotion.surface)] = (
                cells.get((r.subject.gender, r.emotion.surface), 0) + 1
            )
        return len(records) == 24 and set(cells.values()) == {4}

    yield "balanced generation (24 records, equal cells)", balanced_cells

    def policy_counts():
        records = corpus.generate_group2(
            corpus.emotion_set("E3"), corpus.GROUP2_K_CASES[1], replicates=5
        )
        male = [r for r in records if r.subject.gender is corpus.Gender.MALE]
        happy = sum(1 for r in male if r.emotion.surface == "happy")
        return len(male) == 40 and happy == 36

    yield "exact policy counts (36 happy of 40 male)", policy_counts

    yield "discretization thresholds", lambda: (
        sas.discretize(0.8, 0.33) == 1.0
        and sas.discretize(-0.4, 0.33) == -1.0
        and sas.discretize(-0.33, 0.33) == 0.0
    )

    def zero_variance_t():
        a = stats.Sample((-1.0,) * 20, "a")
        b = stats.Sample((1.0,) * 20, "b")
        result = stats.welch_t(a, b, epsilon=1e-4)
        return math.isclose(result.t_abs, 2.0 / 1e-4) and result.rejected_at == {95, 70, 60}

    yield "zero-variance t equals delta/epsilon", zero_variance_t

    yield "critical values match the t table", lambda: (
        abs(stats.critical_t(95, 10) - 2.228) < 1e-3
        and abs(stats.critical_t(60, 10) - 0.879) < 1e-3
        and abs(stats.critical_t(95, 10_000_000) - 1.960) < 1e-3
    )

    def deconfounding_spot():
        die_neg = causal.die_percent(-0.20, -0.10)
        die_pos = causal.die_percent(-0.55, 0.03)
        return (
            abs(die_neg - 50.0) < 0.1
            and abs(die_pos - 105.45) < 0.1
            and causal.die_percent(0.0, 0.03) is None
        )

    yield "deconfounding impact spot values", deconfounding_spot

    def backdoor_identity():
        records = corpus.generate_group1(corpus.emotion_set("E3"), replicates=2)
        descriptor = sas.SasDescriptor("b", sas.SasKind.BIASED_FEMALE)
        scored = sas.score_dataset(descriptor, records)
        for polarity in corpus.Polarity:
            obs = causal.observational_expectation(scored, polarity)
            intv = causal.interventional_expectation(scored, polarity, stats.Attribute.GENDER)
            if obs != intv or causal.die_percent(obs, intv) != 0.0:
                return False
        return True

    yield "balanced corpus: adjustment is the identity", backdoor_identity

    def eight_record_expectations():
        scored = _eight_record_corpus()
        obs_pos = causal.observational_expectation(scored, corpus.Polarity.POSITIVE)
        obs_neg = causal.observational_expectation(scored, corpus.Polarity.NEGATIVE)
        int_pos = causal.interventional_expectation(
            scored, corpus.Polarity.POSITIVE, stats.Attribute.GENDER
        )
        int_neg = causal.interventional_expectation(
            scored, corpus.Polarity.NEGATIVE, stats.Attribute.GENDER
        )
        return (
            obs_pos == -0.5
            and obs_neg == 0.5
            and int_pos == 0.0
            and int_neg == 0.0
            and causal.ate(scored) == -1.0
        )

    yield "hand-enumerated corpus expectations", eight_record_expectations

    def rating_split():
        def po(values):
            return rater.PartialOrder.from_psi_map(
                {
                    f"s{i}": PsiScore(PsiKind.WRS, v)
                    for i, v in enumerate(values)
                },
                rater.RatingGroup.G1,
            )

        flat = rater.assign_rating(po([0.0, 0.0, 0.6, 2.6, 23.0]), 3)
        tied = rater.assign_rating(po([0.0, 0.0, 0.0, 10.4, 69.0]), 3)
        undef = rater.assign_rating(po([0.0, 0.0, 10.87, 128.5, None]), 3)
        return (
            [flat[f"s{i}"] for i in range(5)] == [1, 1, 2, 2, 3]
            and [tied[f"s{i}"] for i in range(5)] == [1, 1, 1, 2, 3]
            and [undef[f"s{i}"] for i in range(5)] == [1, 1, 2, 3, 3]
        )

    yield "rating split with ties and undefined scores", rating_split

    yield "overall rating rounding", lambda: (
        rater.overall_rating([2, 3, 2, 2, 1, 3]) == 2
        and rater.overall_rating([1, 2, 1, 1, 1, 2]) == 1
        and rater.overall_rating([3, 3, 3, 3, 3, 3]) == 3
    )


def run_selftest() -> int:
    failures = 0
    for name, check in _checks():
        try:
            ok = check()
        except Exception as exc:  # noqa: BLE001 - report, do not crash the suite
            ok = False
            name = f"{name} ({exc})"
        print(f"{'ok' if ok else 'FAIL'} - {name}")
        failures += 0 if ok else 1
    print(f"{'all checks passed' if not failures else f'{failures} check(s) failed'}")
    return 0 if failures == 0 else 2
