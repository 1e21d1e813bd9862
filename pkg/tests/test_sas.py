import math
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FEMALE, MALE, NA_SUBJECT, make_record
from sasaudit import corpus
from sasaudit.errors import ScoringError
from sasaudit.sas import (
    DEFAULT_LEXICON,
    OutputMode,
    SasDescriptor,
    SasKind,
    ScoredRecord,
    discretize,
    read_scored_records,
    score_biased_female,
    score_dataset,
    score_lexicon,
    score_random,
    write_scored_records,
)

SEED = 20240801


def descriptor(kind, mode=OutputMode.CONTINUOUS, seed=None):
    return SasDescriptor(kind.value, kind, mode, seed=seed)


class TestBiasedFemale:
    def test_examples(self):
        assert score_biased_female(make_record(0, FEMALE, corpus.GRIM)) == 1.0
        assert score_biased_female(make_record(1, MALE, corpus.HAPPY)) == -1.0
        assert score_biased_female(make_record(2, NA_SUBJECT, corpus.GLAD)) == -1.0

    def test_function_of_gender_only(self, e3):
        records = corpus.generate_group1(e3, replicates=2)
        scores = {r.id: score_biased_female(r) for r in records}
        # Swapping the emotion word of any record leaves its score unchanged.
        for record in records:
            for word in e3.words:
                changed = make_record(record.id, record.subject, word)
                assert score_biased_female(changed) == scores[record.id]


class TestLexicon:
    def test_subject_blind(self):
        for subject in (MALE, FEMALE, NA_SUBJECT):
            assert score_lexicon(make_record(0, subject, corpus.HAPPY)) == 0.8
        woman = corpus.GENDER_SUBJECTS[corpus.Gender.FEMALE][1]
        assert score_lexicon(make_record(1, woman, corpus.GRIM)) == -0.4

    def test_no_known_word(self):
        weird = corpus.EmotionWord("weird", corpus.Polarity.NEGATIVE)
        with pytest.raises(ScoringError, match="none"):
            score_lexicon(make_record(3, MALE, weird))

    def test_custom_table(self):
        record = make_record(0, MALE, corpus.HAPPY)
        assert score_lexicon(record, {"happy": 0.25}) == 0.25


class TestDiscretize:
    def test_thresholds(self):
        assert discretize(0.8, 0.33) == 1.0
        assert discretize(0.0, 0.9) == 0.0
        assert discretize(-0.33, 0.33) == 0.0
        assert discretize(-0.4, 0.33) == -1.0

    def test_dead_zone_validation(self):
        with pytest.raises(ValueError):
            discretize(0.5, 1.0)
        with pytest.raises(ValueError):
            discretize(0.5, -0.1)

    @given(st.sampled_from([-1.0, 0.0, 1.0]), st.floats(min_value=0.0, max_value=0.99))
    def test_idempotent_on_discrete_values(self, value, dead_zone):
        once = discretize(value, dead_zone)
        assert discretize(once, dead_zone) == once

    @given(
        st.floats(min_value=-1, max_value=1),
        st.floats(min_value=-1, max_value=1),
        st.floats(min_value=0.0, max_value=0.99),
    )
    def test_monotone(self, x, y, dead_zone):
        lo, hi = sorted((x, y))
        assert discretize(lo, dead_zone) <= discretize(hi, dead_zone)


class TestRandom:
    def test_same_seed_same_sequence(self, e3):
        records = corpus.generate_group1(e3, replicates=3)
        d = descriptor(SasKind.RANDOM, OutputMode.CONTINUOUS, seed=SEED)
        first = [s.score for s in score_dataset(d, records)]
        second = [s.score for s in score_dataset(d, records)]
        assert first == second
        other = descriptor(SasKind.RANDOM, OutputMode.CONTINUOUS, seed=SEED + 1)
        assert [s.score for s in score_dataset(other, records)] != first

    def test_order_independent(self, e3):
        records = corpus.generate_group1(e3, replicates=2)
        d = descriptor(SasKind.RANDOM, OutputMode.DISCRETE, seed=SEED)
        forward = {s.record.id: s.score for s in score_dataset(d, records)}
        backward = {s.record.id: s.score for s in score_dataset(d, records[::-1])}
        assert forward == backward

    def test_discrete_frequencies_uniform(self):
        # Chi-square against uniform over {-1, 0, +1}; critical value for
        # 2 degrees of freedom at alpha = 0.001 is 13.82.
        records = [make_record(i, MALE, corpus.HAPPY) for i in range(30_000)]
        counts = Counter(score_random(r, SEED, OutputMode.DISCRETE) for r in records)
        assert set(counts) == {-1.0, 0.0, 1.0}
        n = len(records)
        for count in counts.values():
            assert abs(count / n - 1 / 3) < 0.02
        chi2 = sum((count - n / 3) ** 2 / (n / 3) for count in counts.values())
        assert chi2 < 13.82

    def test_independent_of_gender(self):
        records = corpus.generate_group1(corpus.emotion_set("E3"), replicates=200)
        d = descriptor(SasKind.RANDOM, OutputMode.CONTINUOUS, seed=SEED)
        by_gender = {}
        for item in score_dataset(d, records):
            by_gender.setdefault(item.record.subject.gender, []).append(item.score)
        means = {g: sum(v) / len(v) for g, v in by_gender.items()}
        assert abs(means[corpus.Gender.FEMALE] - means[corpus.Gender.MALE]) < 0.05

    def test_continuous_in_range(self):
        for rid in range(1000):
            value = score_random(make_record(rid, MALE, corpus.HAPPY), SEED, OutputMode.CONTINUOUS)
            assert -1.0 <= value <= 1.0

    def test_missing_seed(self, e3):
        d = SasDescriptor("r", SasKind.RANDOM, OutputMode.DISCRETE)
        with pytest.raises(ScoringError, match="seed"):
            score_dataset(d, corpus.generate_group1(e3, 1))


class TestScoreDataset:
    def test_biased_over_group1(self, e3):
        records = corpus.generate_group1(e3, replicates=1)
        scored = score_dataset(descriptor(SasKind.BIASED_FEMALE), records)
        assert len(scored) == 24
        assert {s.score for s in scored} == {-1.0, 1.0}
        assert [s.record for s in scored] == records

    def test_lexicon_discretized(self, e3):
        records = corpus.generate_group1(e3, replicates=1)
        scored = score_dataset(
            descriptor(SasKind.LEXICON, OutputMode.DISCRETE), records, dead_zone=0.33
        )
        for item in scored:
            expected = -1.0 if item.record.emotion.surface == "grim" else 1.0
            assert item.score == expected

    def test_random_discrete_draws_directly(self, e3):
        records = corpus.generate_group1(e3, replicates=50)
        d = descriptor(SasKind.RANDOM, OutputMode.DISCRETE, seed=SEED)
        counts = Counter(s.score for s in score_dataset(d, records))
        assert set(counts) == {-1.0, 0.0, 1.0}
        n = sum(counts.values())
        assert all(abs(c / n - 1 / 3) < 0.05 for c in counts.values())

    def test_all_scores_bounded(self, e3):
        records = corpus.generate_group3(e3, replicates=2)
        for kind, mode, seed in (
            (SasKind.BIASED_FEMALE, OutputMode.CONTINUOUS, None),
            (SasKind.LEXICON, OutputMode.CONTINUOUS, None),
            (SasKind.LEXICON, OutputMode.DISCRETE, None),
            (SasKind.RANDOM, OutputMode.CONTINUOUS, SEED),
            (SasKind.RANDOM, OutputMode.DISCRETE, SEED),
        ):
            scored = score_dataset(descriptor(kind, mode, seed), records)
            assert len(scored) == len(records)
            assert all(-1.0 <= s.score <= 1.0 for s in scored)


class TestScoredRoundTrip:
    def test_lossless(self, tmp_path, e3):
        records = corpus.generate_group2(e3, corpus.GROUP2_K_CASES[1], replicates=5)
        scored = score_dataset(descriptor(SasKind.LEXICON), records)
        path = tmp_path / "scored.jsonl"
        write_scored_records(scored, path, "lexicon", discretized=False)
        assert read_scored_records(path) == scored

    def test_out_of_range_score_rejected(self, tmp_path, e3):
        records = corpus.generate_group1(e3, replicates=1)
        scored = [ScoredRecord(records[0], 1.0)]
        path = tmp_path / "scored.jsonl"
        write_scored_records(scored, path, "x", discretized=False)
        path.write_text(path.read_text().replace('"score": 1.0', '"score": 1.5'))
        from sasaudit.errors import SchemaError

        with pytest.raises(SchemaError, match=r":1: "):
            read_scored_records(path)
