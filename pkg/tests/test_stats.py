import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FEMALE, MALE, NA_SUBJECT, make_record, scored_corpus
from oracles import oracle_critical_t, oracle_welch, oracle_wrs
from sasaudit import corpus
from sasaudit.errors import DegenerateDataError
from sasaudit.sas import OutputMode, SasDescriptor, SasKind, ScoredRecord, score_dataset
from sasaudit.stats import (
    DEFAULT_CI_WEIGHTS,
    Attribute,
    Sample,
    class_samples,
    critical_t,
    pair_tests,
    weighted_rejection_score,
    welch_t,
)

int_samples = st.lists(
    st.integers(min_value=-5, max_value=5), min_size=2, max_size=12
).map(lambda xs: tuple(float(x) for x in xs))


def sample(values, label="s"):
    return Sample(tuple(float(v) for v in values), label)


class TestWelch:
    def test_identical_samples(self):
        result = welch_t(sample([1, 0, -1, 0]), sample([1, 0, -1, 0]))
        assert result.t_abs == 0.0
        assert result.rejected_at == frozenset()

    def test_zero_variance_pair(self):
        result = welch_t(sample([-1] * 20), sample([1] * 20), epsilon=1e-4)
        assert result.t_abs == pytest.approx(2.0 / 1e-4)
        assert result.dof == 38.0
        assert result.rejected_at == {95, 70, 60}
        assert result.display == "H"

    def test_frozen_textbook_example(self):
        # Oracle-computed before the implementation: t = 0.5 / (0.5 + 1e-4),
        # Welch-Satterthwaite dof = 27/5.
        result = welch_t(sample([1, 0, -1, 0]), sample([0, 1, 0, 1]), epsilon=1e-4)
        assert result.t_abs == pytest.approx(0.9998000399920016, abs=1e-12)
        assert result.dof == pytest.approx(5.4, abs=1e-12)
        t_oracle, dof_oracle = oracle_welch([1, 0, -1, 0], [0, 1, 0, 1], 1e-4)
        assert result.t_abs == pytest.approx(t_oracle, abs=1e-9)
        assert result.dof == pytest.approx(dof_oracle, abs=1e-9)

    def test_sample_too_small(self):
        with pytest.raises(DegenerateDataError, match="too small"):
            sample([1.0])

    @settings(max_examples=60, deadline=None)
    @given(a=int_samples, b=int_samples)
    def test_symmetry(self, a, b):
        left = welch_t(sample(a, "a"), sample(b, "b"))
        right = welch_t(sample(b, "b"), sample(a, "a"))
        assert left.t_abs == right.t_abs
        assert left.dof == right.dof
        assert left.rejected_at == right.rejected_at

    @settings(max_examples=60, deadline=None)
    @given(a=int_samples, b=int_samples, shift=st.integers(min_value=-10, max_value=10))
    def test_shift_invariance_exact_without_epsilon(self, a, b, shift):
        plain = welch_t(sample(a), sample(b), epsilon=0.0)
        moved = welch_t(
            sample([x + shift for x in a]), sample([x + shift for x in b]), epsilon=0.0
        )
        assert plain.t_abs == moved.t_abs
        assert plain.dof == moved.dof

    @settings(max_examples=60, deadline=None)
    @given(a=int_samples, b=int_samples, power=st.integers(min_value=-3, max_value=3))
    def test_scale_invariance_exact_without_epsilon(self, a, b, power):
        # Numerator and denominator both scale by s, so t is scale-free; with
        # power-of-two factors the float arithmetic is lossless too.
        scale = 2.0**power
        plain = welch_t(sample(a), sample(b), epsilon=0.0)
        scaled = welch_t(
            sample([x * scale for x in a]), sample([x * scale for x in b]), epsilon=0.0
        )
        if math.isinf(plain.t_abs):
            assert math.isinf(scaled.t_abs)
        else:
            assert scaled.t_abs == plain.t_abs

    @settings(max_examples=60, deadline=None)
    @given(a=int_samples, b=int_samples, power=st.integers(min_value=0, max_value=3))
    def test_scale_deviation_bounded_with_epsilon(self, a, b, power):
        # With the epsilon floor the deviation under scaling by s is exactly
        # eps*(s-1)/(s*D + eps) in relative terms, D the unscaled denominator.
        scale = 2.0**power
        epsilon = 1e-4

        def variance(values):
            mean = sum(values) / len(values)
            return sum((v - mean) ** 2 for v in values) / (len(values) - 1)

        denominator = math.sqrt(variance(a) / len(a) + variance(b) / len(b))
        plain = welch_t(sample(a), sample(b), epsilon=epsilon)
        if plain.t_abs == 0:
            return
        scaled = welch_t(
            sample([x * scale for x in a]), sample([x * scale for x in b]), epsilon=epsilon
        )
        bound = epsilon * (scale - 1) / (scale * denominator + epsilon)
        deviation = abs(scaled.t_abs - plain.t_abs) / plain.t_abs
        assert deviation <= bound + 1e-9

    @settings(max_examples=60, deadline=None)
    @given(a=int_samples, b=int_samples)
    def test_rejection_monotone_in_confidence(self, a, b):
        result = welch_t(sample(a), sample(b))
        if 95 in result.rejected_at:
            assert {70, 60} <= result.rejected_at
        if 70 in result.rejected_at:
            assert 60 in result.rejected_at


class TestCriticalT:
    def test_table_anchors(self):
        assert critical_t(95, 10) == pytest.approx(2.228, abs=1e-3)
        assert critical_t(60, 10) == pytest.approx(0.879, abs=1e-3)
        assert critical_t(95, 10_000_000) == pytest.approx(1.960, abs=1e-3)

    def test_dof_floors_to_table_entry(self):
        assert critical_t(95, 10.9) == critical_t(95, 10)
        assert critical_t(70, 3.2) == critical_t(70, 3)

    def test_unsupported_inputs(self):
        for ci in (0, 100, 150, -5):
            with pytest.raises(ValueError, match="confidence"):
                critical_t(ci, 10)
        with pytest.raises(ValueError, match="freedom"):
            critical_t(95, 0.5)

    def test_matches_independent_quantile_oracle(self):
        dofs = list(range(1, 21)) + [30, 50, 75, 100, 150, 200]
        for dof in dofs:
            for ci in (95, 70, 60):
                assert critical_t(ci, dof) == pytest.approx(
                    oracle_critical_t(ci, dof), abs=1e-3
                )


class TestClassSamples:
    def test_gender_partition(self, e3):
        records = corpus.generate_group1(e3, replicates=1)
        scored = score_dataset(SasDescriptor("b", SasKind.BIASED_FEMALE), records)
        samples, omitted = class_samples(scored, Attribute.GENDER)
        assert sorted(samples) == ["female", "male", "na"]
        assert omitted == ()

    def test_rg_partition_yields_ten_pairs(self, e3):
        records = corpus.generate_group3(e3, replicates=1)
        scored = score_dataset(SasDescriptor("b", SasKind.BIASED_FEMALE), records)
        samples, _ = class_samples(scored, Attribute.RG)
        assert sorted(samples) == ["af", "am", "ef", "em", "na"]
        assert len(pair_tests(scored, Attribute.RG)) == 10

    def test_race_partition(self, e3):
        records = corpus.generate_group3(e3, replicates=1)
        scored = score_dataset(SasDescriptor("b", SasKind.BIASED_FEMALE), records)
        samples, _ = class_samples(scored, Attribute.RACE)
        assert sorted(samples) == ["african_american", "european", "na"]

    def test_thin_class_omitted(self):
        plan = [(MALE, corpus.HAPPY, 1), (MALE, corpus.GRIM, 0), (FEMALE, corpus.HAPPY, 1)]
        samples, omitted = class_samples(scored_corpus(plan), Attribute.GENDER)
        assert sorted(samples) == ["male"]
        assert omitted == ("female",)

    def test_empty_input(self):
        with pytest.raises(DegenerateDataError):
            class_samples([], Attribute.GENDER)


def _biased_group1_datasets():
    descriptor = SasDescriptor("b", SasKind.BIASED_FEMALE)
    return [
        score_dataset(descriptor, corpus.generate_group1(corpus.emotion_set(set_id), 5))
        for set_id in ("E1", "E2", "E3", "E4", "E5")
    ]


class TestWeightedRejectionScore:
    def test_constant_scorer_scores_zero(self, e3):
        records = corpus.generate_group1(e3, replicates=2)
        scored = [ScoredRecord(r, 0.25) for r in records]
        assert weighted_rejection_score([scored], [Attribute.GENDER]) == 0.0

    def test_single_low_confidence_rejection(self):
        # Frozen by search: male and female differ mildly, NA differs from
        # male just enough to reject only at the 60% level.
        male = (1, 0, 1, 0, 1, 0, 1, 0)
        female = (1, 1, 1, 0, 1, 0, 1, 0)
        na = (1, 1, 1, 1, 1, 0, 1, 0)
        plan = [(MALE, corpus.HAPPY, v) for v in male]
        plan += [(FEMALE, corpus.HAPPY, v) for v in female]
        plan += [(NA_SUBJECT, corpus.HAPPY, v) for v in na]
        scored = scored_corpus(plan)
        tests = pair_tests(scored, Attribute.GENDER)
        assert sorted(tuple(sorted(r.rejected_at)) for r in tests.values()) == [
            (),
            (),
            (60,),
        ]
        psi = weighted_rejection_score([scored], [Attribute.GENDER])
        assert psi == pytest.approx(0.6, abs=1e-12)

    def test_biased_scorer_over_five_datasets(self):
        # Two always-rejecting pairs per dataset, five datasets, full weights:
        # 2 * 5 * (1 + 0.8 + 0.6) = 24.
        psi = weighted_rejection_score(_biased_group1_datasets(), [Attribute.GENDER])
        assert psi == pytest.approx(24.0, abs=1e-9)

    def test_monotone_in_datasets(self):
        datasets = _biased_group1_datasets()
        previous = 0.0
        for end in range(1, len(datasets) + 1):
            psi = weighted_rejection_score(datasets[:end], [Attribute.GENDER])
            assert psi >= previous
            previous = psi

    def test_matches_brute_force_oracle(self):
        rng = random.Random(1234)
        subjects = [MALE, FEMALE, NA_SUBJECT]
        words = [corpus.HAPPY, corpus.GRIM]
        checked = 0
        for _ in range(25):
            plan = []
            for subject in subjects:
                for _ in range(rng.randint(2, 8)):
                    plan.append((subject, rng.choice(words), rng.choice([-1.0, 0.0, 1.0])))
            scored = scored_corpus(plan)
            # Guard against knife-edge comparisons that could legitimately
            # differ between float and exact arithmetic.
            borderline = any(
                min(
                    abs(result.t_abs - critical_t(ci, result.dof))
                    for ci in (95, 70, 60)
                )
                < 1e-6
                for result in pair_tests(scored, Attribute.GENDER).values()
            )
            if borderline:
                continue
            mine = weighted_rejection_score([scored], [Attribute.GENDER])
            rows = [[(item.record, item.score) for item in scored]]
            theirs = oracle_wrs(
                rows,
                [lambda record: record.subject.gender.value],
                DEFAULT_CI_WEIGHTS,
                1e-4,
            )
            assert mine == pytest.approx(theirs, abs=1e-9)
            checked += 1
        assert checked >= 20
