"""Causal bias audit harness for sentiment analysis systems.

Generates controlled evaluation corpora over protected attributes, scores
them through built-in or external sentiment systems, tests for causal
dependence of the output on those attributes, and rates each system on a
user-chosen scale.
"""

from .causal import (
    DieScore,
    PsiKind,
    PsiScore,
    ate,
    compute_die_score,
    die_percent,
    die_score,
    interventional_expectation,
    observational_expectation,
)
from .corpus import (
    EMOTION_SETS,
    AssociationPolicy,
    EmotionWord,
    EmotionWordSet,
    Gender,
    Polarity,
    Race,
    RgClass,
    SentenceRecord,
    Subject,
    Template,
    emotion_set,
    generate_group1,
    generate_group2,
    generate_group3,
    generate_group4,
    read_records,
    render,
    write_records,
)
from .rater import (
    PartialOrder,
    RatingGroup,
    RatingReport,
    assign_rating,
    build_report,
    create_partial_order,
    overall_rating,
    prominence_note,
    single_sas_rating,
)
from .sas import (
    OutputMode,
    SasDescriptor,
    SasKind,
    ScoredRecord,
    discretize,
    score_dataset,
)
from .stats import (
    Attribute,
    Sample,
    TTestResult,
    class_samples,
    critical_t,
    weighted_rejection_score,
    welch_t,
)

__version__ = "0.1.0"
