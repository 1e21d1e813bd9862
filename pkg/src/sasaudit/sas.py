"""Sentiment analysis system (SAS) descriptors, built-in scorers and batch scoring.

Built-ins:

* ``biased_female`` — +1 for female-labeled subjects, -1 otherwise.
* ``random`` — a splitmix64 stream keyed on (seed, record id), so scores are
  reproducible and independent of scoring order.
* ``lexicon`` — fixed per-word values, blind to the subject.

External systems attach through the ``sas-score/1`` line protocol (see
:mod:`sasaudit.bridge`).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

from . import bridge
from .corpus import Gender, SentenceRecord, record_from_row
from .errors import ConfigError, SchemaError, ScoringError


class SasKind(str, Enum):
    BIASED_FEMALE = "biased_female"
    RANDOM = "random"
    LEXICON = "lexicon"
    EXTERNAL = "external"


class OutputMode(str, Enum):
    CONTINUOUS = "continuous"
    DISCRETE = "discrete"


@dataclass(frozen=True)
class SasDescriptor:
    name: str
    kind: SasKind
    output_mode: OutputMode = OutputMode.CONTINUOUS
    seed: Optional[int] = None
    command: Optional[tuple[str, ...]] = None
    host: Optional[str] = None
    port: Optional[int] = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ConfigError("SAS descriptor needs a name")
        if self.kind is SasKind.EXTERNAL and not (self.command or (self.host and self.port)):
            raise ConfigError(f"external SAS {self.name!r} needs a command or host/port")


@dataclass(frozen=True)
class ScoredRecord:
    record: SentenceRecord
    score: float


DEFAULT_LEXICON: Mapping[str, float] = {
    "grim": -0.4,
    "depressing": -0.9,
    "happy": 0.8,
    "glad": 0.5,
}

DEFAULT_DEAD_ZONE = 0.33

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(state: int) -> int:
    z = state & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64

def _unit_uniform(seed: int, record_id: int) -> float:
    """splitmix64 output at stream position ``record_id``, mapped to [0, 1)."""
    state = (seed + (record_id + 1) * _GOLDEN) & _MASK64
    return (_splitmix64(state) >> 11) * 2.0**-53


def score_biased_female(record: SentenceRecord) -> float:
    return 1.0 if record.subject.gender is Gender.FEMALE else -1.0


def score_random(record: SentenceRecord, seed: int, mode: OutputMode) -> float:
    u = _unit_uniform(seed, record.id)
    if mode is OutputMode.DISCRETE:
        return (-1.0, 0.0, 1.0)[int(u * 3.0)]
    return 2.0 * u - 1.0


def score_lexicon(
    record: SentenceRecord, lexicon: Mapping[str, float] = DEFAULT_LEXICON
) -> float:
    tokens = record.text.lower().split()
    hits = {t for t in tokens if t in lexicon}
    if len(hits) != 1:
        raise ScoringError(
            f"record {record.id}: expected exactly one lexicon word in "
            f"{record.text!r}, found {sorted(hits) or 'none'}"
        )
    return lexicon[hits.pop()]


def discretize(score: float, dead_zone: float = DEFAULT_DEAD_ZONE) -> float:
    """Map a score to {-1, 0, +1}; the closed band [-dead_zone, dead_zone] maps to 0."""
    if not 0.0 <= dead_zone < 1.0:
        raise ValueError(f"dead_zone must be in [0, 1), got {dead_zone}")
    if score > dead_zone:
        return 1.0
    if score < -dead_zone:
        return -1.0
    return 0.0


def _check_bounds(name: str, record_id: int, value: float) -> float:
    if not -1.0 <= value <= 1.0:
        raise ScoringError(f"sas {name!r}: record {record_id}: score {value} outside [-1, 1]")
    return value


def _score_external(
    sas: SasDescriptor,
    records: Sequence[SentenceRecord],
    session: Optional[bridge.BridgeSession],
) -> list[float]:
    requests = [bridge.BridgeRequest(id=r.id, text=r.text) for r in records]
    own_session = session is None
    if own_session:
        session = bridge.open_session(command=sas.command, host=sas.host, port=sas.port)
    try:
        responses = bridge.score_batch(session, requests)
    finally:
        if own_session:
            session.close()
    failed = [resp for resp in responses if not resp.ok]
    if failed:
        first = failed[0]
        raise ScoringError(
            f"sas {sas.name!r}: record {first.id}: {first.error}"
            + (f" (+{len(failed) - 1} more)" if len(failed) > 1 else "")
        )
    return [resp.score for resp in responses]


def score_dataset(
    sas: SasDescriptor,
    records: Sequence[SentenceRecord],
    dead_zone: float = DEFAULT_DEAD_ZONE,
    lexicon: Mapping[str, float] = DEFAULT_LEXICON,
    session: Optional[bridge.BridgeSession] = None,
) -> list[ScoredRecord]:
    """Score every record in order, discretizing when the descriptor asks for it.

    The random scorer draws its discrete scores directly from {-1, 0, +1}
    rather than thresholding a continuous draw, so both modes are uniform.
    """
    if sas.kind is SasKind.RANDOM:
        if sas.seed is None:
            raise ScoringError(f"random SAS {sas.name!r} has no seed")
        values = [score_random(r, sas.seed, sas.output_mode) for r in records]
        return [ScoredRecord(r, v) for r, v in zip(records, values)]

    if sas.kind is SasKind.BIASED_FEMALE:
        values = [score_biased_female(r) for r in records]
    elif sas.kind is SasKind.LEXICON:
        values = [score_lexicon(r, lexicon) for r in records]
    elif sas.kind is SasKind.EXTERNAL:
        values = _score_external(sas, records, session)
    else:  # pragma: no cover - enum is closed
        raise ScoringError(f"unknown SAS kind: {sas.kind}")

    if sas.output_mode is OutputMode.DISCRETE:
        values = [discretize(v, dead_zone) for v in values]
    return [
        ScoredRecord(r, _check_bounds(sas.name, r.id, v)) for r, v in zip(records, values)
    ]


def write_scored_records(
    scored: Iterable[ScoredRecord], path, sas_name: str, discretized: bool
) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for item in scored:
            row = item.record.to_row()
            row["sas"] = sas_name
            row["score"] = item.score
            row["discretized"] = discretized
            handle.write(json.dumps(row) + "\n")


def read_scored_records(path) -> list[ScoredRecord]:
    scored = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
                for field in ("sas", "score", "discretized"):
                    if field not in row:
                        raise SchemaError(f"missing field: {field}")
                score = float(row["score"])
                if not -1.0 <= score <= 1.0:
                    raise SchemaError(f"score {score} outside [-1, 1]")
                scored.append(ScoredRecord(record_from_row(row), score))
            except (json.JSONDecodeError, SchemaError, TypeError, ValueError) as exc:
                raise SchemaError(f"{path}:{lineno}: {exc}") from None
    return scored
