"""Scoring backends and output normalization.

Every backend maps text to a score in [-1, 1]. Raw model outputs are brought
into that interval by one of two rules:

* seven-class models (labels 0..6): ``v/3 - 1``
* signed-confidence models (label plus value in [0, 1]): ``+value`` for a
  positive label, ``-value`` for a negative one
"""

from __future__ import annotations


class BackendError(Exception):
    """The backend cannot score this input or failed to load."""


def normalize_seven_class(category: int) -> float:
    """Map an ordinal sentiment category 0..6 onto [-1, 1]."""
    if not isinstance(category, int) or not 0 <= category <= 6:
        raise BackendError(f"expected an integer category in 0..6, got {category!r}")
    return category / 3 - 1


def normalize_signed(label: str, value: float) -> float:
    """Map a (label, confidence) pair onto [-1, 1] by sign."""
    if not 0.0 <= value <= 1.0:
        raise BackendError(f"confidence {value!r} outside [0, 1]")
    folded = label.strip().lower()
    if folded.startswith("pos"):
        return value
    if folded.startswith("neg"):
        return -value
    raise BackendError(f"unrecognized label {label!r}")


class ToyLexiconBackend:
    """Fixed word values; mirrors the audit harness's built-in lexicon scorer."""

    name = "toy-lexicon"

    TABLE = {"grim": -0.4, "depressing": -0.9, "happy": 0.8, "glad": 0.5}

    def load(self) -> None:
        pass

    def score(self, text: str) -> float:
        hits = {token for token in text.lower().split() if token in self.TABLE}
        if len(hits) != 1:
            raise BackendError(
                f"expected exactly one known emotion word, found {sorted(hits) or 'none'}"
            )
        return self.TABLE[hits.pop()]


class TransformersBackend:
    """Wraps a text-classification model; downloads follow the ecosystem default."""

    def __init__(self, model_id: str):
        self.name = model_id
        self._pipeline = None

    def load(self) -> None:
        try:
            from transformers import pipeline
        except ImportError as exc:
            raise BackendError(f"transformers is not installed: {exc}") from None
        try:
            self._pipeline = pipeline("sentiment-analysis", model=self.name)
        except Exception as exc:
            raise BackendError(f"cannot load model {self.name!r}: {exc}") from None

    def score(self, text: str) -> float:
        if self._pipeline is None:
            self.load()
        result = self._pipeline(text)[0]
        return normalize_signed(str(result["label"]), float(result["score"]))


def load_backend(spec: str):
    """``toy-lexicon`` or a model id for the transformers ecosystem."""
    backend = ToyLexiconBackend() if spec == "toy-lexicon" else TransformersBackend(spec)
    backend.load()
    return backend
