"""Shared domain types for emotional script corpus construction."""

from __future__ import annotations

import hashlib
import re
import unicodedata
from dataclasses import dataclass
from enum import Enum


class Emotion(Enum):
    ANGER = "anger"
    DISGUST = "disgust"
    FEAR = "fear"
    HAPPINESS = "happiness"
    SADNESS = "sadness"
    SURPRISE = "surprise"

    @classmethod
    def parse(cls, label: str) -> "Emotion":
        try:
            return cls(label.strip().lower())
        except ValueError:
            raise ValueError(
                f"unknown emotion {label!r}; expected one of "
                f"{', '.join(e.value for e in cls)}"
            ) from None


class Session(Enum):
    REGULAR = "regular"
    PHRASE_FREE = "phrase_free"

    @classmethod
    def parse(cls, label: str) -> "Session":
        try:
            return cls(label.strip().lower())
        except ValueError:
            raise ValueError(f"unknown session {label!r}") from None


class Polarity(Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL = "neutral"

    @classmethod
    def parse(cls, label: str) -> "Polarity":
        try:
            return cls(label.strip().lower())
        except ValueError:
            raise ValueError(f"unknown polarity {label!r}") from None


_WHITESPACE_RUN = re.compile(r"\s+")


def normalize_text(text: str) -> str:
    """Canonical form used for script identity: NFC, trimmed, single spaces."""
    return _WHITESPACE_RUN.sub(" ", unicodedata.normalize("NFC", text).strip())


def script_id(text: str) -> str:
    """Stable 16-hex-digit id derived from the normalized text."""
    norm = normalize_text(text)
    return hashlib.sha256(norm.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class SeedWord:
    surface: str
    polarity: Polarity
    flagged_inappropriate: bool = False

    def __post_init__(self) -> None:
        if not self.surface.strip():
            raise ValueError("seed word surface is empty")


@dataclass(frozen=True)
class NVPhrase:
    id: str
    surface: str
    emotion: Emotion

    def __post_init__(self) -> None:
        if not self.surface.strip():
            raise ValueError(f"NV phrase {self.id!r} has empty surface")


@dataclass(frozen=True)
class Script:
    """One candidate or selected sentence, with optional attached scores."""

    id: str
    text: str
    emotion: Emotion
    session: Session
    seed_word: SeedWord
    nv_phrase: NVPhrase | None = None
    emotion_score_raw: float | None = None
    fluency_score_raw: float | None = None
    combined_score: float | None = None

    @classmethod
    def create(
        cls,
        text: str,
        emotion: Emotion,
        session: Session,
        seed_word: SeedWord,
        nv_phrase: NVPhrase | None = None,
        emotion_score_raw: float | None = None,
        fluency_score_raw: float | None = None,
        combined_score: float | None = None,
    ) -> "Script":
        """Build a script with normalized text and the derived id."""
        norm = normalize_text(text)
        return cls(
            id=script_id(norm),
            text=norm,
            emotion=emotion,
            session=session,
            seed_word=seed_word,
            nv_phrase=nv_phrase,
            emotion_score_raw=emotion_score_raw,
            fluency_score_raw=fluency_score_raw,
            combined_score=combined_score,
        )

    def with_scores(
        self, emotion_score_raw: float, fluency_score_raw: float,
        combined_score: float | None = None,
    ) -> "Script":
        return Script(
            id=self.id,
            text=self.text,
            emotion=self.emotion,
            session=self.session,
            seed_word=self.seed_word,
            nv_phrase=self.nv_phrase,
            emotion_score_raw=emotion_score_raw,
            fluency_score_raw=fluency_score_raw,
            combined_score=combined_score,
        )


def validate_script(s: Script) -> list[str]:
    """Return every invariant violation for one script; empty means ok.

    Violations are data, not exceptions: callers decide whether a bad
    script aborts a pipeline or is merely reported.
    """
    violations: list[str] = []
    if s.session is Session.REGULAR:
        if s.nv_phrase is None:
            violations.append("regular script has no NV phrase")
        elif s.nv_phrase.surface not in s.text:
            violations.append(
                f"phrase not in text: {s.nv_phrase.surface!r} missing from script {s.id}"
            )
    elif s.session is Session.PHRASE_FREE and s.nv_phrase is not None:
        violations.append("phrase in phrase-free script")
    if s.nv_phrase is not None and s.nv_phrase.emotion is not s.emotion:
        violations.append(
            f"phrase emotion {s.nv_phrase.emotion.value} != script emotion {s.emotion.value}"
        )
    if s.id != script_id(s.text):
        violations.append(f"id {s.id} does not match normalized text hash")
    if s.combined_score is not None and not (0.0 <= s.combined_score <= 2.0):
        violations.append(f"combined score {s.combined_score} outside [0, 2]")
    return violations
