"""Sentiment-polarity dictionary ingestion and seed-word sampling."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

from .model import Emotion, Polarity, SeedWord

_POLARITY_CODES = {
    "p": Polarity.POSITIVE,
    "n": Polarity.NEGATIVE,
    "e": Polarity.NEUTRAL,
    "positive": Polarity.POSITIVE,
    "negative": Polarity.NEGATIVE,
    "neutral": Polarity.NEUTRAL,
}

DEFAULT_ROUTING: dict[Emotion, Polarity] = {
    Emotion.ANGER: Polarity.NEGATIVE,
    Emotion.DISGUST: Polarity.NEGATIVE,
    Emotion.FEAR: Polarity.NEGATIVE,
    Emotion.SADNESS: Polarity.NEGATIVE,
    Emotion.HAPPINESS: Polarity.POSITIVE,
    Emotion.SURPRISE: Polarity.NEUTRAL,
}


class DictionaryError(ValueError):
    pass


class BucketExhaustedError(LookupError):
    """No usable seed word remains for the requested polarity."""


@dataclass(frozen=True)
class EmotionPolarityRouting:
    table: dict[Emotion, Polarity] = field(default_factory=lambda: dict(DEFAULT_ROUTING))

    def __post_init__(self) -> None:
        missing = [e.value for e in Emotion if e not in self.table]
        if missing:
            raise ValueError(f"routing table missing emotions: {missing}")

    def polarity_for(self, emotion: Emotion) -> Polarity:
        return self.table[emotion]


@dataclass(frozen=True)
class PolarityDictionary:
    """Deduplicated seed words bucketed by polarity; flagged words stay listed
    so counts are reportable, but sampling never returns them."""

    buckets: dict[Polarity, tuple[SeedWord, ...]]

    def counts(self) -> dict[str, dict[str, int]]:
        out: dict[str, dict[str, int]] = {}
        for polarity, words in self.buckets.items():
            usable = sum(1 for w in words if not w.flagged_inappropriate)
            out[polarity.value] = {"total": len(words), "usable": usable}
        return out

    def usable(self, polarity: Polarity) -> tuple[SeedWord, ...]:
        return tuple(w for w in self.buckets[polarity] if not w.flagged_inappropriate)


def load_blocklist(path: str | Path) -> frozenset[str]:
    surfaces = set()
    for line in Path(path).read_text("utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            surfaces.add(line)
    return frozenset(surfaces)


def load_dictionary(
    dict_path: str | Path, blocklist_path: str | Path | None = None
) -> PolarityDictionary:
    """Load `surface<TAB>polarity` lines; mark blocklisted surfaces.

    Raises DictionaryError on malformed lines (with line number) and when
    any polarity bucket ends up with no entries at all.
    """
    blocked = load_blocklist(blocklist_path) if blocklist_path else frozenset()
    seen: dict[Polarity, dict[str, SeedWord]] = {p: {} for p in Polarity}
    path = Path(dict_path)
    for lineno, line in enumerate(path.read_text("utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise DictionaryError(
                f"{path}:{lineno}: expected surface<TAB>polarity, got {line!r}"
            )
        surface = parts[0].strip()
        code = parts[1].strip().lower()
        if not surface:
            raise DictionaryError(f"{path}:{lineno}: empty surface")
        if code not in _POLARITY_CODES:
            raise DictionaryError(f"{path}:{lineno}: unknown polarity code {code!r}")
        polarity = _POLARITY_CODES[code]
        word = SeedWord(
            surface=surface,
            polarity=polarity,
            flagged_inappropriate=surface in blocked,
        )
        seen[polarity].setdefault(surface, word)
    empty = [p.value for p in Polarity if not seen[p]]
    if empty:
        raise DictionaryError(f"no dictionary entries for polarities: {empty}")
    return PolarityDictionary(
        buckets={p: tuple(seen[p].values()) for p in Polarity}
    )


def sample_seed(
    dictionary: PolarityDictionary,
    emotion: Emotion,
    routing: EmotionPolarityRouting,
    rng_seed: int,
    exclude: frozenset[str] | set[str] = frozenset(),
) -> SeedWord:
    """Sample one seed word with the emotion's routed polarity.

    Deterministic for a given rng_seed. Flagged and excluded surfaces are
    never candidates; an empty candidate pool raises BucketExhaustedError.
    """
    polarity = routing.polarity_for(emotion)
    candidates = [w for w in dictionary.usable(polarity) if w.surface not in exclude]
    if not candidates:
        raise BucketExhaustedError(
            f"bucket empty after filtering: polarity={polarity.value} "
            f"emotion={emotion.value}"
        )
    candidates.sort(key=lambda w: w.surface)
    return random.Random(rng_seed).choice(candidates)
