"""NV phrase catalog: per-emotion phrase lists and deterministic sampling."""

from __future__ import annotations

import random
from importlib import resources
from pathlib import Path

from .model import Emotion, NVPhrase

PhraseCatalog = dict[Emotion, tuple[NVPhrase, ...]]


class PhraseCatalogError(ValueError):
    pass


def load_phrases(path: str | Path | None = None) -> PhraseCatalog:
    """Load `id<TAB>emotion<TAB>surface` rows; bundled catalog when no path."""
    if path is None:
        raw = resources.files("nvscript.data").joinpath("nv_phrases.tsv").read_text("utf-8")
        label = "<bundled nv_phrases.tsv>"
    else:
        raw = Path(path).read_text("utf-8")
        label = str(path)
    catalog: dict[Emotion, list[NVPhrase]] = {e: [] for e in Emotion}
    seen_ids: set[str] = set()
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise PhraseCatalogError(
                f"{label}:{lineno}: expected id<TAB>emotion<TAB>surface"
            )
        phrase_id, emotion_label, surface = (p.strip() for p in parts)
        if phrase_id in seen_ids:
            raise PhraseCatalogError(f"{label}:{lineno}: duplicate phrase id {phrase_id!r}")
        seen_ids.add(phrase_id)
        emotion = Emotion.parse(emotion_label)
        catalog[emotion].append(NVPhrase(id=phrase_id, surface=surface, emotion=emotion))
    missing = [e.value for e in Emotion if not catalog[e]]
    if missing:
        raise PhraseCatalogError(f"{label}: no phrases for emotions: {missing}")
    return {e: tuple(phrases) for e, phrases in catalog.items()}


def all_surfaces(catalog: PhraseCatalog) -> frozenset[str]:
    return frozenset(p.surface for phrases in catalog.values() for p in phrases)


def sample_phrase(
    catalog: PhraseCatalog,
    emotion: Emotion,
    rng_seed: int,
    exclude: frozenset[str] | set[str] = frozenset(),
) -> NVPhrase:
    """Deterministically sample one phrase for the emotion, skipping excluded ids."""
    candidates = [p for p in catalog[emotion] if p.id not in exclude]
    if not candidates:
        raise PhraseCatalogError(f"no phrases left for {emotion.value}")
    candidates.sort(key=lambda p: p.id)
    return random.Random(rng_seed).choice(candidates)
