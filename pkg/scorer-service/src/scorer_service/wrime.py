"""Emotion-intensity dataset ingestion and label aggregation.

Rows carry a sentence plus writer and reader intensity annotations (0..3)
per emotion. A sentence counts as expressing an emotion when the weighted
aggregate of its annotations exceeds 1. A re-annotation file (same schema)
can be merged in; merged aggregates are the mean of the two rounds.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from . import EMOTIONS

LABEL_THRESHOLD = 1.0

logger = logging.getLogger(__name__)


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class AnnotatedSentence:
    text: str
    aggregates: tuple[float, ...]  # one per emotion, ordered like EMOTIONS

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(int(a > LABEL_THRESHOLD) for a in self.aggregates)


def aggregate_intensity(writer: int, readers: list[int]) -> float:
    """(writer * n + sum(readers)) / (2n): writer and mean reader, averaged."""
    if not readers:
        raise DatasetError("need at least one reader annotation")
    for value in [writer, *readers]:
        if not isinstance(value, int) or not 0 <= value <= 3:
            raise DatasetError(f"intensity {value!r} outside 0..3")
    n = len(readers)
    return (writer * n + sum(readers)) / (2 * n)


def _parse_header(header: str, path: Path) -> dict[str, list[int]]:
    """Map each emotion to its (writer, reader...) column indexes."""
    columns = header.rstrip("\n").split("\t")
    if not columns or columns[0] != "sentence":
        raise DatasetError(f"{path}: first column must be 'sentence'")
    layout: dict[str, list[int]] = {e: [] for e in EMOTIONS}
    for idx, name in enumerate(columns[1:], start=1):
        emotion, _, role = name.partition(":")
        if emotion not in layout or not role:
            raise DatasetError(f"{path}: unknown column {name!r}")
        if role == "writer":
            layout[emotion].insert(0, idx)
        elif role.startswith("reader"):
            layout[emotion].append(idx)
        else:
            raise DatasetError(f"{path}: unknown role in column {name!r}")
    for emotion, idxs in layout.items():
        if len(idxs) < 2:
            raise DatasetError(f"{path}: emotion {emotion} needs writer + >=1 reader columns")
    return layout


def _parse_file(path: Path) -> dict[str, tuple[float, ...]]:
    lines = path.read_text("utf-8").splitlines()
    if not lines:
        raise DatasetError(f"{path}: empty dataset")
    layout = _parse_header(lines[0], path)
    aggregates: dict[str, tuple[float, ...]] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split("\t")
        text = cells[0].strip()
        if not text:
            raise DatasetError(f"{path}:{lineno}: empty sentence")
        per_emotion = []
        try:
            for emotion in EMOTIONS:
                idxs = layout[emotion]
                writer = int(cells[idxs[0]])
                readers = [int(cells[i]) for i in idxs[1:]]
                per_emotion.append(aggregate_intensity(writer, readers))
        except (IndexError, ValueError) as exc:
            raise DatasetError(f"{path}:{lineno}: {exc}") from None
        aggregates[text] = tuple(per_emotion)
    if not aggregates:
        raise DatasetError(f"{path}: no data rows")
    return aggregates


def load_dataset(
    path: str | Path, reannotation_path: str | Path | None = None
) -> list[AnnotatedSentence]:
    """Load sentences with per-emotion aggregates; merge re-annotations by mean.

    Emits a warning (training still proceeds) when some emotion has no
    positively labeled sentence at all.
    """
    first = _parse_file(Path(path))
    if reannotation_path is not None:
        second = _parse_file(Path(reannotation_path))
        merged = {}
        for text, aggs in first.items():
            if text in second:
                merged[text] = tuple((a + b) / 2 for a, b in zip(aggs, second[text]))
            else:
                merged[text] = aggs
        first = merged
    sentences = [AnnotatedSentence(text=t, aggregates=a) for t, a in first.items()]
    for i, emotion in enumerate(EMOTIONS):
        if not any(s.labels[i] for s in sentences):
            logger.warning("no positive labels for emotion %s; training continues", emotion)
    return sentences
