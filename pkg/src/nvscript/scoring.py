"""Emotion-recognizability and fluency scoring, normalization, combination.

Three interchangeable backends: a remote HTTP scorer (classifier +
masked-LM service), a precomputed score table on disk, and a fully offline
keyword baseline. The baseline exists so the pipeline runs and tests
without any model; it makes no fidelity claim.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import requests

from .model import Emotion, Script

OOV_PENALTY_FLOOR = -1.0


class ScoringError(Exception):
    pass


@dataclass(frozen=True)
class ScorerBackend:
    kind: str
    base_url: str = ""
    table_path: str = ""

    _KINDS = ("remote_http", "precomputed_file", "lexicon_baseline")

    def __post_init__(self) -> None:
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown backend kind {self.kind!r}")
        if self.kind == "remote_http" and not self.base_url:
            raise ValueError("remote_http backend requires a base URL")
        if self.kind == "precomputed_file" and not self.table_path:
            raise ValueError("precomputed_file backend requires a score table path")

    @classmethod
    def remote(cls, base_url: str) -> "ScorerBackend":
        return cls(kind="remote_http", base_url=base_url.rstrip("/"))

    @classmethod
    def precomputed(cls, table_path: str | Path) -> "ScorerBackend":
        return cls(kind="precomputed_file", table_path=str(table_path))

    @classmethod
    def baseline(cls) -> "ScorerBackend":
        return cls(kind="lexicon_baseline")


@dataclass(frozen=True)
class ScoreTable:
    """Raw scores per script id; ids a backend could not score go to missing."""

    scores: dict[str, tuple[float, float]]
    missing: tuple[str, ...] = ()

    def emotion_raw(self, script_id: str) -> float:
        return self.scores[script_id][0]

    def fluency_raw(self, script_id: str) -> float:
        return self.scores[script_id][1]


_KEYWORDS: dict[Emotion, tuple[str, ...]] | None = None


def _keywords() -> dict[Emotion, tuple[str, ...]]:
    global _KEYWORDS
    if _KEYWORDS is None:
        raw = resources.files("nvscript.data").joinpath("emotion_keywords.json").read_text("utf-8")
        _KEYWORDS = {Emotion.parse(k): tuple(v) for k, v in json.loads(raw).items()}
    return _KEYWORDS


def _is_kana_like(ch: str) -> bool:
    return (
        "ぁ" <= ch <= "ゟ"
        or "゠" <= ch <= "ヿ"
        or ch in "、。！？・「」『』（）…‥〜～，．!?.,:;()[]{}\"'“”‘’ 　"
    )


def baseline_emotion_score(text: str, emotion: Emotion) -> float:
    """Sigmoid of (target keyword hits - other-emotion keyword hits)."""
    keywords = _keywords()
    target_hits = sum(text.count(k) for k in keywords[emotion])
    other_hits = sum(
        text.count(k) for e, ks in keywords.items() if e is not emotion for k in ks
    )
    return 1.0 / (1.0 + math.exp(-(target_hits - other_hits)))


def baseline_fluency_score(text: str) -> float:
    """Negated out-of-vocabulary character ratio; 0 is best, -1 worst."""
    chars = [ch for ch in text if not ch.isspace()]
    if not chars:
        return OOV_PENALTY_FLOOR
    oov = sum(1 for ch in chars if not _is_kana_like(ch))
    return -oov / len(chars)


def load_precomputed(path: str | Path) -> dict[str, tuple[float, float]]:
    """Read a `script_id<TAB>emotion_score<TAB>fluency_score` table."""
    table: dict[str, tuple[float, float]] = {}
    for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ScoringError(f"{path}:{lineno}: expected 3 tab-separated columns")
        try:
            table[parts[0]] = (float(parts[1]), float(parts[2]))
        except ValueError:
            raise ScoringError(f"{path}:{lineno}: non-numeric score") from None
    return table


def _score_remote(scripts: list[Script], base_url: str) -> ScoreTable:
    scores: dict[str, tuple[float, float]] = {}
    by_emotion: dict[Emotion, list[Script]] = {}
    for s in scripts:
        by_emotion.setdefault(s.emotion, []).append(s)
    try:
        for emotion, group in by_emotion.items():
            texts = [s.text for s in group]
            emo_resp = requests.post(
                f"{base_url}/score/emotion",
                json={"texts": texts, "emotion": emotion.value},
                timeout=120,
            )
            emo_resp.raise_for_status()
            flu_resp = requests.post(
                f"{base_url}/score/fluency", json={"texts": texts}, timeout=120
            )
            flu_resp.raise_for_status()
            emo_scores = emo_resp.json()["scores"]
            plls = flu_resp.json()["plls"]
            if len(emo_scores) != len(group) or len(plls) != len(group):
                raise ScoringError(
                    f"scorer service returned {len(emo_scores)}/{len(plls)} scores "
                    f"for {len(group)} texts"
                )
            for s, e_raw, f_raw in zip(group, emo_scores, plls):
                scores[s.id] = (float(e_raw), float(f_raw))
    except (requests.RequestException, KeyError, json.JSONDecodeError) as exc:
        raise ScoringError(f"scorer service unreachable or malformed: {exc}") from None
    return ScoreTable(scores=scores)


def score_batch(scripts: list[Script], backend: ScorerBackend) -> ScoreTable:
    """Score every script with the backend; raw values only, no normalization."""
    if not scripts:
        raise ScoringError("no scripts to score")
    if backend.kind == "lexicon_baseline":
        return ScoreTable(
            scores={
                s.id: (baseline_emotion_score(s.text, s.emotion), baseline_fluency_score(s.text))
                for s in scripts
            }
        )
    if backend.kind == "precomputed_file":
        table = load_precomputed(backend.table_path)
        missing = [s.id for s in scripts if s.id not in table]
        if missing:
            raise ScoringError(
                f"precomputed table missing {len(missing)} ids: {', '.join(sorted(missing))}"
            )
        return ScoreTable(scores={s.id: table[s.id] for s in scripts})
    return _score_remote(scripts, backend.base_url)


def normalize(scores: list[float]) -> list[float]:
    """Min-max normalize onto [0, 1]; a constant list maps to all 0.5."""
    if not scores:
        raise ValueError("cannot normalize an empty list")
    if any(not math.isfinite(x) for x in scores):
        raise ValueError("scores must be finite")
    lo, hi = min(scores), max(scores)
    if hi == lo:
        return [0.5] * len(scores)
    return [(x - lo) / (hi - lo) for x in scores]


def combine(e_norm: float, f_norm: float) -> float:
    """Sum of the two normalized scores; the selection key."""
    for name, value in (("emotion", e_norm), ("fluency", f_norm)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} score {value} outside [0, 1]")
    return e_norm + f_norm


def aggregate_wrime_intensity(writer: int, readers: list[int]) -> float:
    """Weighted average of writer and mean reader intensity, in [0, 3].

    Computed as (writer * n + sum(readers)) / (2 * n), which is the same
    quantity but exact in floating point for small rationals like 4/3.
    """
    if not readers:
        raise ValueError("need at least one reader annotation")
    for value in [writer, *readers]:
        if not isinstance(value, int) or not 0 <= value <= 3:
            raise ValueError(f"intensity {value!r} outside 0..3")
    n = len(readers)
    return (writer * n + sum(readers)) / (2 * n)


def has_emotion(aggregate: float) -> bool:
    return aggregate > 1.0


@dataclass(frozen=True)
class ScoredPool:
    """Scripts with raw + combined scores attached, plus per-id normalized pairs."""

    scripts: tuple[Script, ...]
    normalized: dict[str, tuple[float, float]] = field(default_factory=dict)
    dropped: tuple[str, ...] = ()


def attach_scores(scripts: list[Script], backend: ScorerBackend) -> ScoredPool:
    """Score, normalize within each emotion's candidate pool, and combine.

    Normalizing per emotion keeps cross-emotion calibration differences of
    the classifier from distorting selection.
    """
    table = score_batch(scripts, backend)
    scorable = [s for s in scripts if s.id in table.scores]
    dropped = tuple(s.id for s in scripts if s.id not in table.scores)
    out: list[Script] = []
    normalized: dict[str, tuple[float, float]] = {}
    for emotion in Emotion:
        pool = [s for s in scorable if s.emotion is emotion]
        if not pool:
            continue
        e_norms = normalize([table.emotion_raw(s.id) for s in pool])
        f_norms = normalize([table.fluency_raw(s.id) for s in pool])
        for s, e_n, f_n in zip(pool, e_norms, f_norms):
            normalized[s.id] = (e_n, f_n)
            out.append(
                s.with_scores(
                    emotion_score_raw=table.emotion_raw(s.id),
                    fluency_score_raw=table.fluency_raw(s.id),
                    combined_score=combine(e_n, f_n),
                )
            )
    return ScoredPool(scripts=tuple(out), normalized=normalized, dropped=dropped)
