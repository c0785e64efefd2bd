"""Persistence for candidates, scores, plans, and the corpus manifest,
plus aggregation of forced-choice recognition responses.

All writers emit canonical JSON (sorted keys, fixed record order, UTF-8)
so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

from .model import Emotion, NVPhrase, Polarity, Script, SeedWord, Session
from .selection import SelectionPlan

NONE_OF_THE_ABOVE = "none_of_the_above"
CHOICE_LABELS = frozenset(e.value for e in Emotion) | {NONE_OF_THE_ABOVE}


class ManifestError(ValueError):
    pass


def script_to_record(s: Script) -> dict:
    return {
        "id": s.id,
        "text": s.text,
        "emotion": s.emotion.value,
        "session": s.session.value,
        "seed_word": {
            "surface": s.seed_word.surface,
            "polarity": s.seed_word.polarity.value,
            "flagged_inappropriate": s.seed_word.flagged_inappropriate,
        },
        "nv_phrase": None
        if s.nv_phrase is None
        else {
            "id": s.nv_phrase.id,
            "surface": s.nv_phrase.surface,
            "emotion": s.nv_phrase.emotion.value,
        },
        "emotion_score_raw": s.emotion_score_raw,
        "fluency_score_raw": s.fluency_score_raw,
        "combined_score": s.combined_score,
    }


def record_to_script(rec: dict) -> Script:
    seed = rec["seed_word"]
    phrase = rec.get("nv_phrase")
    return Script(
        id=rec["id"],
        text=rec["text"],
        emotion=Emotion.parse(rec["emotion"]),
        session=Session.parse(rec["session"]),
        seed_word=SeedWord(
            surface=seed["surface"],
            polarity=Polarity.parse(seed["polarity"]),
            flagged_inappropriate=bool(seed.get("flagged_inappropriate", False)),
        ),
        nv_phrase=None
        if phrase is None
        else NVPhrase(
            id=phrase["id"],
            surface=phrase["surface"],
            emotion=Emotion.parse(phrase["emotion"]),
        ),
        emotion_score_raw=rec.get("emotion_score_raw"),
        fluency_score_raw=rec.get("fluency_score_raw"),
        combined_score=rec.get("combined_score"),
    )


def write_json(payload: dict, path: str | Path) -> None:
    """Canonical JSON writer shared by every artifact this module emits."""
    Path(path).write_text(
        json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        "utf-8",
    )


def write_scripts(
    scripts: list[Script],
    path: str | Path,
    *,
    rng_seed: int,
    normalized: dict[str, tuple[float, float]] | None = None,
    report: dict | None = None,
) -> None:
    """Write a candidates or scored-candidates file (canonical JSON)."""
    records = []
    for s in sorted(scripts, key=lambda s: (s.emotion.value, s.session.value, s.id)):
        rec = script_to_record(s)
        if normalized is not None and s.id in normalized:
            rec["emotion_score_norm"], rec["fluency_score_norm"] = normalized[s.id]
        records.append(rec)
    meta: dict = {"rng_seed": rng_seed}
    if report is not None:
        meta["report"] = report
    write_json({"meta": meta, "scripts": records}, path)


def read_scripts(path: str | Path) -> tuple[list[Script], dict]:
    payload = json.loads(Path(path).read_text("utf-8"))
    return [record_to_script(rec) for rec in payload["scripts"]], payload.get("meta", {})


@dataclass(frozen=True)
class NVSpan:
    start: int
    end: int


@dataclass(frozen=True)
class ManifestRecord:
    id: str
    text: str
    emotion: Emotion
    session: Session
    seed_word: str
    set_name: str
    nv_surface: str | None = None
    nv_spans: tuple[NVSpan, ...] = ()
    nv_durations: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        if self.nv_surface is not None:
            if not self.nv_spans:
                raise ManifestError(f"record {self.id}: phrase given but no span")
            for span in self.nv_spans:
                if self.text[span.start : span.end] != self.nv_surface:
                    raise ManifestError(
                        f"record {self.id}: span [{span.start}, {span.end}) does not "
                        f"address {self.nv_surface!r}"
                    )
        for start, end in self.nv_durations:
            if not 0 <= start < end:
                raise ManifestError(
                    f"record {self.id}: duration [{start}, {end}) violates 0 <= start < end"
                )


@dataclass(frozen=True)
class CorpusManifest:
    corpus_name: str
    version: str
    rng_seed: int
    records: tuple[ManifestRecord, ...]


def _phrase_spans(text: str, surface: str) -> tuple[NVSpan, ...]:
    spans = []
    start = text.find(surface)
    while start != -1:
        spans.append(NVSpan(start=start, end=start + len(surface)))
        start = text.find(surface, start + 1)
    return tuple(spans)


def build_manifest(
    plans: list[SelectionPlan],
    *,
    corpus_name: str,
    version: str = "1",
    rng_seed: int = 0,
    durations: dict[str, list[tuple[float, float]]] | None = None,
) -> CorpusManifest:
    """Assemble a manifest from feasible plans; refuses infeasible ones."""
    infeasible = [p.quota_name for p in plans if not p.feasible]
    if infeasible:
        raise ManifestError(f"refusing to write manifest for infeasible plans: {infeasible}")
    records = []
    for plan in plans:
        for s in plan.selected_scripts():
            surface = s.nv_phrase.surface if s.nv_phrase else None
            spans = _phrase_spans(s.text, surface) if surface else ()
            if surface and not spans:
                raise ManifestError(f"record {s.id}: phrase {surface!r} not found in text")
            records.append(
                ManifestRecord(
                    id=s.id,
                    text=s.text,
                    emotion=s.emotion,
                    session=s.session,
                    seed_word=s.seed_word.surface,
                    set_name=plan.quota_name,
                    nv_surface=surface,
                    nv_spans=spans,
                    nv_durations=tuple((durations or {}).get(s.id, ())),
                )
            )
    records.sort(key=lambda r: (r.set_name, r.emotion.value, r.session.value, r.id))
    return CorpusManifest(
        corpus_name=corpus_name, version=version, rng_seed=rng_seed, records=tuple(records)
    )


def write_manifest(manifest: CorpusManifest, path: str | Path) -> None:
    payload = {
        "corpus": manifest.corpus_name,
        "version": manifest.version,
        "rng_seed": manifest.rng_seed,
        "records": [
            {
                "id": r.id,
                "text": r.text,
                "emotion": r.emotion.value,
                "session": r.session.value,
                "seed_word": r.seed_word,
                "set": r.set_name,
                "nv_phrase": None
                if r.nv_surface is None
                else {
                    "surface": r.nv_surface,
                    "spans": [[sp.start, sp.end] for sp in r.nv_spans],
                    "multiple": len(r.nv_spans) > 1,
                },
                "nv_durations": [[start, end] for start, end in r.nv_durations],
            }
            for r in manifest.records
        ],
    }
    write_json(payload, path)


def read_manifest(path: str | Path) -> CorpusManifest:
    payload = json.loads(Path(path).read_text("utf-8"))
    records = []
    for rec in payload["records"]:
        phrase = rec.get("nv_phrase")
        records.append(
            ManifestRecord(
                id=rec["id"],
                text=rec["text"],
                emotion=Emotion.parse(rec["emotion"]),
                session=Session.parse(rec["session"]),
                seed_word=rec["seed_word"],
                set_name=rec["set"],
                nv_surface=None if phrase is None else phrase["surface"],
                nv_spans=()
                if phrase is None
                else tuple(NVSpan(start=sp[0], end=sp[1]) for sp in phrase["spans"]),
                nv_durations=tuple(
                    (float(d[0]), float(d[1])) for d in rec.get("nv_durations", [])
                ),
            )
        )
    return CorpusManifest(
        corpus_name=payload["corpus"],
        version=payload["version"],
        rng_seed=payload["rng_seed"],
        records=tuple(records),
    )


def plan_to_dict(plan: SelectionPlan) -> dict:
    phrase_histogram: dict[str, int] = {}
    for s in plan.selected_scripts():
        if s.nv_phrase is not None:
            key = f"{s.emotion.value}/{s.nv_phrase.id}"
            phrase_histogram[key] = phrase_histogram.get(key, 0) + 1
    return {
        "quota_name": plan.quota_name,
        "feasible": plan.feasible,
        # reported, not enforced: emotions are balanced exactly, phrases only observed
        "phrase_histogram": phrase_histogram,
        "buckets": {
            f"{b[0].value}/{b[1].value}": {
                "quota": plan.quotas[b],
                "selected": [s.id for s in plan.selected.get(b, ())],
                "deficit": plan.deficits.get(b, 0),
            }
            for b in sorted(plan.quotas, key=lambda b: (b[0].value, b[1].value))
        },
        "displaced": list(plan.displaced),
        "injected": list(plan.injected),
        "coverage": {
            "entropy_before": plan.coverage.entropy_before,
            "entropy_after": plan.coverage.entropy_after,
            "gaps_before": list(plan.coverage.gaps_before),
            "gaps_after": list(plan.coverage.gaps_after),
            "unparsed": list(plan.coverage.unparsed),
        },
    }


@dataclass(frozen=True)
class ForcedChoiceResponse:
    item_id: str
    true_emotion: Emotion
    choice: str
    rater_id: str

    def __post_init__(self) -> None:
        if self.choice not in CHOICE_LABELS:
            raise ValueError(
                f"unknown choice {self.choice!r}; expected one of {sorted(CHOICE_LABELS)}"
            )

    @property
    def correct(self) -> bool:
        return self.choice == self.true_emotion.value


@dataclass(frozen=True)
class AccuracyReport:
    overall_pct: float
    per_emotion_pct: dict[str, float]
    total: int
    correct: int


def recognition_accuracy(responses: list[ForcedChoiceResponse]) -> AccuracyReport:
    """Forced-choice accuracy overall and per true emotion, in percent."""
    if not responses:
        raise ValueError("no responses")
    per: dict[str, list[bool]] = {}
    for r in responses:
        per.setdefault(r.true_emotion.value, []).append(r.correct)
    correct = sum(r.correct for r in responses)
    return AccuracyReport(
        overall_pct=100.0 * correct / len(responses),
        per_emotion_pct={
            emotion: 100.0 * sum(flags) / len(flags) for emotion, flags in sorted(per.items())
        },
        total=len(responses),
        correct=correct,
    )


def load_responses_csv(path: str | Path) -> list[ForcedChoiceResponse]:
    """Read `item_id,true_emotion,choice,rater_id` rows (header required)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"item_id", "true_emotion", "choice", "rater_id"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise ValueError(f"responses CSV must have columns {sorted(required)}")
        return [
            ForcedChoiceResponse(
                item_id=row["item_id"],
                true_emotion=Emotion.parse(row["true_emotion"]),
                choice=row["choice"].strip(),
                rater_id=row["rater_id"],
            )
            for row in reader
        ]
