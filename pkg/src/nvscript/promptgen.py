"""Few-shot prompt rendering: instruction, exemplars, and the final slot."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .model import Emotion, NVPhrase, SeedWord, Session

DEFAULT_EXEMPLAR_COUNT = 3


class PromptError(ValueError):
    pass


class ExemplarFileError(ValueError):
    pass


@dataclass(frozen=True)
class Exemplar:
    emotion: Emotion
    seed_word: str
    script: str
    nv_phrase: str | None = None


@dataclass(frozen=True)
class PromptTemplate:
    instruction_text: str
    exemplars: tuple[Exemplar, ...]
    session: Session

    def __post_init__(self) -> None:
        if self.session is Session.REGULAR and "interjection" not in self.instruction_text:
            raise PromptError('regular instruction must contain the word "interjection"')
        for ex in self.exemplars:
            if self.session is Session.REGULAR and ex.nv_phrase is None:
                raise PromptError(f"regular exemplar for {ex.emotion.value} lacks a phrase")
            if self.session is Session.PHRASE_FREE and ex.nv_phrase is not None:
                raise PromptError("phrase in phrase-free exemplar")


class _Defaulting(dict):
    def __missing__(self, key: str) -> str:
        return ""


def load_instruction(session: Session, path: str | Path | None = None) -> str:
    """Instruction text for a session; bundled asset when no path given."""
    if path is not None:
        return Path(path).read_text("utf-8")
    name = "instruction_regular.txt" if session is Session.REGULAR else "instruction_phrase_free.txt"
    return resources.files("nvscript.data").joinpath(name).read_text("utf-8")


def load_exemplars(
    path: str | Path | None = None, n: int = DEFAULT_EXEMPLAR_COUNT
) -> dict[tuple[Emotion, Session], tuple[Exemplar, ...]]:
    """Load the exemplar asset and enforce its invariants.

    Every (emotion, session) key must carry at least n exemplars, and the
    regular exemplars of one emotion must have pairwise distinct seed words
    and phrases. Violations are hard errors: a bad exemplar file would
    silently skew every generated prompt.
    """
    if path is None:
        raw = resources.files("nvscript.data").joinpath("exemplars.json").read_text("utf-8")
        label = "<bundled exemplars.json>"
    else:
        raw = Path(path).read_text("utf-8")
        label = str(path)
    try:
        records = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ExemplarFileError(f"{label}: invalid JSON: {exc}") from None
    if not isinstance(records, list):
        raise ExemplarFileError(f"{label}: expected a JSON list of records")

    grouped: dict[tuple[Emotion, Session], list[Exemplar]] = {}
    for idx, rec in enumerate(records):
        if not isinstance(rec, dict) or not {"emotion", "session", "seed", "script"} <= rec.keys():
            raise ExemplarFileError(
                f"{label}: record {idx} must carry emotion, session, seed, script"
            )
        emotion = Emotion.parse(rec["emotion"])
        session = Session.parse(rec["session"])
        phrase = rec.get("phrase")
        if session is Session.REGULAR and not phrase:
            raise ExemplarFileError(f"{label}: record {idx} is regular but has no phrase")
        if session is Session.PHRASE_FREE and phrase:
            raise ExemplarFileError(f"{label}: record {idx} is phrase-free but has a phrase")
        exemplar = Exemplar(
            emotion=emotion,
            seed_word=str(rec["seed"]),
            script=str(rec["script"]),
            nv_phrase=str(phrase) if phrase else None,
        )
        grouped.setdefault((emotion, session), []).append(exemplar)

    for emotion in Emotion:
        for session in (Session.REGULAR, Session.PHRASE_FREE):
            group = grouped.get((emotion, session), [])
            if len(group) < n:
                raise ExemplarFileError(
                    f"{label}: no exemplars for {emotion.value}/{session.value}"
                    if not group
                    else f"{label}: only {len(group)} exemplars for "
                    f"{emotion.value}/{session.value}, need {n}"
                )
    for emotion in Emotion:
        group = grouped[(emotion, Session.REGULAR)]
        seeds = [ex.seed_word for ex in group]
        phrases = [ex.nv_phrase for ex in group]
        if len(set(seeds)) != len(seeds):
            raise ExemplarFileError(
                f"{label}: overlapping seed words in {emotion.value}/regular exemplars"
            )
        if len(set(phrases)) != len(phrases):
            raise ExemplarFileError(
                f"{label}: overlapping phrases in {emotion.value}/regular exemplars"
            )
    return {key: tuple(group) for key, group in grouped.items()}


def build_template(
    exemplars: dict[tuple[Emotion, Session], tuple[Exemplar, ...]],
    emotion: Emotion,
    session: Session,
    instruction_text: str | None = None,
    n: int = DEFAULT_EXEMPLAR_COUNT,
) -> PromptTemplate:
    if instruction_text is None:
        instruction_text = load_instruction(session)
    group = exemplars[(emotion, session)][:n]
    return PromptTemplate(instruction_text=instruction_text, exemplars=group, session=session)


def _slot(emotion: Emotion, seed: str, phrase: str | None, script: str) -> str:
    lines = [f"emotion: {emotion.value}", f"seed word: {seed}"]
    if phrase is not None:
        lines.append(f"interjection: {phrase}")
    lines.append(f"script: {script}")
    return "\n".join(lines)


def render_prompt(
    template: PromptTemplate,
    emotion: Emotion,
    seed: SeedWord,
    phrase: NVPhrase | None = None,
) -> str:
    """Render instruction, exemplars in order, and the blank final slot."""
    if template.session is Session.REGULAR and phrase is None:
        raise PromptError("regular render requires a phrase")
    if template.session is Session.PHRASE_FREE and phrase is not None:
        raise PromptError("phrase in phrase-free render")
    for ex in template.exemplars:
        if ex.emotion is not emotion:
            raise PromptError(
                f"exemplar emotion {ex.emotion.value} does not match requested {emotion.value}"
            )
    instruction = template.instruction_text.format_map(
        _Defaulting(
            emotion=emotion.value,
            seed=seed.surface,
            phrase=phrase.surface if phrase else "",
        )
    ).strip()
    blocks = [instruction]
    for i, ex in enumerate(template.exemplars, start=1):
        blocks.append(f"# Example {i}\n" + _slot(ex.emotion, ex.seed_word, ex.nv_phrase, ex.script))
    blocks.append(
        "# Target\n"
        + _slot(emotion, seed.surface, phrase.surface if phrase else None, "")
    )
    return "\n\n".join(blocks) + "\n"
