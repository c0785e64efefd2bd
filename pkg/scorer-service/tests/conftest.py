from __future__ import annotations

import random
from pathlib import Path

import pytest

from scorer_service import EMOTIONS
from scorer_service.train import Hyperparams, train_classifier

# One unmistakable kana keyword per emotion makes the toy set separable by
# construction: the keyword alone determines the label vector.
TOY_KEYWORDS = {
    "anger": "いかりがわく",
    "disgust": "むしずがはしる",
    "fear": "きょうふをかんじる",
    "happiness": "よろこびにあふれる",
    "sadness": "なみだがながれる",
    "surprise": "おどろきのあまり",
}
_FILLER = [
    "きょうは", "あのとき", "ともだちと", "しごとで", "いえのなかで",
    "まちかどで", "すこしだけ", "なんどでも", "ゆっくりと", "とつぜんに",
]


def write_toy_dataset(path: Path, rows: int = 100, seed: int = 5, readers: int = 3) -> None:
    rng = random.Random(seed)
    header = ["sentence"]
    for emotion in EMOTIONS:
        header.append(f"{emotion}:writer")
        header.extend(f"{emotion}:reader{k}" for k in range(1, readers + 1))
    lines = ["\t".join(header)]
    for i in range(rows):
        emotion = EMOTIONS[i % len(EMOTIONS)]
        text = rng.choice(_FILLER) + TOY_KEYWORDS[emotion] + rng.choice(_FILLER) + str(i)
        cells = [text]
        for e in EMOTIONS:
            value = "3" if e == emotion else "0"
            cells.extend([value] * (readers + 1))
        lines.append("\t".join(cells))
    path.write_text("\n".join(lines) + "\n", "utf-8")


@pytest.fixture(scope="session")
def toy_dataset(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("data") / "toy.tsv"
    write_toy_dataset(path)
    return path


@pytest.fixture(scope="session")
def toy_hyperparams() -> Hyperparams:
    # the appendix-style defaults are for full-corpus training; the toy
    # run uses a hotter schedule to converge within the test budget
    return Hyperparams(learning_rate=2e-3, batch_size=16, epochs=40, seed=0)


@pytest.fixture(scope="session")
def trained_artifacts(toy_dataset, toy_hyperparams, tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("artifacts") / "emotion"
    train_classifier(toy_dataset, toy_hyperparams, artifacts_dir=out)
    return out
