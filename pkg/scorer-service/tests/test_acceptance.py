"""Service-level acceptance: training quality, wire contracts, determinism."""

from __future__ import annotations

import json
import math
import threading
import time
from pathlib import Path

import pytest
import uvicorn
from fastapi.testclient import TestClient

from conftest import TOY_KEYWORDS
from scorer_service.service import create_app


def _passed(name: str) -> None:
    print(f"[ACCEPT] {name}: PASS")


def test_toy_separable_training_quality(trained_artifacts):
    config = json.loads((trained_artifacts / "config.json").read_text("utf-8"))
    assert config["train_subset_accuracy"] > 0.9
    _passed(
        f"toy separable training (subset accuracy {config['train_subset_accuracy']:.3f} > 0.9)"
    )


def test_endpoint_contracts(trained_artifacts):
    client = TestClient(create_app(trained_artifacts))
    texts = ["きょうは" + TOY_KEYWORDS["surprise"], "ふつうのひ", "みじかい"]

    emotion = client.post("/score/emotion", json={"texts": texts, "emotion": "surprise"})
    assert emotion.status_code == 200
    scores = emotion.json()["scores"]
    assert len(scores) == len(texts)
    assert all(0.0 <= s <= 1.0 for s in scores)

    fluency = client.post("/score/fluency", json={"texts": texts})
    assert fluency.status_code == 200
    plls = fluency.json()["plls"]
    assert len(plls) == len(texts)
    assert all(math.isfinite(p) for p in plls)

    repeat = client.post("/score/emotion", json={"texts": [texts[0], texts[0]], "emotion": "surprise"})
    assert repeat.json()["scores"][0] == repeat.json()["scores"][1]
    _passed("endpoint contracts (lengths, ranges, identical-text determinism)")


def test_primary_package_never_imports_this_service():
    """The generation pipeline must run with the service absent; its source
    must not even reference this package (it reaches us over HTTP only)."""
    import nvscript

    primary_root = Path(nvscript.__file__).parent
    offenders = [
        path
        for path in primary_root.rglob("*.py")
        if "scorer_service" in path.read_text("utf-8")
    ]
    assert offenders == []
    _passed("primary independence (no scorer_service import in primary source)")


def test_primary_remote_backend_against_live_service(trained_artifacts):
    """The primary's remote_http scorer and this service share one wire contract."""
    from nvscript.model import Emotion, Polarity, Script, SeedWord, Session
    from nvscript.scoring import ScorerBackend, score_batch

    app = create_app(trained_artifacts)
    config = uvicorn.Config(app, host="127.0.0.1", port=0, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    try:
        deadline = time.monotonic() + 10
        while not server.started:
            if time.monotonic() > deadline:
                pytest.fail("service did not start")
            time.sleep(0.05)
        port = server.servers[0].sockets[0].getsockname()[1]

        scripts = [
            Script.create(
                text="きょうは" + TOY_KEYWORDS["happiness"],
                emotion=Emotion.HAPPINESS,
                session=Session.PHRASE_FREE,
                seed_word=SeedWord(surface="よろこび", polarity=Polarity.POSITIVE),
            ),
            Script.create(
                text="ゆっくりと" + TOY_KEYWORDS["sadness"],
                emotion=Emotion.SADNESS,
                session=Session.PHRASE_FREE,
                seed_word=SeedWord(surface="なみだ", polarity=Polarity.NEGATIVE),
            ),
        ]
        table = score_batch(scripts, ScorerBackend.remote(f"http://127.0.0.1:{port}"))
        assert set(table.scores) == {s.id for s in scripts}
        for e_raw, f_raw in table.scores.values():
            assert 0.0 <= e_raw <= 1.0
            assert math.isfinite(f_raw)
    finally:
        server.should_exit = True
        thread.join(timeout=10)
    _passed("wire contract (primary remote backend scored against live service)")
