import math

import pytest
from fastapi.testclient import TestClient

from conftest import TOY_KEYWORDS
from scorer_service.service import create_app


@pytest.fixture(scope="module")
def client(trained_artifacts):
    return TestClient(create_app(trained_artifacts))


def test_health_reports_model_identifiers(client):
    response = client.get("/health")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "ok"
    assert body["emotion_model"]
    assert body["fluency_model"]


def test_emotion_scores_match_request_length_and_range(client):
    texts = ["きょうは" + TOY_KEYWORDS["happiness"], "ふつうのぶん"]
    response = client.post("/score/emotion", json={"texts": texts, "emotion": "happiness"})
    assert response.status_code == 200
    scores = response.json()["scores"]
    assert len(scores) == 2
    assert all(0.0 <= s <= 1.0 for s in scores)


def test_classifier_separates_toy_keywords(client):
    happy = "きょうは" + TOY_KEYWORDS["happiness"]
    angry = "きょうは" + TOY_KEYWORDS["anger"]
    happy_score = client.post(
        "/score/emotion", json={"texts": [happy], "emotion": "happiness"}
    ).json()["scores"][0]
    angry_score = client.post(
        "/score/emotion", json={"texts": [angry], "emotion": "happiness"}
    ).json()["scores"][0]
    assert happy_score > 0.5
    assert angry_score < 0.5


def test_identical_texts_in_one_batch_score_identically(client):
    text = "なんどでも" + TOY_KEYWORDS["fear"]
    response = client.post(
        "/score/emotion", json={"texts": [text, text], "emotion": "fear"}
    )
    scores = response.json()["scores"]
    assert scores[0] == scores[1]
    plls = client.post("/score/fluency", json={"texts": [text, text]}).json()["plls"]
    assert plls[0] == plls[1]


def test_repeated_requests_score_identically(client):
    text = "ゆっくりと" + TOY_KEYWORDS["sadness"]
    first = client.post("/score/emotion", json={"texts": [text], "emotion": "sadness"})
    second = client.post("/score/emotion", json={"texts": [text], "emotion": "sadness"})
    assert first.json() == second.json()


def test_fluency_scores_finite_and_batch_invariant(client):
    alone = client.post("/score/fluency", json={"texts": ["たのしいひ"]}).json()["plls"][0]
    paired = client.post(
        "/score/fluency", json={"texts": ["たのしいひ", "べつのながいぶんしょう"]}
    ).json()["plls"]
    assert len(paired) == 2
    assert all(math.isfinite(p) for p in paired)
    assert paired[0] == alone  # composition of the batch does not matter


def test_empty_text_fluency_is_finite(client):
    plls = client.post("/score/fluency", json={"texts": [""]}).json()["plls"]
    assert plls == [0.0]


def test_unknown_emotion_is_422(client):
    response = client.post("/score/emotion", json={"texts": ["x"], "emotion": "joy"})
    assert response.status_code == 422
    assert "unknown emotion" in response.json()["error"]


def test_malformed_body_is_400(client):
    assert client.post("/score/emotion", json={"emotion": "anger"}).status_code == 400
    assert client.post("/score/emotion", json={"texts": "not-a-list", "emotion": "anger"}).status_code == 400
    assert client.post("/score/fluency", json={}).status_code == 400


def test_missing_artifacts_give_503(tmp_path):
    bare = TestClient(create_app(tmp_path / "nowhere"))
    assert bare.get("/health").status_code == 503
    assert bare.post("/score/emotion", json={"texts": ["x"], "emotion": "anger"}).status_code == 503
    assert bare.post("/score/fluency", json={"texts": ["x"]}).status_code == 503
