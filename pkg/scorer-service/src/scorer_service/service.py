"""HTTP JSON API over the emotion classifier and the PLL fluency scorer."""

from __future__ import annotations

from pathlib import Path

import torch
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import EMOTIONS
from .models import pad_batch
from .pll import PllScorer
from .train import load_classifier


class EmotionScoreRequest(BaseModel):
    texts: list[str]
    emotion: str


class FluencyScoreRequest(BaseModel):
    texts: list[str]


class LoadedModels:
    def __init__(self, emotion_artifacts: str | Path | None, fluency_seed: int = 0):
        self.classifier = None
        self.vocab = None
        self.config: dict = {}
        self.pll: PllScorer | None = None
        if emotion_artifacts is not None and Path(emotion_artifacts).exists():
            self.classifier, self.vocab, self.config = load_classifier(emotion_artifacts)
            self.pll = PllScorer(self.vocab, seed=fluency_seed)

    @property
    def ready(self) -> bool:
        return self.classifier is not None and self.pll is not None

    @torch.no_grad()
    def emotion_scores(self, texts: list[str], emotion: str) -> list[float]:
        idx = EMOTIONS.index(emotion)
        scores = []
        for text in texts:  # one text per forward pass: batch-composition invariant
            input_ids, attention = pad_batch([self.vocab.encode(text)])
            logits = self.classifier(input_ids=input_ids, attention_mask=attention).logits[0]
            scores.append(float(torch.sigmoid(logits)[idx]))
        return scores


def create_app(
    emotion_artifacts: str | Path | None, fluency_seed: int = 0
) -> FastAPI:
    app = FastAPI(title="scorer-service")
    models = LoadedModels(emotion_artifacts, fluency_seed=fluency_seed)

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "malformed request body"})

    def _unavailable() -> JSONResponse:
        return JSONResponse(status_code=503, content={"error": "model not loaded"})

    @app.get("/health")
    def health():
        if not models.ready:
            return _unavailable()
        return {
            "status": "ok",
            "emotion_model": models.config.get("model_id", "unknown"),
            "fluency_model": models.pll.model_id,
        }

    @app.post("/score/emotion")
    def score_emotion(request: EmotionScoreRequest):
        if not models.ready:
            return _unavailable()
        if request.emotion not in EMOTIONS:
            return JSONResponse(
                status_code=422,
                content={"error": f"unknown emotion {request.emotion!r}"},
            )
        return {"scores": models.emotion_scores(request.texts, request.emotion)}

    @app.post("/score/fluency")
    def score_fluency(request: FluencyScoreRequest):
        if not models.ready:
            return _unavailable()
        return {"plls": models.pll.score_batch(request.texts)}

    return app
