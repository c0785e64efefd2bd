"""Masked-LM pseudo-log-likelihood: mask each token in turn, average.

Each text is scored independently (its own forward batch), so a text's
score never depends on what else is in the request.
"""

from __future__ import annotations

import torch

from .models import BOS, MASK, CharVocab, build_masked_lm, pad_batch


class PllScorer:
    def __init__(self, vocab: CharVocab, seed: int = 0, model_id: str = "char-mlm-tiny"):
        self.vocab = vocab
        self.model_id = f"{model_id}-seed{seed}"
        self.model = build_masked_lm(vocab, seed=seed)
        self.model.eval()

    @torch.no_grad()
    def score(self, text: str) -> float:
        """Mean per-token masked log-likelihood; 0.0 for empty text."""
        ids = self.vocab.encode(text)
        content = [i for i in range(len(ids)) if ids[i] != BOS]
        if not content:
            return 0.0
        variants = []
        for pos in content:
            masked = ids[:]
            masked[pos] = MASK
            variants.append(masked)
        input_ids, attention = pad_batch(variants)
        logits = self.model(input_ids=input_ids, attention_mask=attention).logits
        log_probs = torch.log_softmax(logits, dim=-1)
        total = 0.0
        for row, pos in enumerate(content):
            total += log_probs[row, pos, ids[pos]].item()
        return total / len(content)

    def score_batch(self, texts: list[str]) -> list[float]:
        return [self.score(t) for t in texts]
