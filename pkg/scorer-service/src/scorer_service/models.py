"""Character vocabulary and tiny RoBERTa-architecture model builders.

Models are built from configs, never downloaded: this keeps the service
fully offline. Swap in pretrained Japanese checkpoints by pointing the
artifact config at them in an environment with model access.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import torch
from transformers import RobertaConfig, RobertaForMaskedLM, RobertaForSequenceClassification

from . import EMOTIONS

PAD, UNK, MASK, BOS = 0, 1, 2, 3
RESERVED = ("<pad>", "<unk>", "<mask>", "<bos>")
MAX_LEN = 128


@dataclass(frozen=True)
class CharVocab:
    chars: tuple[str, ...]

    @classmethod
    def build(cls, texts: list[str]) -> "CharVocab":
        return cls(chars=tuple(sorted({ch for t in texts for ch in t})))

    @property
    def size(self) -> int:
        return len(RESERVED) + len(self.chars)

    def encode(self, text: str) -> list[int]:
        index = {ch: i + len(RESERVED) for i, ch in enumerate(self.chars)}
        ids = [BOS] + [index.get(ch, UNK) for ch in text[: MAX_LEN - 1]]
        return ids

    def save(self, path: Path) -> None:
        path.write_text(json.dumps({"chars": list(self.chars)}, ensure_ascii=False), "utf-8")

    @classmethod
    def load(cls, path: Path) -> "CharVocab":
        return cls(chars=tuple(json.loads(path.read_text("utf-8"))["chars"]))


def _roberta_config(vocab_size: int) -> RobertaConfig:
    return RobertaConfig(
        vocab_size=vocab_size,
        hidden_size=64,
        num_hidden_layers=2,
        num_attention_heads=4,
        intermediate_size=128,
        max_position_embeddings=MAX_LEN + 64,
        pad_token_id=PAD,
        num_labels=len(EMOTIONS),
    )


def build_classifier(vocab: CharVocab, seed: int = 0) -> RobertaForSequenceClassification:
    torch.manual_seed(seed)
    return RobertaForSequenceClassification(_roberta_config(vocab.size))


def build_masked_lm(vocab: CharVocab, seed: int = 0) -> RobertaForMaskedLM:
    torch.manual_seed(seed)
    return RobertaForMaskedLM(_roberta_config(vocab.size))


def pad_batch(encoded: list[list[int]]) -> tuple[torch.Tensor, torch.Tensor]:
    width = max(len(ids) for ids in encoded)
    input_ids = torch.full((len(encoded), width), PAD, dtype=torch.long)
    attention = torch.zeros((len(encoded), width), dtype=torch.long)
    for row, ids in enumerate(encoded):
        input_ids[row, : len(ids)] = torch.tensor(ids, dtype=torch.long)
        attention[row, : len(ids)] = 1
    return input_ids, attention
