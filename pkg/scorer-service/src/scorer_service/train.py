"""Multi-label emotion classifier training with binary cross-entropy."""

from __future__ import annotations

import json
import logging
import random
from dataclasses import asdict, dataclass
from pathlib import Path

import torch
from torch import nn

from . import EMOTIONS
from .models import CharVocab, build_classifier, pad_batch
from .wrime import AnnotatedSentence, load_dataset

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Hyperparams:
    learning_rate: float = 1e-4
    batch_size: int = 64
    weight_decay: float = 1e-5
    epochs: int = 10
    seed: int = 0
    validation_fraction: float = 0.1

    @property
    def patience(self) -> int:
        # early stop when validation loss stalls for half the epoch budget
        return max(1, self.epochs // 2)


@dataclass(frozen=True)
class TrainResult:
    artifacts_dir: Path
    train_subset_accuracy: float
    train_label_accuracy: float
    epochs_run: int


def _batches(items: list, size: int, rng: random.Random) -> list[list]:
    shuffled = items[:]
    rng.shuffle(shuffled)
    return [shuffled[i : i + size] for i in range(0, len(shuffled), size)]


def _forward_loss(model, vocab, batch: list[AnnotatedSentence], loss_fn) -> torch.Tensor:
    input_ids, attention = pad_batch([vocab.encode(s.text) for s in batch])
    logits = model(input_ids=input_ids, attention_mask=attention).logits
    targets = torch.tensor([s.labels for s in batch], dtype=torch.float)
    return loss_fn(logits, targets)


@torch.no_grad()
def _accuracy(model, vocab, data: list[AnnotatedSentence]) -> tuple[float, float]:
    """(subset accuracy, per-label accuracy) of thresholded sigmoid outputs."""
    model.eval()
    exact = 0
    label_hits = 0
    for s in data:
        input_ids, attention = pad_batch([vocab.encode(s.text)])
        probs = torch.sigmoid(model(input_ids=input_ids, attention_mask=attention).logits[0])
        predicted = tuple(int(p > 0.5) for p in probs.tolist())
        exact += predicted == s.labels
        label_hits += sum(p == t for p, t in zip(predicted, s.labels))
    return exact / len(data), label_hits / (len(data) * len(EMOTIONS))


def train_classifier(
    wrime_path: str | Path,
    hyperparams: Hyperparams | None = None,
    artifacts_dir: str | Path = "artifacts/emotion",
    reannotation_path: str | Path | None = None,
    model_id: str = "char-roberta-tiny",
) -> TrainResult:
    """Train the classifier and persist model, vocab, config, and log."""
    hp = hyperparams or Hyperparams()
    data = load_dataset(wrime_path, reannotation_path)
    rng = random.Random(hp.seed)
    torch.manual_seed(hp.seed)

    vocab = CharVocab.build([s.text for s in data])
    model = build_classifier(vocab, seed=hp.seed)
    optimizer = torch.optim.Adam(
        model.parameters(), lr=hp.learning_rate, weight_decay=hp.weight_decay
    )
    loss_fn = nn.BCEWithLogitsLoss()

    holdout = max(1, int(len(data) * hp.validation_fraction))
    shuffled = data[:]
    rng.shuffle(shuffled)
    val_data, train_data = shuffled[:holdout], shuffled[holdout:]
    if not train_data:
        train_data, val_data = shuffled, shuffled

    log: list[dict] = []
    best_val = float("inf")
    stale = 0
    epochs_run = 0
    for epoch in range(hp.epochs):
        model.train()
        epoch_loss = 0.0
        batches = _batches(train_data, hp.batch_size, rng)
        for batch in batches:
            optimizer.zero_grad()
            loss = _forward_loss(model, vocab, batch, loss_fn)
            loss.backward()
            optimizer.step()
            epoch_loss += loss.item()
        model.eval()
        with torch.no_grad():
            val_loss = sum(
                _forward_loss(model, vocab, batch, loss_fn).item()
                for batch in _batches(val_data, hp.batch_size, rng)
            )
        log.append({"epoch": epoch, "train_loss": epoch_loss, "val_loss": val_loss})
        epochs_run = epoch + 1
        if val_loss < best_val - 1e-6:
            best_val = val_loss
            stale = 0
        else:
            stale += 1
            if stale >= hp.patience:
                logger.info("early stop at epoch %d", epoch)
                break

    subset_acc, label_acc = _accuracy(model, vocab, data)
    out = Path(artifacts_dir)
    out.mkdir(parents=True, exist_ok=True)
    torch.save(model.state_dict(), out / "model.pt")
    vocab.save(out / "vocab.json")
    (out / "config.json").write_text(
        json.dumps(
            {
                "model_id": model_id,
                "emotions": list(EMOTIONS),
                "hyperparams": asdict(hp),
                "train_subset_accuracy": subset_acc,
                "train_label_accuracy": label_acc,
            },
            indent=2,
        ),
        "utf-8",
    )
    (out / "training_log.json").write_text(json.dumps(log, indent=2), "utf-8")
    return TrainResult(
        artifacts_dir=out,
        train_subset_accuracy=subset_acc,
        train_label_accuracy=label_acc,
        epochs_run=epochs_run,
    )


def load_classifier(artifacts_dir: str | Path):
    """(model in eval mode, vocab, config dict) from a training run."""
    out = Path(artifacts_dir)
    vocab = CharVocab.load(out / "vocab.json")
    config = json.loads((out / "config.json").read_text("utf-8"))
    model = build_classifier(vocab, seed=0)
    model.load_state_dict(torch.load(out / "model.pt", weights_only=True))
    model.eval()
    return model, vocab, config
