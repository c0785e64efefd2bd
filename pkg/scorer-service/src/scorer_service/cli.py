"""Train the classifier or serve the scoring API."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .train import Hyperparams, train_classifier


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scorer-service")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train the multi-label emotion classifier")
    p_train.add_argument("--data", required=True, type=Path, help="intensity-annotated TSV")
    p_train.add_argument("--reannotations", type=Path, default=None)
    p_train.add_argument("--artifacts", type=Path, default=Path("artifacts/emotion"))
    p_train.add_argument("--learning-rate", type=float, default=1e-4)
    p_train.add_argument("--batch-size", type=int, default=64)
    p_train.add_argument("--weight-decay", type=float, default=1e-5)
    p_train.add_argument("--epochs", type=int, default=10)
    p_train.add_argument("--seed", type=int, default=0)

    p_serve = sub.add_parser("serve", help="serve /score/emotion, /score/fluency, /health")
    p_serve.add_argument(
        "--artifacts",
        type=Path,
        default=Path(os.environ.get("SCORER_ARTIFACTS", "artifacts/emotion")),
    )
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8901)
    p_serve.add_argument("--fluency-seed", type=int, default=0)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO)
    args = build_parser().parse_args(argv)
    if args.command == "train":
        result = train_classifier(
            args.data,
            Hyperparams(
                learning_rate=args.learning_rate,
                batch_size=args.batch_size,
                weight_decay=args.weight_decay,
                epochs=args.epochs,
                seed=args.seed,
            ),
            artifacts_dir=args.artifacts,
            reannotation_path=args.reannotations,
        )
        print(
            f"trained {result.epochs_run} epochs; train subset accuracy "
            f"{result.train_subset_accuracy:.3f} -> {result.artifacts_dir}"
        )
        return 0

    import uvicorn

    from .service import create_app

    app = create_app(args.artifacts, fluency_seed=args.fluency_seed)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
