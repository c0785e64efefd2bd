"""Toolkit for constructing emotional speech-corpus scripts.

Pipeline: sample polarity-routed seed words and NV phrases, prompt an LLM
with few-shot templates, score candidates for emotion recognizability and
fluency, select a quota-balanced script set, and report phoneme coverage.
"""

from .model import Emotion, NVPhrase, Polarity, Script, SeedWord, Session, validate_script

__all__ = [
    "Emotion",
    "Session",
    "Polarity",
    "SeedWord",
    "NVPhrase",
    "Script",
    "validate_script",
]

__version__ = "0.1.0"
