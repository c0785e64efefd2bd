"""Scoring microservice: multi-label emotion classifier and PLL fluency scorer."""

__version__ = "0.1.0"

EMOTIONS = ("anger", "disgust", "fear", "happiness", "sadness", "surprise")
