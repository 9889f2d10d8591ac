"""Sidecar configuration.

The default checkpoints are the published models this service was built
around; all of them are replaceable, and the ``test`` backend swaps every
model for a deterministic hash-based stand-in (same widths, same heads).
"""

from __future__ import annotations

from dataclasses import dataclass

BASIC_LABELS = ("sadness", "joy", "love", "anger", "fear", "surprise")
FINE_LABELS = (
    "admiration", "amusement", "anger", "annoyance", "approval", "caring",
    "confusion", "curiosity", "desire", "disappointment", "disapproval",
    "disgust", "embarrassment", "excitement", "fear", "gratitude", "grief",
    "joy", "love", "nervousness", "optimism", "pride", "realization",
    "relief", "remorse", "sadness", "surprise", "neutral",
)


@dataclass
class SidecarConfig:
    backend: str = "transformers"          # transformers | test
    encoder_checkpoint: str = "roberta-large"
    encoder_dim: int = 1024
    basic_checkpoint: str = "bhadresh-savani/distilbert-base-uncased-emotion"
    fine_checkpoint: str = "bhadresh-savani/bert-base-go-emotion"
    basic_labels: tuple[str, ...] = BASIC_LABELS
    fine_labels: tuple[str, ...] = FINE_LABELS
    truncation: int = 512
    max_batch: int = 64
    host: str = "127.0.0.1"
    port: int = 8810
    device: str = "cpu"

    def __post_init__(self):
        if self.backend not in ("transformers", "test"):
            raise ValueError(f"backend must be 'transformers' or 'test', got {self.backend!r}")
        if self.encoder_dim < 1 or self.max_batch < 1 or self.truncation < 1:
            raise ValueError("encoder_dim, max_batch and truncation must be positive")
