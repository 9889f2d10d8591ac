"""Model backends: real transformer checkpoints and deterministic test doubles.

Every encoder returns float64 vectors of its declared width; every
classifier returns per-class scores in [0, 1] with a declared head type
("softmax" heads sum to 1 per text).  Transformer imports are lazy so the
service starts without torch installed when the test backend is selected.
"""

from __future__ import annotations

import hashlib

import numpy as np

from .config import SidecarConfig


class BackendLoadError(RuntimeError):
    """A checkpoint could not be loaded; the service answers 503."""


class HashEncoder:
    """Deterministic word n-gram hashing encoder (test backend)."""

    def __init__(self, dim: int, truncation: int):
        self.dim = dim
        self.truncation = truncation

    def encode(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for row, text in enumerate(texts):
            tokens = text.lower().split()[: self.truncation]
            for n in (1, 2):
                for i in range(len(tokens) - n + 1):
                    gram = " ".join(tokens[i : i + n])
                    digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
                    value = int.from_bytes(digest, "big")
                    sign = 1.0 if (value >> 63) & 1 else -1.0
                    out[row, value % self.dim] += sign
            norm = np.linalg.norm(out[row])
            if norm > 0:
                out[row] /= norm
        return out


class HashClassifier:
    """Deterministic per-class scores (test backend).

    Scores derive from hashes of (text, label); a softmax head normalizes
    to a distribution, a sigmoid head squashes each score independently.
    """

    def __init__(self, labels: tuple[str, ...], head: str):
        if head not in ("softmax", "sigmoid"):
            raise ValueError(f"unknown head {head!r}")
        self.labels = labels
        self.head = head

    def classify(self, texts: list[str]) -> np.ndarray:
        logits = np.zeros((len(texts), len(self.labels)), dtype=np.float64)
        for row, text in enumerate(texts):
            for col, label in enumerate(self.labels):
                digest = hashlib.blake2b(
                    f"{label}::{text}".encode("utf-8"), digest_size=8
                ).digest()
                logits[row, col] = (int.from_bytes(digest, "big") / 2**64) * 4.0 - 2.0
        if self.head == "softmax":
            shifted = logits - logits.max(axis=1, keepdims=True)
            expd = np.exp(shifted)
            return expd / expd.sum(axis=1, keepdims=True)
        return 1.0 / (1.0 + np.exp(-logits))


class TransformerEncoder:
    """Mean-pooled last hidden state of an encoder checkpoint."""

    def __init__(self, checkpoint: str, dim: int, truncation: int, device: str = "cpu"):
        try:
            import torch
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise BackendLoadError(f"transformers backend unavailable: {exc}") from exc
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(checkpoint)
            self._model = AutoModel.from_pretrained(checkpoint).to(device).eval()
        except Exception as exc:
            raise BackendLoadError(f"cannot load encoder {checkpoint!r}: {exc}") from exc
        self._torch = torch
        self.device = device
        self.truncation = truncation
        self.dim = int(self._model.config.hidden_size)
        if self.dim != dim:
            raise BackendLoadError(
                f"encoder {checkpoint!r} has width {self.dim}, config declares {dim}"
            )

    def encode(self, texts: list[str]) -> np.ndarray:
        torch = self._torch
        batch = self._tokenizer(
            texts, padding=True, truncation=True, max_length=self.truncation,
            return_tensors="pt",
        ).to(self.device)
        with torch.no_grad():
            hidden = self._model(**batch).last_hidden_state
        mask = batch["attention_mask"].unsqueeze(-1).to(hidden.dtype)
        summed = (hidden * mask).sum(dim=1)
        counts = mask.sum(dim=1).clamp(min=1.0)
        return (summed / counts).cpu().double().numpy()


class TransformerClassifier:
    """Sequence-classification checkpoint with a softmax or sigmoid head."""

    def __init__(self, checkpoint: str, labels: tuple[str, ...], truncation: int,
                 device: str = "cpu", head: str = "softmax"):
        try:
            import torch
            from transformers import AutoModelForSequenceClassification, AutoTokenizer
        except ImportError as exc:
            raise BackendLoadError(f"transformers backend unavailable: {exc}") from exc
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(checkpoint)
            self._model = AutoModelForSequenceClassification.from_pretrained(checkpoint)
            self._model = self._model.to(device).eval()
        except Exception as exc:
            raise BackendLoadError(f"cannot load classifier {checkpoint!r}: {exc}") from exc
        n_out = int(self._model.config.num_labels)
        if n_out != len(labels):
            raise BackendLoadError(
                f"classifier {checkpoint!r} has {n_out} labels, config declares {len(labels)}"
            )
        self._torch = torch
        self.device = device
        self.truncation = truncation
        self.labels = labels
        self.head = head

    def classify(self, texts: list[str]) -> np.ndarray:
        torch = self._torch
        batch = self._tokenizer(
            texts, padding=True, truncation=True, max_length=self.truncation,
            return_tensors="pt",
        ).to(self.device)
        with torch.no_grad():
            logits = self._model(**batch).logits
        if self.head == "softmax":
            scores = torch.softmax(logits, dim=-1)
        else:
            scores = torch.sigmoid(logits)
        return scores.cpu().double().numpy()


class ModelBundle:
    """The three models the service exposes, built per configuration."""

    def __init__(self, encoder, basic, fine, config: SidecarConfig):
        self.encoder = encoder
        self.basic = basic
        self.fine = fine
        self.config = config

    @classmethod
    def from_config(cls, config: SidecarConfig) -> "ModelBundle":
        if config.backend == "test":
            return cls(
                encoder=HashEncoder(config.encoder_dim, config.truncation),
                basic=HashClassifier(config.basic_labels, head="softmax"),
                fine=HashClassifier(config.fine_labels, head="sigmoid"),
                config=config,
            )
        return cls(
            encoder=TransformerEncoder(
                config.encoder_checkpoint, config.encoder_dim, config.truncation, config.device
            ),
            basic=TransformerClassifier(
                config.basic_checkpoint, config.basic_labels, config.truncation,
                config.device, head="softmax",
            ),
            fine=TransformerClassifier(
                config.fine_checkpoint, config.fine_labels, config.truncation,
                config.device, head="sigmoid",
            ),
            config=config,
        )
