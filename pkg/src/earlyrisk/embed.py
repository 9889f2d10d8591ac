"""Fixed-width document embeddings behind interchangeable providers.

Three providers cover the workbench's needs: a deterministic hashing
encoder for tests and offline runs, a JSONL file cache (typically exported
by the inference sidecar), and an HTTP client for a live sidecar.  All of
them truncate input to a token limit, keeping the head of the document.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import CacheMissError, ConfigurationError, DomainError, TransportError

DEFAULT_ENCODER_DIM = 1024
DEFAULT_TRUNCATION = 512


@dataclass(frozen=True, eq=False)
class Embedding:
    vector: np.ndarray
    provider_id: str
    truncation_limit: int = DEFAULT_TRUNCATION
    degenerate: bool = False

    def __len__(self) -> int:
        return len(self.vector)


def _as_vector(value) -> np.ndarray:
    vector = np.asarray(value.vector if isinstance(value, Embedding) else value, dtype=np.float64)
    if vector.ndim != 1:
        raise DomainError(f"expected a 1-d vector, got shape {vector.shape}")
    return vector


def cosine(a, b) -> float:
    """Standard cosine similarity; rejects zero vectors."""
    va, vb = _as_vector(a), _as_vector(b)
    if va.shape != vb.shape:
        raise DomainError(f"dimension mismatch: {va.shape[0]} vs {vb.shape[0]}")
    norm_a = float(np.linalg.norm(va))
    norm_b = float(np.linalg.norm(vb))
    if norm_a == 0.0 or norm_b == 0.0:
        raise DomainError("cosine undefined for zero vectors")
    value = float(np.dot(va, vb) / (norm_a * norm_b))
    return min(1.0, max(-1.0, value))


def truncate_tokens(doc: str, limit: int) -> list[str]:
    """Whitespace tokens, head kept, tail beyond ``limit`` dropped."""
    return doc.split()[:limit]


class HashingProvider:
    """Deterministic n-gram hashing encoder.

    Word 1- to 3-grams are hashed (unsalted BLAKE2b, so stable across
    processes) into signed buckets and the result is L2-normalized.
    Empty input yields a zero vector flagged degenerate.
    """

    provider_id = "test_hash"

    def __init__(self, encoder_dim: int = DEFAULT_ENCODER_DIM, truncation_limit: int = DEFAULT_TRUNCATION):
        if encoder_dim < 1:
            raise ConfigurationError("encoder_dim must be positive")
        self.encoder_dim = encoder_dim
        self.truncation_limit = truncation_limit

    def embed(self, doc: str, doc_id: str | None = None) -> Embedding:
        tokens = [t.lower() for t in truncate_tokens(doc, self.truncation_limit)]
        vector = np.zeros(self.encoder_dim, dtype=np.float64)
        for n in (1, 2, 3):
            for i in range(len(tokens) - n + 1):
                gram = " ".join(tokens[i : i + n])
                digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
                value = int.from_bytes(digest, "big")
                bucket = value % self.encoder_dim
                sign = 1.0 if (value >> 63) & 1 else -1.0
                vector[bucket] += sign
        norm = float(np.linalg.norm(vector))
        if norm == 0.0:
            return Embedding(vector=vector, provider_id=self.provider_id,
                             truncation_limit=self.truncation_limit, degenerate=True)
        return Embedding(vector=vector / norm, provider_id=self.provider_id,
                         truncation_limit=self.truncation_limit)


class FileCacheProvider:
    """doc_id -> vector store loaded from JSONL ({"doc_id": ..., "vector": [...]}).

    Lookup uses the ``doc_id`` argument when given, else the document string
    itself is taken to be the key.
    """

    provider_id = "file_cache"

    def __init__(self, path, truncation_limit: int = DEFAULT_TRUNCATION):
        path = Path(path)
        if not path.is_file():
            raise ConfigurationError(f"embedding cache not found: {path}")
        self._vectors: dict[str, np.ndarray] = {}
        dims = set()
        with path.open(encoding="utf-8") as handle:
            for line in handle:
                if not line.strip():
                    continue
                record = json.loads(line)
                vector = np.asarray(record["vector"], dtype=np.float64)
                self._vectors[record["doc_id"]] = vector
                dims.add(len(vector))
        if len(dims) > 1:
            raise ConfigurationError(f"cache {path} mixes vector widths: {sorted(dims)}")
        self.encoder_dim = dims.pop() if dims else DEFAULT_ENCODER_DIM
        self.truncation_limit = truncation_limit

    def embed(self, doc: str, doc_id: str | None = None) -> Embedding:
        key = doc_id if doc_id is not None else doc
        try:
            vector = self._vectors[key]
        except KeyError:
            raise CacheMissError(key) from None
        return Embedding(vector=vector, provider_id=self.provider_id,
                         truncation_limit=self.truncation_limit)

    def doc_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._vectors))


class HttpProvider:
    """Client for the sidecar's POST /embed endpoint.

    In-flight requests are bounded by a semaphore so concurrent featurizers
    cannot flood the service.
    """

    provider_id = "http"

    def __init__(self, endpoint: str, token: str | None = None,
                 encoder_dim: int = DEFAULT_ENCODER_DIM,
                 truncation_limit: int = DEFAULT_TRUNCATION,
                 max_in_flight: int = 4, timeout: float = 60.0):
        self.endpoint = endpoint.rstrip("/")
        self.token = token
        self.encoder_dim = encoder_dim
        self.truncation_limit = truncation_limit
        self.timeout = timeout
        self._gate = threading.Semaphore(max_in_flight)

    def embed(self, doc: str, doc_id: str | None = None) -> Embedding:
        return self.embed_batch([doc])[0]

    def embed_batch(self, docs: Sequence[str]) -> list[Embedding]:
        import requests

        headers = {"Authorization": f"Bearer {self.token}"} if self.token else {}
        with self._gate:
            try:
                response = requests.post(
                    f"{self.endpoint}/embed", json={"texts": list(docs)},
                    headers=headers, timeout=self.timeout,
                )
            except requests.RequestException as exc:
                raise TransportError(f"embed request failed: {exc}") from exc
        if response.status_code != 200:
            raise TransportError(
                f"embed request returned {response.status_code}", status=response.status_code
            )
        vectors = response.json()["vectors"]
        return [
            Embedding(vector=np.asarray(v, dtype=np.float64), provider_id=self.provider_id,
                      truncation_limit=self.truncation_limit)
            for v in vectors
        ]


def get_provider(spec: str, *, encoder_dim: int = DEFAULT_ENCODER_DIM,
                 truncation_limit: int = DEFAULT_TRUNCATION, token: str | None = None):
    """Build a provider from a spec string: ``test_hash``,
    ``file_cache:<path>`` or ``http:<url>``."""
    if spec == "test_hash":
        return HashingProvider(encoder_dim=encoder_dim, truncation_limit=truncation_limit)
    if spec.startswith("file_cache:"):
        return FileCacheProvider(spec.split(":", 1)[1], truncation_limit=truncation_limit)
    if spec.startswith("http:"):
        url = spec.split(":", 1)[1]
        if not url.startswith("//"):
            raise ConfigurationError(f"bad http provider spec: {spec!r}")
        return HttpProvider("http:" + url, token=token, encoder_dim=encoder_dim,
                            truncation_limit=truncation_limit)
    raise ConfigurationError(f"unknown embedding provider {spec!r}")
