"""Batch export: embed and classify a documents file into JSONL caches.

Input: one JSON object per line with ``doc_id`` and ``text``.
Output: ``embeddings.jsonl`` ({"doc_id", "vector"}) loadable by the
workbench's file-cache embedding provider, and ``emotions.jsonl``
({"doc_id", "basic", "fine"}) loadable by its file emotion provider.
Exports round-trip: cached vectors equal live endpoint outputs.
"""

from __future__ import annotations

import json
from pathlib import Path

from .backends import ModelBundle
from .config import SidecarConfig


def read_documents(path) -> list[tuple[str, str]]:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"documents file not found: {path}")
    documents = []
    seen = set()
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                doc_id, text = record["doc_id"], record["text"]
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: expected {{doc_id, text}}: {exc}") from exc
            if doc_id in seen:
                raise ValueError(f"{path}:{lineno}: duplicate doc_id {doc_id!r}")
            seen.add(doc_id)
            documents.append((doc_id, text))
    return documents


def export_batch(documents_path, out_dir, config: SidecarConfig | None = None,
                 bundle: ModelBundle | None = None) -> dict[str, Path]:
    """Write embeddings.jsonl and emotions.jsonl for every input document."""
    if config is None:
        config = SidecarConfig()
    if bundle is None:
        bundle = ModelBundle.from_config(config)
    documents = read_documents(documents_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    embeddings_path = out_dir / "embeddings.jsonl"
    emotions_path = out_dir / "emotions.jsonl"

    with embeddings_path.open("w", encoding="utf-8") as emb_handle, \
         emotions_path.open("w", encoding="utf-8") as emo_handle:
        for start in range(0, len(documents), config.max_batch):
            chunk = documents[start : start + config.max_batch]
            texts = [text for _, text in chunk]
            vectors = bundle.encoder.encode(texts)
            basic = bundle.basic.classify(texts)
            fine = bundle.fine.classify(texts)
            for i, (doc_id, _) in enumerate(chunk):
                emb_handle.write(json.dumps(
                    {"doc_id": doc_id, "vector": vectors[i].tolist()}
                ) + "\n")
                emo_handle.write(json.dumps(
                    {"doc_id": doc_id, "basic": basic[i].tolist(), "fine": fine[i].tolist()}
                ) + "\n")
    return {"embeddings": embeddings_path, "emotions": emotions_path}
