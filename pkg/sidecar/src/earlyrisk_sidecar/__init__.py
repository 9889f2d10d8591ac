"""Inference sidecar for the early-risk workbench.

Wraps pretrained transformer checkpoints behind a small HTTP API (sentence
embeddings plus two emotion score vectors) and a batch exporter whose output
the workbench loads as an embedding file cache.  Checkpoint names are
configuration; a deterministic hash backend serves tests and offline use.
"""

__version__ = "0.1.0"
