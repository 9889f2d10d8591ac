"""Early-risk screening workbench.

Feature extraction (volumetry, lexical diversity, readability, emotions),
embedding providers, a trainable feed-forward decision head, a round-based
submission protocol harness, latency-aware evaluation metrics, and
similarity-driven questionnaire completion.
"""

__version__ = "0.1.0"
