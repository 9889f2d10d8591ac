"""Preprocessing, volumetry, and assembly of the 79-value feature vector.

Layout is fixed and normative: volumetry (6 scalars + 19 POS counts),
8 lexical-diversity scores, 12 readability scores, then 34 emotion scores
(6 basic + 28 fine-grained).  Scaling is per-dimension min-max learned on
training vectors only.
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .annotate import POS_TAGS, AnnotatedDoc
from .corpus import PostWindow
from .errors import AssemblyError, DomainError, ValidationError
from .lexdiv import LexDivScores
from .readability import ReadabilityScores

_URL_RE = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
# Innermost bracket/parenthesis groups, expanded outward iteratively.
_GROUP_RES = (re.compile(r"\(([^()]*)\)"), re.compile(r"\[([^\[\]]*)\]"))

EMOTION_BASIC_LABELS = ("sadness", "joy", "love", "anger", "fear", "surprise")
EMOTION_FINE_LABELS = (
    "admiration", "amusement", "anger", "annoyance", "approval", "caring",
    "confusion", "curiosity", "desire", "disappointment", "disapproval",
    "disgust", "embarrassment", "excitement", "fear", "gratitude", "grief",
    "joy", "love", "nervousness", "optimism", "pride", "realization",
    "relief", "remorse", "sadness", "surprise", "neutral",
)

VOLUMETRY_SCALAR_NAMES = (
    "n_words", "n_unique_words", "n_chars", "avg_word_len",
    "n_unique_lemmas", "avg_lemma_len",
)

FEATURE_NAMES: tuple[str, ...] = (
    VOLUMETRY_SCALAR_NAMES
    + tuple(f"pos_{tag}" for tag in POS_TAGS)
    + LexDivScores.FIELDS
    + ReadabilityScores.FIELDS
    + tuple(f"emo_{label}" for label in EMOTION_BASIC_LABELS)
    + tuple(f"emofine_{label}" for label in EMOTION_FINE_LABELS)
)
FEATURE_DIM = len(FEATURE_NAMES)  # 79


def strip_urls(text: str) -> str:
    """Remove URLs, and whole bracket/parenthesis groups containing one.

    Innermost groups go first, so nesting resolves from the inside out.
    Whitespace is collapsed afterwards; the operation is idempotent.
    """
    changed = True
    while changed:
        changed = False
        for group_re in _GROUP_RES:
            def drop_if_url(match: re.Match) -> str:
                nonlocal changed
                if _URL_RE.search(match.group(1)):
                    changed = True
                    return " "
                return match.group(0)

            text = group_re.sub(drop_if_url, text)
    text = _URL_RE.sub(" ", text)
    return " ".join(text.split())


def concat_window(window: PostWindow, preprocess: str = "none") -> str:
    """Join title and body of each post, oldest to newest, single-spaced."""
    if preprocess not in ("none", "strip_urls"):
        raise DomainError(f"unknown preprocess {preprocess!r}")
    parts = []
    for post in window.posts:
        content = post.content()
        if preprocess == "strip_urls":
            content = strip_urls(content)
        if content:
            parts.append(content)
    return " ".join(" ".join(parts).split())


@dataclass(frozen=True)
class VolumetryScores:
    n_words: int
    n_unique_words: int
    n_chars: int
    avg_word_len: float
    n_unique_lemmas: int
    avg_lemma_len: float
    pos_counts: tuple[int, ...]

    def as_tuple(self) -> tuple[float, ...]:
        return (
            float(self.n_words), float(self.n_unique_words), float(self.n_chars),
            self.avg_word_len, float(self.n_unique_lemmas), self.avg_lemma_len,
        ) + tuple(float(c) for c in self.pos_counts)


def volumetry(doc: AnnotatedDoc) -> VolumetryScores:
    """Surface counts; empty documents yield all zeros."""
    words = doc.word_tokens
    n_words = len(words)
    pos_counts = [0] * len(POS_TAGS)
    pos_index = {tag: i for i, tag in enumerate(POS_TAGS)}
    overflow = pos_index["OTHER"]
    for token in doc.tokens:
        pos_counts[pos_index.get(token.pos, overflow)] += 1
    return VolumetryScores(
        n_words=n_words,
        n_unique_words=len({t.surface.lower() for t in words}),
        n_chars=doc.char_count,
        avg_word_len=(sum(len(t.surface) for t in words) / n_words) if n_words else 0.0,
        n_unique_lemmas=len({t.lemma for t in words}),
        avg_lemma_len=(sum(len(t.lemma) for t in words) / n_words) if n_words else 0.0,
        pos_counts=tuple(pos_counts),
    )


@dataclass(frozen=True)
class EmotionScores:
    basic: tuple[float, ...]
    fine: tuple[float, ...]

    def __post_init__(self):
        if len(self.basic) != len(EMOTION_BASIC_LABELS):
            raise ValidationError(f"expected {len(EMOTION_BASIC_LABELS)} basic emotion scores")
        if len(self.fine) != len(EMOTION_FINE_LABELS):
            raise ValidationError(f"expected {len(EMOTION_FINE_LABELS)} fine emotion scores")
        for score in self.basic + self.fine:
            if not 0.0 <= score <= 1.0:
                raise ValidationError(f"emotion score {score} outside [0, 1]")

    @classmethod
    def zeros(cls) -> "EmotionScores":
        return cls(basic=(0.0,) * len(EMOTION_BASIC_LABELS), fine=(0.0,) * len(EMOTION_FINE_LABELS))

    def as_tuple(self) -> tuple[float, ...]:
        return self.basic + self.fine


@dataclass(frozen=True)
class FeatureVector:
    values: tuple[float, ...]
    flagged: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.values) != FEATURE_DIM:
            raise ValidationError(f"feature vector must have {FEATURE_DIM} values, got {len(self.values)}")


def assemble(
    vol: VolumetryScores | None,
    lex: LexDivScores | None,
    read: ReadabilityScores | None,
    emo: EmotionScores | None,
) -> FeatureVector:
    """Concatenate the four parts in fixed order; non-finite slots become 0
    and are flagged by feature name."""
    for part, name in ((vol, "volumetry"), (lex, "lexdiv"), (read, "readability"), (emo, "emotions")):
        if part is None:
            raise AssemblyError(name)
    raw = vol.as_tuple() + lex.as_tuple() + read.as_tuple() + emo.as_tuple()
    values = []
    flagged = []
    for name, value in zip(FEATURE_NAMES, raw):
        value = float(value)
        if not math.isfinite(value):
            flagged.append(name)
            value = 0.0
        values.append(value)
    return FeatureVector(values=tuple(values), flagged=tuple(flagged))


@dataclass(frozen=True)
class Scaler:
    mins: tuple[float, ...]
    maxs: tuple[float, ...]

    def __post_init__(self):
        if len(self.mins) != len(self.maxs):
            raise ValidationError("scaler min/max lengths differ")
        for lo, hi in zip(self.mins, self.maxs):
            if lo > hi:
                raise ValidationError("scaler has min > max")


def fit_scaler(train: Sequence[FeatureVector]) -> Scaler:
    if not train:
        raise DomainError("fit_scaler needs at least one vector")
    columns = list(zip(*(v.values for v in train)))
    return Scaler(
        mins=tuple(min(col) for col in columns),
        maxs=tuple(max(col) for col in columns),
    )


def apply_scaler(scaler: Scaler, vector: FeatureVector) -> FeatureVector:
    """Min-max scale into [0, 1]; constant dimensions map to 0 and unseen
    out-of-range values clamp."""
    if len(scaler.mins) != len(vector.values):
        raise DomainError(
            f"scaler dimension {len(scaler.mins)} != vector dimension {len(vector.values)}"
        )
    scaled = []
    for value, lo, hi in zip(vector.values, scaler.mins, scaler.maxs):
        if hi == lo:
            scaled.append(0.0)
        else:
            scaled.append(min(1.0, max(0.0, (value - lo) / (hi - lo))))
    return FeatureVector(values=tuple(scaled), flagged=vector.flagged)


def save_scaler(scaler: Scaler, path) -> None:
    payload = {"min": list(scaler.mins), "max": list(scaler.maxs)}
    Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")


def load_scaler(path) -> Scaler:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return Scaler(mins=tuple(payload["min"]), maxs=tuple(payload["max"]))


def write_feature_csv(path, rows: Iterable[tuple[str, FeatureVector]]) -> None:
    """Persist one subject per row: subject_id followed by the 79 columns."""
    with Path(path).open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(("subject_id",) + FEATURE_NAMES)
        for subject_id, vector in rows:
            writer.writerow((subject_id,) + tuple(repr(v) for v in vector.values))


def read_feature_csv(path) -> list[tuple[str, FeatureVector]]:
    with Path(path).open(encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if tuple(header) != ("subject_id",) + FEATURE_NAMES:
            raise ValidationError(f"unexpected feature CSV header in {path}")
        return [
            (row[0], FeatureVector(values=tuple(float(v) for v in row[1:])))
            for row in reader
        ]


class EmotionProvider:
    """Source of per-document emotion score vectors.

    ``doc_id`` addresses file-backed stores; live providers score the text.
    """

    provider_id = "zeros"

    def emotions(self, doc: str, doc_id: str | None = None) -> EmotionScores:
        return EmotionScores.zeros()


class FileEmotionProvider(EmotionProvider):
    """JSONL store: {"doc_id": ..., "basic": [...], "fine": [...]} per line."""

    provider_id = "file"

    def __init__(self, path):
        self._store: dict[str, EmotionScores] = {}
        with Path(path).open(encoding="utf-8") as handle:
            for line in handle:
                if not line.strip():
                    continue
                record = json.loads(line)
                self._store[record["doc_id"]] = EmotionScores(
                    basic=tuple(record["basic"]), fine=tuple(record["fine"])
                )

    def emotions(self, doc: str, doc_id: str | None = None) -> EmotionScores:
        key = doc_id if doc_id is not None else doc
        try:
            return self._store[key]
        except KeyError:
            raise ValidationError(f"no emotion scores for doc {key!r}") from None


class HttpEmotionProvider(EmotionProvider):
    """Client for the sidecar's POST /emotions endpoint."""

    provider_id = "http"

    def __init__(self, endpoint: str, token: str | None = None, timeout: float = 30.0):
        self.endpoint = endpoint.rstrip("/")
        self.token = token
        self.timeout = timeout

    def emotions(self, doc: str, doc_id: str | None = None) -> EmotionScores:
        import requests

        from .errors import TransportError

        headers = {"Authorization": f"Bearer {self.token}"} if self.token else {}
        try:
            response = requests.post(
                f"{self.endpoint}/emotions", json={"texts": [doc]},
                headers=headers, timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise TransportError(f"emotion request failed: {exc}") from exc
        if response.status_code != 200:
            raise TransportError(
                f"emotion request returned {response.status_code}", status=response.status_code
            )
        payload = response.json()
        return EmotionScores(basic=tuple(payload["basic"][0]), fine=tuple(payload["fine"][0]))
