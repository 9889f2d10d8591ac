"""The twelve text-complexity statistics over an annotated document.

Formula coefficients live in a JSON registry shipped with the package, each
entry carrying a source note; callers may load a customized registry file.
Several formulas were calibrated on Spanish text and are applied verbatim
here regardless of the input language.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping

from .annotate import AnnotatedDoc
from .errors import ConfigurationError, DomainError

METRIC_NAMES = (
    "lexical_complexity",
    "spaulding",
    "sentence_complexity",
    "ari",
    "dep_tree_height_mean",
    "punctuation_marks",
    "fernandez_huerta",
    "flesch_szigriszt",
    "gutierrez",
    "mu_readability",
    "min_age",
    "sol",
)

# POS tags counted as content words for lexical density.
_CONTENT_POS = frozenset({"NOUN", "PROPN", "VERB", "ADJ", "ADV"})


@dataclass(frozen=True)
class ReadabilityScores:
    lexical_complexity: float
    spaulding: float
    sentence_complexity: float
    ari: float
    dep_tree_height_mean: float
    punctuation_marks: float
    fernandez_huerta: float
    flesch_szigriszt: float
    gutierrez: float
    mu_readability: float
    min_age: float
    sol: float

    FIELDS = METRIC_NAMES

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in METRIC_NAMES)


class FormulaRegistry:
    """Named coefficient sets plus the common-word list used by Spaulding."""

    def __init__(self, entries: list[dict], common_words: frozenset[str]):
        names = [entry.get("name") for entry in entries]
        if sorted(names) != sorted(METRIC_NAMES):
            missing = set(METRIC_NAMES) - set(names)
            extra = set(names) - set(METRIC_NAMES)
            raise ConfigurationError(
                f"registry must define exactly the 12 metrics; missing={sorted(missing)} extra={sorted(extra)}"
            )
        for entry in entries:
            if "coefficients" not in entry or "source" not in entry:
                raise ConfigurationError(
                    f"registry entry {entry.get('name')!r} needs 'coefficients' and 'source'"
                )
        self._entries = {entry["name"]: entry for entry in entries}
        if not common_words:
            raise ConfigurationError("Spaulding requires a non-empty common-word list")
        self.common_words = common_words

    def coefficients(self, name: str) -> Mapping[str, float]:
        return self._entries[name]["coefficients"]

    def source(self, name: str) -> str:
        return self._entries[name]["source"]

    @classmethod
    def bundled(cls) -> "FormulaRegistry":
        registry_text = resources.files("earlyrisk.data").joinpath(
            "readability_registry.json"
        ).read_text(encoding="utf-8")
        words_text = resources.files("earlyrisk.data").joinpath(
            "spaulding_common_words.txt"
        ).read_text(encoding="utf-8")
        return cls(json.loads(registry_text), frozenset(words_text.split()))

    @classmethod
    def from_files(cls, registry_path, word_list_path) -> "FormulaRegistry":
        entries = json.loads(Path(registry_path).read_text(encoding="utf-8"))
        words = frozenset(Path(word_list_path).read_text(encoding="utf-8").split())
        return cls(entries, words)


_BUNDLED: FormulaRegistry | None = None


def bundled_registry() -> FormulaRegistry:
    global _BUNDLED
    if _BUNDLED is None:
        _BUNDLED = FormulaRegistry.bundled()
    return _BUNDLED


def readability(doc: AnnotatedDoc, registry: FormulaRegistry | None = None) -> ReadabilityScores:
    """Evaluate all 12 metrics; requires at least one word and one sentence."""
    if registry is None:
        registry = bundled_registry()

    words = doc.word_tokens
    w = len(words)
    s = doc.n_sentences
    if w == 0 or s == 0:
        raise DomainError("readability requires at least one word token and one sentence")
    y = sum(t.syllables for t in words)
    letters = sum(t.letters for t in words)

    def c(name: str) -> Mapping[str, float]:
        return registry.coefficients(name)

    ari_c = c("ari")
    ari = ari_c["letters_per_word"] * (letters / w) + ari_c["words_per_sentence"] * (w / s) + ari_c["intercept"]

    fh_c = c("fernandez_huerta")
    fernandez_huerta = (
        fh_c["intercept"]
        - fh_c["syllables_per_100w"] * (100.0 * y / w)
        - fh_c["sentences_per_100w"] * (100.0 * s / w)
    )

    fs_c = c("flesch_szigriszt")
    flesch_szigriszt = (
        fs_c["intercept"]
        - fs_c["syllables_per_word"] * (y / w)
        - fs_c["words_per_sentence"] * (w / s)
    )

    g_c = c("gutierrez")
    gutierrez = g_c["intercept"] - g_c["letters_per_word"] * (letters / w) - g_c["words_per_sentence"] * (w / s)

    rare = sum(1 for t in words if t.lemma not in registry.common_words)
    sp_c = c("spaulding")
    spaulding = sp_c["words_per_sentence"] * (w / s) + sp_c["rare_word_density"] * (rare / w) + sp_c["intercept"]

    sentence_complexity = c("sentence_complexity")["scale"] * (w / s)

    punctuation_marks = c("punctuation_marks")["scale"] * doc.punctuation_count

    heights = doc.dep_tree_heights if doc.dep_tree_heights else (0,)
    dep_tree_height_mean = c("dep_tree_height_mean")["scale"] * (sum(heights) / len(heights))

    content = sum(1 for t in words if t.pos in _CONTENT_POS)
    lexical_complexity = c("lexical_complexity")["scale"] * (content / w)

    mu_readability = _mu(words, c("mu_readability")["scale"])

    ma_c = c("min_age")
    min_age = (
        ma_c["sentences_per_100w"] * (100.0 * s / w)
        + ma_c["syllables_per_100w"] * (100.0 * y / w)
        + ma_c["intercept"]
        + ma_c["school_age_offset"]
    )

    sol_c = c("sol")
    polysyllables = sum(1 for t in words if t.syllables >= 3)
    smog = sol_c["smog_intercept"] + sol_c["smog_slope"] * math.sqrt(polysyllables * (30.0 / s))
    sol = sol_c["intercept"] + sol_c["slope"] * smog

    return ReadabilityScores(
        lexical_complexity=lexical_complexity,
        spaulding=spaulding,
        sentence_complexity=sentence_complexity,
        ari=ari,
        dep_tree_height_mean=dep_tree_height_mean,
        punctuation_marks=float(punctuation_marks),
        fernandez_huerta=fernandez_huerta,
        flesch_szigriszt=flesch_szigriszt,
        gutierrez=gutierrez,
        mu_readability=mu_readability,
        min_age=min_age,
        sol=sol,
    )


def _mu(words, scale: float) -> float:
    """Word-length based readability; 0 when the variance is degenerate."""
    n = len(words)
    if n < 2:
        return 0.0
    lengths = [t.letters for t in words]
    mean = sum(lengths) / n
    variance = sum((x - mean) ** 2 for x in lengths) / n
    if variance == 0.0:
        return 0.0
    return (n / (n - 1)) * (mean / variance) * scale
