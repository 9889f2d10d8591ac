import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from earlyrisk.annotate import AnnotatedDoc, Token, annotate
from earlyrisk.errors import ConfigurationError, DomainError
from earlyrisk.readability import (
    METRIC_NAMES,
    FormulaRegistry,
    bundled_registry,
    readability,
)


def word(surface, syllables, letters=None, pos="NOUN"):
    return Token(surface=surface, lemma=surface.lower(), pos=pos, is_word=True,
                 syllables=syllables, letters=len(surface) if letters is None else letters)


def doc_from_counts(letters_per_word, syllables_per_word, sentence_sizes, punctuation=0):
    """Build a document with exact W, S, Y, L counts."""
    tokens = tuple(
        word("x" * l, s, letters=l)
        for l, s in zip(letters_per_word, syllables_per_word)
    )
    sentences = []
    start = 0
    for size in sentence_sizes:
        sentences.append((start, start + size))
        start += size
    assert start == len(tokens)
    return AnnotatedDoc(tokens=tokens, sentences=tuple(sentences),
                        dep_tree_heights=tuple(0 for _ in sentences),
                        punctuation_count=punctuation,
                        char_count=sum(letters_per_word) + len(letters_per_word))


# W=6, S=2, Y=10, L=23: expected values recomputed independently by hand
# from the published coefficient sets.
FIXTURE = doc_from_counts(
    letters_per_word=[4, 4, 4, 4, 4, 3],
    syllables_per_word=[2, 2, 2, 2, 1, 1],
    sentence_sizes=[3, 3],
)


class TestFixture:
    def test_fernandez_huerta(self):
        assert readability(FIXTURE).fernandez_huerta == pytest.approx(72.84, abs=1e-3)

    def test_flesch_szigriszt(self):
        assert readability(FIXTURE).flesch_szigriszt == pytest.approx(100.0017, abs=1e-3)

    def test_gutierrez(self):
        assert readability(FIXTURE).gutierrez == pytest.approx(56.9667, abs=1e-3)

    def test_ari(self):
        assert readability(FIXTURE).ari == pytest.approx(-1.875, abs=1e-3)


class TestBasics:
    def test_single_word_sentence_complexity(self):
        doc = doc_from_counts([3], [1], [1])
        assert readability(doc).sentence_complexity == 1.0

    def test_no_punctuation(self):
        doc = doc_from_counts([3, 3], [1, 1], [2])
        assert readability(doc).punctuation_marks == 0.0

    def test_empty_doc_rejected(self):
        with pytest.raises(DomainError):
            readability(annotate(""))

    def test_all_outputs_finite(self):
        for text in ("Tiny.", "a a a a a.", "Some longer mixed text, with number 12 and stops. More!"):
            scores = readability(annotate(text))
            assert all(math.isfinite(v) for v in scores.as_tuple())

    @given(st.lists(st.sampled_from("word banana a extraordinarily I 12 running".split()),
                    min_size=1, max_size=60),
           st.sampled_from([".", "!", "?", ""]))
    @settings(max_examples=150, deadline=None)
    def test_outputs_finite_on_random_docs(self, words, terminator):
        doc = annotate(" ".join(words) + terminator)
        scores = readability(doc)
        assert all(math.isfinite(v) for v in scores.as_tuple())

    def test_spaulding_rare_word_proportion(self):
        registry = FormulaRegistry(
            json.loads(json.dumps(_entries())), frozenset({"known"})
        )
        doc = AnnotatedDoc(
            tokens=(word("known", 1), word("strange", 1)),
            sentences=((0, 2),), dep_tree_heights=(0,),
            punctuation_count=0, char_count=13,
        )
        expected = 1.609 * 2.0 + 331.8 * 0.5 + 22.0
        assert readability(doc, registry).spaulding == pytest.approx(expected, abs=1e-9)


class TestMonotonicity:
    def test_more_syllables_reduce_fh_and_ifsz(self):
        low = doc_from_counts([4] * 6, [1] * 6, [3, 3])
        high = doc_from_counts([4] * 6, [2] * 6, [3, 3])
        assert readability(high).fernandez_huerta < readability(low).fernandez_huerta
        assert readability(high).flesch_szigriszt < readability(low).flesch_szigriszt

    def test_ratio_based_scores_invariant_to_doc_length(self):
        # Duplicating the document preserves L/W, W/S, Y/W, rare proportion.
        single = doc_from_counts([4, 5, 3], [2, 1, 1], [3])
        double = doc_from_counts([4, 5, 3] * 2, [2, 1, 1] * 2, [3, 3])
        a, b = readability(single), readability(double)
        for name in ("ari", "fernandez_huerta", "flesch_szigriszt", "gutierrez",
                      "spaulding", "sentence_complexity", "lexical_complexity"):
            assert getattr(a, name) == pytest.approx(getattr(b, name), abs=1e-9)


class TestRegistry:
    def test_bundled_has_exactly_twelve(self):
        registry = bundled_registry()
        for name in METRIC_NAMES:
            assert registry.coefficients(name)
            assert registry.source(name)

    def test_missing_metric_rejected(self):
        entries = [e for e in _entries() if e["name"] != "sol"]
        with pytest.raises(ConfigurationError, match="missing"):
            FormulaRegistry(entries, frozenset({"a"}))

    def test_empty_word_list_rejected(self):
        with pytest.raises(ConfigurationError, match="common-word"):
            FormulaRegistry(_entries(), frozenset())

    def test_from_files(self, tmp_path):
        registry_path = tmp_path / "reg.json"
        registry_path.write_text(json.dumps(_entries()), encoding="utf-8")
        words_path = tmp_path / "words.txt"
        words_path.write_text("uno dos tres", encoding="utf-8")
        registry = FormulaRegistry.from_files(registry_path, words_path)
        assert "dos" in registry.common_words


def _entries():
    from importlib import resources

    return json.loads(
        resources.files("earlyrisk.data").joinpath("readability_registry.json").read_text("utf-8")
    )
