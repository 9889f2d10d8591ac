import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from earlyrisk.annotate import (
    POS_TAGS,
    AnnotatedDoc,
    annotate,
    available_annotators,
    count_syllables,
    register_annotator,
)
from earlyrisk.errors import ConfigurationError


class TestBuiltin:
    def test_simple_sentence(self):
        doc = annotate("Dogs bark.")
        assert len(doc.tokens) == 3
        assert doc.n_sentences == 1
        assert doc.punctuation_count == 1
        assert [t.is_word for t in doc.tokens] == [True, True, False]

    def test_empty_text(self):
        doc = annotate("")
        assert doc.tokens == ()
        assert doc.sentences == ()

    def test_syllable_examples(self):
        assert count_syllables("bark") == 1
        assert count_syllables("banana") == 3

    def test_consonant_only_word_has_one_syllable(self):
        assert count_syllables("hmph") == 1

    def test_lemma_is_lowercased_surface(self):
        doc = annotate("Dogs")
        assert doc.tokens[0].lemma == "dogs"

    def test_closed_class_pos(self):
        doc = annotate("the dog and I will run")
        tags = [t.pos for t in doc.tokens]
        assert tags == ["DET", "NOUN", "CCONJ", "PRON", "AUX", "NOUN"]

    def test_numbers_tagged_num(self):
        assert annotate("42").tokens[0].pos == "NUM"

    def test_symbols_tagged_sym(self):
        assert annotate("$").tokens[0].pos == "SYM"

    def test_sentence_split_on_terminators(self):
        doc = annotate("One. Two! Three?")
        assert doc.n_sentences == 3

    def test_terminator_run_is_one_break(self):
        doc = annotate("What?! Really.")
        assert doc.n_sentences == 2

    def test_trailing_text_forms_last_sentence(self):
        doc = annotate("Done. and more")
        assert doc.n_sentences == 2

    def test_builtin_heights_are_synthetic_zeroes(self):
        doc = annotate("One. Two.")
        assert doc.synthetic_heights
        assert doc.dep_tree_heights == (0, 0)


class TestProviders:
    def test_builtin_always_available(self):
        assert "builtin" in available_annotators()

    def test_unknown_provider(self):
        with pytest.raises(ConfigurationError, match="unknown annotator"):
            annotate("text", provider="missing")

    def test_registered_provider_used(self):
        marker = AnnotatedDoc(tokens=(), sentences=(), dep_tree_heights=(),
                              punctuation_count=0, char_count=0)
        register_annotator("stub", lambda text: marker)
        assert annotate("anything", provider="stub") is marker


printable_text = st.text(
    alphabet=st.characters(codec="ascii", exclude_categories=("Cc", "Cs")), max_size=200
)


class TestProperties:
    @given(printable_text)
    @settings(max_examples=150, deadline=None)
    def test_pure_and_structural_invariants(self, text):
        doc = annotate(text)
        again = annotate(text)
        assert doc == again
        # sentence ranges partition the token list
        covered = []
        for start, end in doc.sentences:
            covered.extend(range(start, end))
        assert covered == list(range(len(doc.tokens)))
        assert len(doc.dep_tree_heights) == len(doc.sentences)
        # letters never exceed the raw character count
        assert sum(t.letters for t in doc.tokens) <= doc.char_count
        for token in doc.tokens:
            assert token.pos in POS_TAGS
            if token.is_word:
                assert token.syllables >= 1
