"""Token/sentence/lemma/POS/syllable annotation behind a pluggable provider.

The builtin provider is deliberately simple and fully deterministic: regex
word/punctuation segmentation, sentence breaks on ``. ! ?``, lowercased
surface as lemma, a closed-class lexicon for POS (everything else is NOUN),
and maximal-vowel-group syllable counting.  It cannot parse, so dependency
tree heights are 0 and flagged synthetic; richer providers (e.g. a spaCy
wrapper) can be registered at runtime and supply real heights.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

from .errors import ConfigurationError

# 17 Universal POS tags, plus SPACE and an overflow bucket for anything a
# provider emits outside the inventory.  The fixed order gives POS counts a
# stable 19-slot layout in the feature vector.
POS_TAGS = (
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
    "SPACE", "OTHER",
)
POS_INDEX = {tag: i for i, tag in enumerate(POS_TAGS)}


@dataclass(frozen=True)
class Token:
    surface: str
    lemma: str
    pos: str
    is_word: bool
    syllables: int
    letters: int


@dataclass(frozen=True)
class AnnotatedDoc:
    tokens: tuple[Token, ...]
    sentences: tuple[tuple[int, int], ...]  # half-open [start, end) token ranges
    dep_tree_heights: tuple[int, ...]       # one per sentence
    punctuation_count: int
    char_count: int
    synthetic_heights: bool = False

    @property
    def word_tokens(self) -> tuple[Token, ...]:
        return tuple(t for t in self.tokens if t.is_word)

    @property
    def n_words(self) -> int:
        return sum(1 for t in self.tokens if t.is_word)

    @property
    def n_sentences(self) -> int:
        return len(self.sentences)

    @property
    def syllable_count(self) -> int:
        return sum(t.syllables for t in self.tokens if t.is_word)

    @property
    def letter_count(self) -> int:
        return sum(t.letters for t in self.tokens if t.is_word)


_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)
_NUMBER_RE = re.compile(r"^\d+(?:[.,]\d+)*$")
_VOWEL_GROUP_RE = re.compile(r"[aeiouyàáâäãåèéêëìíîïòóôöõùúûüæø]+", re.IGNORECASE)

_SENTENCE_TERMINATORS = frozenset({".", "!", "?"})
_SYMBOL_CHARS = frozenset("$€£¥%+=<>^~|#&*@/\\")

# Closed-class lexicon: one tag per word, first writer wins.  Open-class
# words fall through to NOUN.
_CLOSED_CLASS: dict[str, str] = {}


def _register(tag: str, words: str) -> None:
    for word in words.split():
        _CLOSED_CLASS.setdefault(word, tag)


_register("DET", "the a an this that these those each every either neither some any no all both such")
_register(
    "PRON",
    "i you he she it we they me him her us them mine yours hers ours theirs my your his its our their "
    "myself yourself himself herself itself ourselves yourselves themselves who whom whose which what "
    "anybody anyone anything everybody everyone everything nobody nothing somebody someone something one",
)
_register(
    "ADP",
    "in on at of by for with about against between into through during before after above below from "
    "up down out off over under near without within across behind beyond around among upon onto toward "
    "towards per via since until",
)
_register("CCONJ", "and or but nor yet so plus")
_register("SCONJ", "if because while although though unless whereas whether when where as")
_register(
    "AUX",
    "am is are was were be been being have has had having do does did will would shall should may "
    "might must can could ought",
)
_register("PART", "to not")
_register(
    "ADV",
    "very never always often sometimes here there now then too also just only again soon already still "
    "quite rather really almost enough perhaps maybe however instead away back even ever far fast hard "
    "late long low more most much less least once twice today tomorrow yesterday well how why",
)
_register("INTJ", "oh wow hey hi hello ouch oops yeah hmm ugh alas")


def count_syllables(word: str) -> int:
    """Number of maximal vowel groups, at least 1 per word."""
    return max(1, len(_VOWEL_GROUP_RE.findall(word)))


def _classify(surface: str, is_word: bool) -> str:
    if not is_word:
        return "SYM" if surface in _SYMBOL_CHARS else "PUNCT"
    if _NUMBER_RE.match(surface):
        return "NUM"
    return _CLOSED_CLASS.get(surface.lower(), "NOUN")


def _builtin_annotate(text: str) -> AnnotatedDoc:
    tokens: list[Token] = []
    for match in _TOKEN_RE.finditer(text):
        surface = match.group()
        is_word = bool(surface[0].isalnum() or surface[0] == "_")
        lemma = surface.lower()
        letters = sum(1 for ch in surface if ch.isalnum())
        syllables = count_syllables(surface) if is_word else 0
        tokens.append(
            Token(
                surface=surface,
                lemma=lemma,
                pos=_classify(surface, is_word),
                is_word=is_word,
                syllables=syllables,
                letters=letters,
            )
        )

    sentences: list[tuple[int, int]] = []
    start = 0
    for i, token in enumerate(tokens):
        # Close after a run of terminators: "!?" ends one sentence, not two.
        if token.surface in _SENTENCE_TERMINATORS and (
            i + 1 == len(tokens) or tokens[i + 1].surface not in _SENTENCE_TERMINATORS
        ):
            sentences.append((start, i + 1))
            start = i + 1
    if start < len(tokens):
        sentences.append((start, len(tokens)))

    return AnnotatedDoc(
        tokens=tuple(tokens),
        sentences=tuple(sentences),
        dep_tree_heights=tuple(0 for _ in sentences),
        punctuation_count=sum(1 for t in tokens if t.pos == "PUNCT"),
        char_count=len(text),
        synthetic_heights=True,
    )


_PROVIDERS: dict[str, Callable[[str], AnnotatedDoc]] = {"builtin": _builtin_annotate}


def register_annotator(name: str, fn: Callable[[str], AnnotatedDoc]) -> None:
    _PROVIDERS[name] = fn


def available_annotators() -> tuple[str, ...]:
    return tuple(sorted(_PROVIDERS))


def annotate(text: str, provider: str = "builtin") -> AnnotatedDoc:
    """Annotate ``text`` with the named provider; pure in (text, provider)."""
    try:
        fn = _PROVIDERS[provider]
    except KeyError:
        raise ConfigurationError(
            f"unknown annotator {provider!r}; available: {', '.join(available_annotators())}"
        ) from None
    return fn(text)
