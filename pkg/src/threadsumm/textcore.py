"""Deterministic text primitives shared by every other module.

Sentence splitting, tokenization, Porter stemming, stopword flags, a small
heuristic part-of-speech tagger, tf-idf term vectors and cosine similarity.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import Callable, Iterable, Mapping, Sequence

from .stemmer import stem as porter_stem


class Kind(str, Enum):
    WORD = "Word"
    NUMBER = "Number"
    PUNCT = "Punct"


class POS(str, Enum):
    PROPER_NOUN = "ProperNoun"
    COMMON_NOUN = "CommonNoun"
    PRONOUN = "Pronoun"
    QUESTION_WORD = "QuestionWord"
    OTHER = "Other"


QUESTION_WORDS = frozenset({"who", "what", "when", "where", "why", "how", "which"})
PRONOUNS = frozenset({
    "i", "me", "my", "mine", "myself",
    "we", "us", "our", "ours", "ourselves",
    "you", "your", "yours", "yourself", "yourselves",
    "he", "him", "his", "himself",
    "she", "her", "hers", "herself",
    "it", "its", "itself",
    "they", "them", "their", "theirs", "themselves",
})
# Abbreviations whose trailing period never ends a sentence.
ABBREVIATIONS = frozenset({
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "e.g", "i.e",
    "eg", "ie", "approx", "inc", "ltd", "fig", "jan", "feb",
    "aug", "sept", "oct", "nov", "dec",
})


def _load_lines(name: str) -> frozenset[str]:
    text = resources.files(__package__).joinpath("resources").joinpath(name).read_text("utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


@lru_cache(maxsize=None)
def stopwords() -> frozenset[str]:
    return _load_lines("stopwords.txt")


@lru_cache(maxsize=None)
def noun_lexicon() -> frozenset[str]:
    return _load_lines("nouns.txt")


@dataclass(frozen=True)
class Token:
    surface: str
    stem: str
    kind: Kind
    is_stopword: bool = False
    pos: POS = POS.OTHER
    char_offset: int = 0

    @property
    def end(self) -> int:
        return self.char_offset + len(self.surface)


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    raw: str
    doc_index: int = 0
    sent_index: int = 0
    paragraph_initial: bool = False

    @property
    def key(self) -> tuple[int, int]:
        return (self.doc_index, self.sent_index)

    @property
    def word_count(self) -> int:
        return sum(1 for t in self.tokens if t.kind is Kind.WORD)

    def content_stems(self) -> list[str]:
        """Stems of the non-stopword Word tokens, in order."""
        return content_stems(self.tokens)


@dataclass(frozen=True)
class TermVector:
    """Sparse non-negative term weights with a cached Euclidean norm."""

    weights: Mapping[str, float]
    norm: float = field(init=False)

    def __post_init__(self):
        clean = {k: float(v) for k, v in self.weights.items() if v != 0}
        if any(v < 0 for v in clean.values()):
            raise ValueError("term weights must be non-negative")
        object.__setattr__(self, "weights", clean)
        object.__setattr__(
            self, "norm", math.sqrt(math.fsum(v * v for v in clean.values()))
        )

    def scaled(self, k: float) -> "TermVector":
        return TermVector({t: k * v for t, v in self.weights.items()})


_TOKEN_RE = re.compile(r"(?P<word>[^\W\d_]+)|(?P<number>\d+(?:[.,]\d+)*)|(?P<punct>\S)")
_PARAGRAPH_RE = re.compile(r"\n[ \t\r\f\v]*\n\s*")
# Candidate sentence ends: terminal punctuation plus trailing closers.
_TERMINAL_RE = re.compile(r"[.!?]+[\"'\)\]]*")
_PREV_WORD_RE = re.compile(r"[^\W\d_]*$")
# dotted single letters right before the terminator: "U.S", "e.g"
_ACRONYM_RE = re.compile(r"(?:^|[^\w.])(?:[^\W\d_]\.)+[^\W\d_]$")


def tokenize(text: str) -> list[Token]:
    stops = stopwords()
    tokens = []
    for m in _TOKEN_RE.finditer(text):
        surface = m.group()
        if m.lastgroup == "word":
            lower = surface.lower()
            tokens.append(Token(surface, porter_stem(lower), Kind.WORD,
                                lower in stops, POS.OTHER, m.start()))
        elif m.lastgroup == "number":
            tokens.append(Token(surface, "", Kind.NUMBER, False, POS.OTHER, m.start()))
        else:
            tokens.append(Token(surface, "", Kind.PUNCT, False, POS.OTHER, m.start()))
    return tokens


def content_stems(tokens: Iterable[Token]) -> list[str]:
    return [t.stem for t in tokens if t.kind is Kind.WORD and not t.is_stopword]


def word_count(text: str) -> int:
    return sum(1 for t in tokenize(text) if t.kind is Kind.WORD)


def truncate_words(text: str, limit: int) -> str:
    """Cut ``text`` right after its ``limit``-th Word token."""
    seen = 0
    for t in tokenize(text):
        if t.kind is Kind.WORD:
            seen += 1
            if seen == limit:
                return text[: t.end]
    return text


def _is_boundary(para: str, start: int, end: int) -> bool:
    """Decide whether the terminator spanning ``para[start:end]`` ends a sentence."""
    if end >= len(para):
        return True
    nxt = para[end]
    head = para[:start]
    prev_word = _PREV_WORD_RE.search(head).group()
    punct = para[start:end]
    if nxt.isspace():
        if punct.startswith(".") and len(punct.rstrip("\"')]")) == 1:
            if prev_word.lower() in ABBREVIATIONS or _ACRONYM_RE.search(head):
                return False
            # single-letter initials such as "J. Smith"
            if len(prev_word) == 1 and prev_word.isupper():
                return False
        return True
    if punct[0] in "!?" and nxt.isalpha():
        return True
    # run-on "word.Next" with no space, common in forum text
    return (
        punct == "."
        and nxt.isupper()
        and len(prev_word) >= 2
        and not _ACRONYM_RE.search(head)
    )


def _split_paragraph(para: str) -> list[str]:
    pieces = []
    cursor = 0
    for m in _TERMINAL_RE.finditer(para):
        if _is_boundary(para, m.start(), m.end()):
            piece = para[cursor:m.end()].strip()
            if piece:
                pieces.append(piece)
            cursor = m.end()
    tail = para[cursor:].strip()
    if tail:
        pieces.append(tail)
    return pieces


def split_sentences(text: str, doc_index: int = 0) -> list[Sentence]:
    """Split ``text`` into tokenized sentences.

    Paragraph breaks are two or more newlines; the first sentence of every
    paragraph (and of the text) is flagged ``paragraph_initial``.
    """
    sentences = []
    for para in _PARAGRAPH_RE.split(text):
        for i, raw in enumerate(_split_paragraph(para)):
            sentences.append(Sentence(
                tokens=tuple(tokenize(raw)),
                raw=raw,
                doc_index=doc_index,
                sent_index=len(sentences),
                paragraph_initial=(i == 0),
            ))
    return sentences


def _first_word_index(tokens: Sequence[Token]) -> int | None:
    for i, t in enumerate(tokens):
        if t.kind is Kind.WORD:
            return i
    return None


def _is_capitalized(surface: str) -> bool:
    return surface[:1].isupper()


def midsentence_capitals(sentences: Iterable[Sentence]) -> frozenset[str]:
    """Surfaces that appear capitalized somewhere other than sentence start."""
    found = set()
    for s in sentences:
        first = _first_word_index(s.tokens)
        for i, t in enumerate(s.tokens):
            if t.kind is Kind.WORD and i != first and _is_capitalized(t.surface):
                found.add(t.surface)
    return frozenset(found)


def _tag_token(token: Token, initial: bool, doc_capitals: frozenset[str]) -> POS:
    if token.kind is not Kind.WORD:
        return POS.OTHER
    lower = token.surface.lower()
    if lower in QUESTION_WORDS:
        return POS.QUESTION_WORD
    if lower in PRONOUNS:
        return POS.PRONOUN
    capital = _is_capitalized(token.surface)
    if capital and not token.is_stopword:
        if not initial or token.surface in doc_capitals:
            return POS.PROPER_NOUN
    if (not capital or initial) and token.stem in noun_lexicon():
        return POS.COMMON_NOUN
    return POS.OTHER


def tag_pos(sentence: Sentence, doc_capitals: frozenset[str] | None = None) -> Sentence:
    """Assign one heuristic POS tag to every token.

    ``doc_capitals`` lists surfaces seen capitalized mid-sentence elsewhere in
    the same document; a sentence-initial capital counts as a proper noun
    only if it is in that set.
    """
    caps = doc_capitals if doc_capitals is not None else midsentence_capitals([sentence])
    first = _first_word_index(sentence.tokens)
    tokens = tuple(
        replace(t, pos=_tag_token(t, i == first, caps))
        for i, t in enumerate(sentence.tokens)
    )
    return replace(sentence, tokens=tokens)


def tag_document(sentences: Sequence[Sentence]) -> list[Sentence]:
    caps = midsentence_capitals(sentences)
    return [tag_pos(s, caps) for s in sentences]


# A tagger maps a document's sentences to tagged sentences; swap in a
# statistical tagger by passing any callable with this shape.
Tagger = Callable[[Sequence[Sentence]], list[Sentence]]


def _terms(doc: Iterable[Token | str]) -> list[str]:
    terms = []
    for item in doc:
        if isinstance(item, Token):
            if item.kind is Kind.WORD and not item.is_stopword:
                terms.append(item.stem)
        else:
            terms.append(item)
    return terms


def tfidf_vectors(documents: Sequence[Iterable[Token | str]]) -> list[TermVector]:
    """tf-idf vectors with raw-count tf and idf = ln(N / df).

    Documents are bags of Tokens (stopwords and non-words dropped, stems
    used) or of already-filtered term strings.
    """
    if not documents:
        raise ValueError("tfidf_vectors needs at least one document")
    counts = [Counter(_terms(doc)) for doc in documents]
    if not any(counts):
        raise ValueError("all documents are empty after stopword removal")
    n = len(counts)
    df = Counter()
    for c in counts:
        df.update(c.keys())
    idf = {t: math.log(n / d) for t, d in df.items()}
    return [TermVector({t: tf * idf[t] for t, tf in c.items()}) for c in counts]


def cosine(a: TermVector, b: TermVector) -> float:
    if a.norm == 0 or b.norm == 0:
        return 0.0
    shared = sorted(a.weights.keys() & b.weights.keys())
    dot = math.fsum(a.weights[k] * b.weights[k] for k in shared)
    return max(0.0, min(1.0, dot / (a.norm * b.norm)))
