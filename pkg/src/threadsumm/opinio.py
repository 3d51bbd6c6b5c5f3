"""Opinion-aware summarization of question threads.

Each candidate answer goes through pronoun resolution, lexical tiling by
vocabulary introduction, fact/opinion classification and lexicon polarity.
Tiles that fit the question's polarity are then handed to TextRank.
"""

from __future__ import annotations

import hashlib
import json
import math
import statistics
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import lru_cache
from importlib import resources
from itertools import combinations
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .corpus import SummaryInstance
from .stemmer import stem as porter_stem
from .summarize import MIN_CANDIDATE_WORDS, Summary, SummarizationError, SummaryConfig, textrank
from .textcore import (
    POS,
    Kind,
    Sentence,
    TermVector,
    Token,
    cosine,
    noun_lexicon,
    split_sentences,
    stopwords,
    tag_document,
    tfidf_vectors,
    tokenize,
)

THIRD_PERSON = frozenset({
    "he", "him", "his", "himself", "she", "her", "hers", "herself",
    "it", "its", "itself", "they", "them", "their", "theirs", "themselves",
})


class TileKind(str, Enum):
    FACT = "Fact"
    OPINION = "Opinion"


class Polarity(str, Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
    NEUTRAL = "Neutral"


class Strength(str, Enum):
    STRONG = "Strong"
    WEAK = "Weak"


NEUTRAL_WEAK = (Polarity.NEUTRAL, Strength.WEAK)


# ------------------------------------------------------------------ anaphora

def _first_word(tokens: Sequence[Token]) -> int | None:
    return next((i for i, t in enumerate(tokens) if t.kind is Kind.WORD), None)


def _is_antecedent(token: Token, initial: bool) -> bool:
    if token.kind is not Kind.WORD:
        return False
    if token.pos is POS.PROPER_NOUN:
        return True
    # the tagger leaves sentence-initial names untagged unless seen mid-sentence
    return (
        initial
        and token.surface[:1].isupper()
        and token.pos is POS.OTHER
        and not token.is_stopword
        and token.stem not in noun_lexicon()
    )


def resolve_anaphora(paragraph: Sequence[Sentence]) -> list[Sentence]:
    """Replace third-person pronouns with the nearest preceding proper noun."""
    antecedent: str | None = None
    out = []
    for s in paragraph:
        first = _first_word(s.tokens)
        tokens, pieces = [], []
        cursor = shift = 0
        for i, t in enumerate(s.tokens):
            if (
                antecedent is not None
                and t.kind is Kind.WORD
                and t.surface.lower() in THIRD_PERSON
            ):
                pieces.append(s.raw[cursor:t.char_offset])
                pieces.append(antecedent)
                cursor = t.end
                lower = antecedent.lower()
                tokens.append(Token(antecedent, porter_stem(lower), Kind.WORD,
                                    lower in stopwords(), POS.PROPER_NOUN,
                                    t.char_offset + shift))
                shift += len(antecedent) - len(t.surface)
                continue
            if _is_antecedent(t, i == first):
                antecedent = t.surface
            tokens.append(replace(t, char_offset=t.char_offset + shift) if shift else t)
        pieces.append(s.raw[cursor:])
        out.append(replace(s, tokens=tuple(tokens), raw="".join(pieces)))
    return out


def paragraphs(sentences: Sequence[Sentence]) -> list[list[Sentence]]:
    groups: list[list[Sentence]] = []
    for s in sentences:
        if s.paragraph_initial or not groups:
            groups.append([])
        groups[-1].append(s)
    return groups


# -------------------------------------------------------------------- tiling

@dataclass(frozen=True)
class TokenSequence:
    stems: tuple[str, ...]
    start_offset: int


@dataclass(frozen=True)
class Tile:
    sentence_range: tuple[int, int]
    text: str
    kind: TileKind = TileKind.FACT
    polarity: Polarity = Polarity.NEUTRAL
    strength: Strength = Strength.WEAK
    doc_index: int = 0


def gap_score(left: TokenSequence, right: TokenSequence, seen_before: set[str], w: int) -> float:
    """Vocabulary-introduction score of the gap between two token sequences.

    ``seen_before`` holds the stems occurring before ``left`` starts. A stem
    is new the first time it occurs in the document.
    """
    if w <= 0:
        raise ValueError("w must be positive")
    new_left = set(left.stems) - seen_before
    new_right = set(right.stems) - seen_before - set(left.stems)
    return (len(new_left) + len(new_right)) / (2 * w)


def token_sequences(stems: Sequence[str], w: int) -> list[TokenSequence]:
    return [TokenSequence(tuple(stems[i:i + w]), i) for i in range(0, len(stems), w)]


def gap_profile(stems: Sequence[str], w: int) -> list[float]:
    seqs = token_sequences(stems, w)
    return [
        gap_score(seqs[g], seqs[g + 1], set(stems[:seqs[g].start_offset]), w)
        for g in range(len(seqs) - 1)
    ]


def boundary_gaps(scores: Sequence[float], k: float = 0.5) -> list[int]:
    """Gaps that start a topic shift.

    The threshold is mean + k * stddev over all gaps. The first gap is never
    a candidate: its left sequence opens the document, so everything in it is
    new regardless of topic. A run of consecutive gaps above the threshold
    yields a single boundary at the run's first gap.
    """
    if len(scores) < 2:
        return []
    sd = statistics.pstdev(scores)
    if sd < 1e-9:
        return []
    threshold = statistics.fmean(scores) + k * sd
    gaps = []
    prev_hit = False
    for g in range(1, len(scores)):
        hit = scores[g] > threshold
        if hit and not prev_hit:
            gaps.append(g)
        prev_hit = hit
    return gaps


def tile_text(sentences: Sequence[Sentence], w: int = 20, k: float = 0.5) -> list[Tile]:
    """Segment one document's sentences into contiguous tiles."""
    if not sentences:
        return []
    stems: list[str] = []
    starts = []
    for s in sentences:
        starts.append(len(stems))
        stems.extend(s.content_stems())
    n = len(sentences)
    cuts: list[int] = []
    if len(stems) >= 2 * w and n > 1:
        for g in boundary_gaps(gap_profile(stems, w), k):
            pos = (g + 1) * w
            j = min(range(1, n), key=lambda j: (abs(starts[j] - pos), j))
            if j not in cuts:
                cuts.append(j)
    cuts.sort()
    edges = [0, *cuts, n]
    doc = sentences[0].doc_index
    return [
        Tile((a, b - 1), " ".join(s.raw for s in sentences[a:b]), doc_index=doc)
        for a, b in zip(edges, edges[1:])
    ]


# ----------------------------------------------------------------- sentiment

@dataclass(frozen=True)
class SentimentLexicon:
    entries: dict[str, tuple[float, float]]

    def __post_init__(self):
        for term, (p, n) in self.entries.items():
            if not (0 <= p <= 1 and 0 <= n <= 1):
                raise ValueError(f"lexicon scores for {term!r} outside [0, 1]")

    @classmethod
    def parse(cls, lines: Iterable[str]) -> "SentimentLexicon":
        entries = {}
        for lineno, line in enumerate(lines, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"lexicon line {lineno}: expected stem<TAB>pos<TAB>neg")
            entries[parts[0]] = (float(parts[1]), float(parts[2]))
        return cls(entries)

    @classmethod
    def load(cls, path: str | Path) -> "SentimentLexicon":
        with open(path, encoding="utf-8") as fh:
            return cls.parse(fh)


@lru_cache(maxsize=None)
def default_lexicon() -> SentimentLexicon:
    text = resources.files(__package__).joinpath("resources").joinpath(
        "sentiment_lexicon.tsv").read_text("utf-8")
    return SentimentLexicon.parse(text.splitlines())


STRONG_THRESHOLD = 0.4


def sentence_sentiment(lexicon: SentimentLexicon, sentence: Sentence) -> tuple[Polarity, Strength]:
    matched = [lexicon.entries[st] for st in sentence.content_stems() if st in lexicon.entries]
    if not matched:
        return NEUTRAL_WEAK
    pos = math.fsum(p for p, _ in matched) / len(matched)
    neg = math.fsum(n for _, n in matched) / len(matched)
    if pos == neg:
        return NEUTRAL_WEAK
    polarity, win = (Polarity.POSITIVE, pos) if pos > neg else (Polarity.NEGATIVE, neg)
    if win > STRONG_THRESHOLD:
        return polarity, Strength.STRONG
    return NEUTRAL_WEAK


def tile_polarity(tile: Tile | None, sentence_polarities: Sequence[tuple[Polarity, Strength]]) -> tuple[Polarity, Strength]:
    """Majority polarity of a tile's sentences; ties go to neutral."""
    if not sentence_polarities:
        return NEUTRAL_WEAK
    counts = Counter(p for p, _ in sentence_polarities)
    ranked = counts.most_common()
    if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
        return NEUTRAL_WEAK
    polarity = ranked[0][0]
    if polarity is Polarity.NEUTRAL:
        return NEUTRAL_WEAK
    strong = sum(1 for p, s in sentence_polarities if p is polarity and s is Strength.STRONG)
    return polarity, Strength.STRONG if 2 * strong > len(sentence_polarities) else Strength.WEAK


# ---------------------------------------------------------------- classifier

MODEL_FORMAT = "threadsumm-fact-opinion"
MODEL_VERSION = 1
_POS_ORDER = list(POS)


@dataclass
class FactOpinionModel:
    """Linear fact/opinion scorer over hashed n-gram and POS-count features.

    ``weights`` has ``dim`` hashed slots followed by one slot per POS tag.
    Positive scores mean Opinion.
    """

    weights: np.ndarray
    bias: float = 0.0
    dim: int = 1 << 18
    seed: int = 0
    ngram_orders: tuple[int, ...] = (1, 2, 3)
    epochs: int = 20
    learning_rate: float = 0.5
    l2: float = 1e-4

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (self.dim + len(_POS_ORDER),):
            raise ValueError("weights length must be dim + number of POS tags")

    @classmethod
    def zeros(cls, dim: int = 1 << 18, **kw) -> "FactOpinionModel":
        return cls(np.zeros(dim + len(_POS_ORDER)), dim=dim, **kw)

    def features(self, text: str) -> dict[int, float]:
        return hashed_features(text, self.dim, self.seed, self.ngram_orders)

    def score(self, text: str) -> float:
        feats = self.features(text)
        return math.fsum(self.weights[i] * v for i, v in sorted(feats.items())) + self.bias

    def save(self, path: str | Path) -> None:
        nz = np.flatnonzero(self.weights)
        record = {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "dim": self.dim,
            "seed": self.seed,
            "ngram_orders": list(self.ngram_orders),
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "l2": self.l2,
            "bias": self.bias,
            "weights": {str(int(i)): float(self.weights[i]) for i in nz},
        }
        Path(path).write_text(json.dumps(record, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "FactOpinionModel":
        record = json.loads(Path(path).read_text(encoding="utf-8"))
        if record.get("format") != MODEL_FORMAT or record.get("version") != MODEL_VERSION:
            raise ValueError(f"{path}: not a version-{MODEL_VERSION} fact/opinion model")
        dim = int(record["dim"])
        weights = np.zeros(dim + len(_POS_ORDER))
        for i, v in record["weights"].items():
            weights[int(i)] = v
        return cls(
            weights,
            bias=float(record["bias"]),
            dim=dim,
            seed=int(record["seed"]),
            ngram_orders=tuple(record["ngram_orders"]),
            epochs=int(record["epochs"]),
            learning_rate=float(record["learning_rate"]),
            l2=float(record["l2"]),
        )


def _slot(gram: str, dim: int, seed: int) -> int:
    digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8,
                             salt=seed.to_bytes(16, "little")).digest()
    return int.from_bytes(digest, "little") % dim


def hashed_features(text: str, dim: int, seed: int = 0,
                    orders: Sequence[int] = (1, 2, 3)) -> dict[int, float]:
    """L2-normalized counts of hashed stem n-grams plus POS-tag counts.

    n-grams never cross sentence boundaries, so repeating a text leaves its
    normalized features unchanged.
    """
    counts: Counter[int] = Counter()
    for s in tag_document(split_sentences(text)):
        units = [t.stem if t.kind is Kind.WORD else "<num>"
                 for t in s.tokens if t.kind is not Kind.PUNCT]
        for n in orders:
            for i in range(len(units) - n + 1):
                counts[_slot(f"{n}:" + " ".join(units[i:i + n]), dim, seed)] += 1
        for t in s.tokens:
            if t.kind is Kind.WORD:
                counts[dim + _POS_ORDER.index(t.pos)] += 1
    norm = math.sqrt(sum(v * v for v in counts.values()))
    if norm == 0:
        return {}
    return {i: v / norm for i, v in counts.items()}


def _label_sign(label: TileKind | str) -> int:
    kind = TileKind(label.value if isinstance(label, TileKind) else str(label).capitalize())
    return 1 if kind is TileKind.OPINION else -1


def train_fact_opinion(
    labeled: Sequence[tuple[str, TileKind | str]],
    dim: int = 1 << 18,
    seed: int = 0,
    ngram_orders: tuple[int, ...] = (1, 2, 3),
    epochs: int = 20,
    learning_rate: float = 0.5,
    l2: float = 1e-4,
) -> FactOpinionModel:
    """Hinge-loss linear classifier trained by stochastic subgradient descent.

    Step size at update t is ``learning_rate / (1 + learning_rate * l2 * t)``;
    the example order per epoch is a permutation drawn from ``seed``.
    """
    ys = np.array([_label_sign(label) for _, label in labeled])
    if len(set(ys.tolist())) < 2:
        raise ValueError("training data needs both fact and opinion examples")
    xs = [hashed_features(text, dim, seed, ngram_orders) for text, _ in labeled]
    idx = [np.fromiter(x.keys(), dtype=np.int64, count=len(x)) for x in xs]
    val = [np.fromiter(x.values(), dtype=float, count=len(x)) for x in xs]

    rng = np.random.default_rng(seed)
    v = np.zeros(dim + len(_POS_ORDER))
    scale = 1.0  # weights = scale * v, so the L2 shrink is O(1)
    bias = 0.0
    t = 0
    for _ in range(epochs):
        for i in rng.permutation(len(xs)):
            t += 1
            eta = learning_rate / (1 + learning_rate * l2 * t)
            margin = ys[i] * (scale * float(v[idx[i]] @ val[i]) + bias)
            scale *= 1 - eta * l2
            if margin < 1:
                v[idx[i]] += eta * ys[i] * val[i] / scale
                bias += eta * ys[i]
            if scale < 1e-9:
                v *= scale
                scale = 1.0
    return FactOpinionModel(scale * v, bias, dim, seed, tuple(ngram_orders), epochs, learning_rate, l2)


def classify_tile(model: FactOpinionModel, tile: Tile | str) -> TileKind:
    text = tile.text if isinstance(tile, Tile) else tile
    return TileKind.OPINION if model.score(text) > 0 else TileKind.FACT


def read_labeled(lines: Iterable[str]) -> list[tuple[str, TileKind]]:
    examples = []
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\n")
        if not line.strip():
            continue
        label, sep, text = line.partition("\t")
        if not sep or label.lower() not in ("fact", "opinion"):
            raise ValueError(f"line {lineno}: expected fact|opinion<TAB>text")
        examples.append((text, TileKind(label.capitalize())))
    return examples


@lru_cache(maxsize=None)
def default_model(seed: int = 0) -> FactOpinionModel:
    """Model trained on the small bundled seed set."""
    text = resources.files(__package__).joinpath("resources").joinpath(
        "fact_opinion_seed.tsv").read_text("utf-8")
    return train_fact_opinion(read_labeled(text.splitlines()), seed=seed)


# ----------------------------------------------------------------- summarize

@dataclass(frozen=True)
class OpinioConfig:
    window: int = 20
    boundary_k: float = 0.5
    coherence_min: float = 0.2
    summary: SummaryConfig = field(default_factory=SummaryConfig)


Resolver = Callable[[Sequence[Sentence]], list[Sentence]]


@dataclass(frozen=True)
class AnalyzedTile:
    tile: Tile
    sentences: tuple[Sentence, ...]  # original, unresolved text


def analyze_document(
    text: str,
    doc_index: int,
    model: FactOpinionModel,
    lexicon: SentimentLexicon,
    config: OpinioConfig = OpinioConfig(),
    resolver: Resolver = resolve_anaphora,
) -> list[AnalyzedTile]:
    original = tag_document(split_sentences(text, doc_index=doc_index))
    resolved = [s for para in paragraphs(original) for s in resolver(para)]
    out = []
    for tile in tile_text(resolved, config.window, config.boundary_k):
        a, b = tile.sentence_range
        kind = classify_tile(model, tile)
        if kind is TileKind.OPINION:
            pol, strength = tile_polarity(
                tile, [sentence_sentiment(lexicon, s) for s in resolved[a:b + 1]])
        else:
            pol, strength = NEUTRAL_WEAK
        tile = replace(tile, kind=kind, polarity=pol, strength=strength)
        out.append(AnalyzedTile(tile, tuple(original[a:b + 1])))
    return out


def cluster_coherence(members: Sequence[int], vectors) -> float:
    """Mean pairwise cosine of the member tiles; a lone tile is coherent."""
    pairs = list(combinations(members, 2))
    if not pairs:
        return 1.0
    return math.fsum(cosine(vectors[i], vectors[j]) for i, j in pairs) / len(pairs)


def select_tiles(
    tiles: Sequence[Tile],
    question: tuple[Polarity, Strength],
    coherence_min: float = 0.2,
    vectors=None,
) -> list[int]:
    """Indices of the tiles passed on to TextRank."""
    everything = list(range(len(tiles)))
    if question[1] is Strength.WEAK:
        return [i for i, t in enumerate(tiles)
                if t.kind is TileKind.FACT or t.strength is Strength.WEAK]
    opinions = [t for t in tiles if t.kind is TileKind.OPINION]
    strong = sum(1 for t in opinions if t.strength is Strength.STRONG)
    if 2 * strong <= len(opinions):
        return everything
    clusters: dict[Polarity, list[int]] = {}
    for i, t in enumerate(tiles):
        clusters.setdefault(t.polarity, []).append(i)
    sizes = sorted((len(m) for m in clusters.values()), reverse=True)
    if len(sizes) > 1 and sizes[0] == sizes[1]:
        return everything
    leader = max(clusters.values(), key=len)
    if vectors is None:
        vectors = tfidf_vectors([tokenize(t.text) for t in tiles])
    if cluster_coherence(leader, vectors) >= coherence_min:
        return leader
    return everything


def opiniosumm(
    instance: SummaryInstance,
    model: FactOpinionModel,
    lexicon: SentimentLexicon,
    config: OpinioConfig = OpinioConfig(),
    resolver: Resolver = resolve_anaphora,
) -> Summary:
    analyzed = [
        at
        for d, doc in enumerate(instance.candidates)
        for at in analyze_document(doc, d, model, lexicon, config, resolver)
    ]
    if not analyzed:
        raise SummarizationError("no candidate text to summarize")
    tiles = [at.tile for at in analyzed]
    question = Sentence(tuple(tokenize(instance.question)), instance.question)
    q_polarity = sentence_sentiment(lexicon, question)
    try:
        vectors = tfidf_vectors([tokenize(t.text) for t in tiles])
    except ValueError:  # no content words anywhere
        vectors = [TermVector({})] * len(tiles)
    chosen = select_tiles(tiles, q_polarity, config.coherence_min, vectors)

    def pool(indices: Iterable[int]) -> list[Sentence]:
        picked = [s for i in indices for s in analyzed[i].sentences
                  if s.word_count >= MIN_CANDIDATE_WORDS]
        return sorted(picked, key=lambda s: s.key)

    sentences = pool(chosen) or pool(range(len(analyzed)))
    if not sentences:
        raise SummarizationError("no extractable sentence in the candidates")
    return textrank(sentences, config.summary)
