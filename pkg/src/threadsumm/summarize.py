"""Baseline extractive multi-document summarizers.

SumBasic, greedy KL-Sum, LexRank and TextRank over the sentences of a
thread's candidate answers, all sharing one word-budgeted selection step.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .textcore import Sentence, cosine, split_sentences, tag_document, tfidf_vectors, truncate_words

MIN_CANDIDATE_WORDS = 3
# Scores are rounded before ranking so that float noise cannot reorder ties.
RANK_DECIMALS = 12


class SummarizationError(ValueError):
    pass


@dataclass(frozen=True)
class SummaryConfig:
    budget_words: int = 100
    lexrank_threshold: float = 0.1
    damping: float = 0.85
    epsilon: float = 1e-6
    max_iterations: int = 100
    kl_smoothing: float = 1e-3

    def __post_init__(self):
        if self.budget_words <= 0:
            raise ValueError("budget_words must be positive")
        if not 0 < self.damping < 1:
            raise ValueError("damping must lie in (0, 1)")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class Summary:
    picks: tuple[tuple[int, int], ...]
    text: str
    word_count: int


def candidate_sentences(documents: Sequence[str]) -> list[Sentence]:
    """Tagged sentences of every document that are long enough to extract."""
    out = []
    for d, doc in enumerate(documents):
        for s in tag_document(split_sentences(doc, doc_index=d)):
            if s.word_count >= MIN_CANDIDATE_WORDS:
                out.append(s)
    return out


def select_until_budget(ranked: Sequence[Sentence], budget_words: int) -> Summary:
    picks = []
    parts = []
    total = 0
    for s in ranked:
        if total >= budget_words:
            break
        n = s.word_count
        if total + n > budget_words:
            parts.append(truncate_words(s.raw, budget_words - total))
            total = budget_words
        else:
            parts.append(s.raw)
            total += n
        picks.append(s.key)
    return Summary(tuple(picks), " ".join(parts), total)


def _rank(sentences: Sequence[Sentence], scores) -> list[Sentence]:
    order = sorted(
        range(len(sentences)),
        key=lambda i: (-round(float(scores[i]), RANK_DECIMALS), sentences[i].key),
    )
    return [sentences[i] for i in order]


# ---------------------------------------------------------------- SumBasic

def sumbasic_order(sentences: Sequence[Sentence], budget_words: int) -> tuple[list[int], dict[str, float]]:
    """Pick order of SumBasic plus the word probabilities after the last update."""
    stems = [s.content_stems() for s in sentences]
    scorable = [i for i, st in enumerate(stems) if st]
    if not scorable:
        raise SummarizationError("no sentence has a content word")
    counts = Counter(w for i in scorable for w in stems[i])
    total = sum(counts.values())
    prob = {w: c / total for w, c in counts.items()}

    remaining = sorted(scorable, key=lambda i: sentences[i].key)
    order: list[int] = []
    words = 0
    while remaining and words < budget_words:
        live = {w for i in remaining for w in stems[i]}
        top = min(live, key=lambda w: (-prob[w], w))
        holders = [i for i in remaining if top in stems[i]]

        def score(i: int) -> float:
            return sum(prob[w] for w in stems[i]) / len(stems[i])

        pick = min(holders, key=lambda i: (-round(score(i), RANK_DECIMALS), sentences[i].key))
        order.append(pick)
        remaining.remove(pick)
        words += sentences[pick].word_count
        for w in set(stems[pick]):
            prob[w] = prob[w] ** 2
    return order, prob


def sumbasic(sentences: Sequence[Sentence], config: SummaryConfig = SummaryConfig()) -> Summary:
    order, _ = sumbasic_order(sentences, config.budget_words)
    return select_until_budget([sentences[i] for i in order], config.budget_words)


# ------------------------------------------------------------------ KL-Sum

def kl_divergence(p: dict[str, float], q: dict[str, float]) -> float:
    return math.fsum(pw * math.log(pw / q[w]) for w, pw in p.items() if pw > 0)


def _smoothed(counts: Counter, vocab: Sequence[str], delta: float) -> dict[str, float]:
    denom = sum(counts.values()) + delta * len(vocab)
    return {w: (counts[w] + delta) / denom for w in vocab}


def klsum_order(sentences: Sequence[Sentence], config: SummaryConfig = SummaryConfig()) -> tuple[list[int], list[float]]:
    """Greedy pick order and the KL(P || Q) value after each pick."""
    stems = [s.content_stems() for s in sentences]
    scorable = [i for i, st in enumerate(stems) if st]
    if not scorable:
        raise SummarizationError("no sentence has a content word")
    doc_counts = Counter(w for i in scorable for w in stems[i])
    vocab = sorted(doc_counts)
    n = sum(doc_counts.values())
    target = {w: doc_counts[w] / n for w in vocab}

    summary = Counter()
    remaining = sorted(scorable, key=lambda i: sentences[i].key)
    order, trace = [], []
    words = 0
    while remaining and words < config.budget_words:
        best_i, best_kl = None, math.inf
        for i in remaining:
            kl = kl_divergence(target, _smoothed(summary + Counter(stems[i]), vocab, config.kl_smoothing))
            if round(kl, RANK_DECIMALS) < round(best_kl, RANK_DECIMALS):
                best_i, best_kl = i, kl
        order.append(best_i)
        trace.append(best_kl)
        remaining.remove(best_i)
        summary.update(stems[best_i])
        words += sentences[best_i].word_count
    return order, trace


def klsum_greedy(sentences: Sequence[Sentence], config: SummaryConfig = SummaryConfig()) -> Summary:
    order, _ = klsum_order(sentences, config)
    return select_until_budget([sentences[i] for i in order], config.budget_words)


# ------------------------------------------------------------ graph models

def power_iteration(adjacency, damping: float = 0.85, epsilon: float = 1e-6,
                    max_iterations: int = 100) -> np.ndarray:
    """Stationary scores of the damped random walk on a weighted graph.

    Rows are normalized to transition probabilities; rows with no outgoing
    weight jump uniformly.
    """
    a = np.asarray(adjacency, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("adjacency must be a square matrix")
    if not np.all(np.isfinite(a)) or np.any(a < 0):
        raise ValueError("adjacency must be finite and non-negative")
    n = a.shape[0]
    if n == 0:
        return np.zeros(0)
    out = a.sum(axis=1)
    m = np.empty_like(a)
    dangling = out == 0
    m[~dangling] = a[~dangling] / out[~dangling, None]
    m[dangling] = 1.0 / n
    v = np.full(n, 1.0 / n)
    for _ in range(max_iterations):
        nxt = (1 - damping) / n + damping * (m.T @ v)
        delta = np.abs(nxt - v).sum()
        v = nxt
        if delta < epsilon:
            break
    return v


def lexrank_scores(sentences: Sequence[Sentence], config: SummaryConfig = SummaryConfig()) -> np.ndarray:
    n = len(sentences)
    if n == 0:
        return np.zeros(0)
    docs = [s.tokens for s in sentences]
    vecs = tfidf_vectors(docs) if any(s.content_stems() for s in sentences) else None
    adj = np.zeros((n, n))
    if vecs is not None:
        for i in range(n):
            for j in range(i + 1, n):
                if cosine(vecs[i], vecs[j]) >= config.lexrank_threshold:
                    adj[i, j] = adj[j, i] = 1.0
    return power_iteration(adj, config.damping, config.epsilon, config.max_iterations)


def lexrank(sentences: Sequence[Sentence], config: SummaryConfig = SummaryConfig()) -> Summary:
    if not sentences:
        raise SummarizationError("no sentences to summarize")
    ranked = _rank(sentences, lexrank_scores(sentences, config))
    return select_until_budget(ranked, config.budget_words)


def textrank_similarity(a: Sequence[str], b: Sequence[str]) -> float:
    """Shared-stem overlap normalized by log sentence lengths."""
    if len(a) <= 1 or len(b) <= 1:
        return 0.0
    return len(set(a) & set(b)) / (math.log(len(a)) + math.log(len(b)))


def textrank_scores(sentences: Sequence[Sentence], config: SummaryConfig = SummaryConfig()) -> np.ndarray:
    stems = [s.content_stems() for s in sentences]
    n = len(sentences)
    adj = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            adj[i, j] = adj[j, i] = textrank_similarity(stems[i], stems[j])
    return power_iteration(adj, config.damping, config.epsilon, config.max_iterations)


def textrank(sentences: Sequence[Sentence], config: SummaryConfig = SummaryConfig()) -> Summary:
    if not sentences:
        raise SummarizationError("no sentences to summarize")
    ranked = _rank(sentences, textrank_scores(sentences, config))
    return select_until_budget(ranked, config.budget_words)


BASELINES = {
    "sumbasic": sumbasic,
    "klsum": klsum_greedy,
    "lexrank": lexrank,
    "textrank": textrank,
}
