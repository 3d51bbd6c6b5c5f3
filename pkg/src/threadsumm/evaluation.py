"""ROUGE-1/2 scoring, corpus reports and the greedy extractive upper bound."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .corpus import SummaryInstance
from .summarize import Summary, select_until_budget
from .textcore import Kind, Sentence, tokenize

TSV_HEADER = ("id", "algorithm", "rouge1_r", "rouge1_p", "rouge1_f",
              "rouge2_r", "rouge2_p", "rouge2_f")
MEAN_ID = "__mean__"


@dataclass(frozen=True)
class RougeScore:
    n: int
    recall: float
    precision: float
    f1: float

    @classmethod
    def from_counts(cls, n: int, overlap: int, ref_total: int, cand_total: int) -> "RougeScore":
        r = overlap / ref_total if ref_total else 0.0
        p = overlap / cand_total if cand_total else 0.0
        f = 2 * p * r / (p + r) if p + r > 0 else 0.0
        return cls(n, r, p, f)


def rouge_stems(text: str) -> list[str]:
    """Stemmed Word tokens with stopwords kept."""
    return [t.stem for t in tokenize(text) if t.kind is Kind.WORD]


def ngrams(units: Sequence[str], n: int) -> Counter:
    return Counter(tuple(units[i:i + n]) for i in range(len(units) - n + 1))


def rouge_n(candidate: str, reference: str, n: int) -> RougeScore:
    if n not in (1, 2):
        raise ValueError("only ROUGE-1 and ROUGE-2 are supported")
    cand = ngrams(rouge_stems(candidate), n)
    ref = ngrams(rouge_stems(reference), n)
    overlap = sum(min(c, cand[g]) for g, c in ref.items())
    return RougeScore.from_counts(n, overlap, sum(ref.values()), sum(cand.values()))


@dataclass(frozen=True)
class EvalRow:
    id: str
    algorithm: str
    rouge1: RougeScore
    rouge2: RougeScore

    def fields(self) -> list[str]:
        vals = [self.rouge1.recall, self.rouge1.precision, self.rouge1.f1,
                self.rouge2.recall, self.rouge2.precision, self.rouge2.f1]
        return [self.id, self.algorithm, *(repr(float(v)) for v in vals)]


@dataclass(frozen=True)
class EvalReport:
    per_instance: tuple[EvalRow, ...]
    aggregates: tuple[EvalRow, ...]

    def algorithms(self) -> list[str]:
        return [row.algorithm for row in self.aggregates]

    def mean(self, algorithm: str) -> EvalRow:
        for row in self.aggregates:
            if row.algorithm == algorithm:
                return row
        raise KeyError(algorithm)

    def to_tsv(self) -> str:
        lines = ["\t".join(TSV_HEADER)]
        lines += ["\t".join(r.fields()) for r in (*self.per_instance, *self.aggregates)]
        return "\n".join(lines) + "\n"


def _mean_score(n: int, scores: Sequence[RougeScore]) -> RougeScore:
    k = len(scores)
    return RougeScore(
        n,
        math.fsum(s.recall for s in scores) / k,
        math.fsum(s.precision for s in scores) / k,
        math.fsum(s.f1 for s in scores) / k,
    )


def evaluate_corpus(
    corpus: Iterable[SummaryInstance],
    summaries: Iterable[tuple[str, str, str]],
) -> EvalReport:
    """Score ``(id, algorithm, summary_text)`` triples against the corpus
    references. Rows come out ordered by (id, algorithm)."""
    references = {inst.id: inst.reference for inst in corpus}
    rows = []
    for sid, algorithm, text in summaries:
        if sid not in references:
            raise KeyError(f"no reference for summary id {sid!r}")
        ref = references[sid]
        rows.append(EvalRow(sid, algorithm, rouge_n(text, ref, 1), rouge_n(text, ref, 2)))
    rows.sort(key=lambda r: (r.id, r.algorithm))
    by_algo: dict[str, list[EvalRow]] = {}
    for r in rows:
        by_algo.setdefault(r.algorithm, []).append(r)
    aggregates = tuple(
        EvalRow(MEAN_ID, algo,
                _mean_score(1, [r.rouge1 for r in group]),
                _mean_score(2, [r.rouge2 for r in group]))
        for algo, group in sorted(by_algo.items())
    )
    return EvalReport(tuple(rows), aggregates)


def greedy_upper_bound(
    candidates: Sequence[Sentence],
    reference: str,
    budget_words: int = 100,
) -> tuple[Summary, RougeScore]:
    """Greedy approximation of the best extractive ROUGE-1 recall.

    Each step adds the sentence whose inclusion (after budget truncation)
    raises recall the most, preferring shorter sentences and then document
    order on ties; it stops once nothing helps or the budget is spent.
    """
    ref_counts = ngrams(rouge_stems(reference), 1)
    ref_total = sum(ref_counts.values())

    def recall_of(picked: Sequence[Sentence]) -> tuple[float, Summary]:
        summary = select_until_budget(picked, budget_words)
        cand = ngrams(rouge_stems(summary.text), 1)
        overlap = sum(min(c, cand[g]) for g, c in ref_counts.items())
        return (overlap / ref_total if ref_total else 0.0), summary

    picked: list[Sentence] = []
    current, summary = 0.0, select_until_budget([], budget_words)
    remaining = sorted(candidates, key=lambda s: s.key)
    while remaining and summary.word_count < budget_words:
        best = None
        for s in remaining:
            gain, trial = recall_of([*picked, s])
            key = (-gain, s.word_count, s.key)
            if best is None or key < best[0]:
                best = (key, s, gain, trial)
        _, s, gain, trial = best
        if gain <= current:
            break
        picked.append(s)
        remaining.remove(s)
        current, summary = gain, trial
    return summary, rouge_n(summary.text, reference, 1)


def mean_recall(report: EvalReport, n: int = 1) -> Mapping[str, float]:
    return {
        row.algorithm: (row.rouge1 if n == 1 else row.rouge2).recall
        for row in report.aggregates
    }
