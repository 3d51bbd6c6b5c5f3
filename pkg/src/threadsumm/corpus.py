"""Turn raw Yahoo! Answers L6 XML dumps into a summarization corpus.

Pipeline per thread: parse -> length filters -> reference compression ->
unique-best-answer validation -> reference support check. Accepted threads
become :class:`SummaryInstance` records written as JSON lines.
"""

from __future__ import annotations

import html
import json
import math
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from typing import BinaryIO, Callable, Iterable, Iterator, Sequence

from ._parallel import ordered_map
from .textcore import (
    POS,
    Sentence,
    Tagger,
    cosine,
    split_sentences,
    tag_document,
    tfidf_vectors,
    tokenize,
    truncate_words,
    word_count,
)


class CorpusFormatError(ValueError):
    """The XML framing itself is broken; the stream cannot continue."""


@dataclass(frozen=True)
class QuestionThread:
    id: str
    subject: str
    best_answer: str
    answers: tuple[str, ...] = ()
    content: str = ""
    maincat: str = ""
    subcat: str = ""
    language: str = ""
    date: str = ""


@dataclass(frozen=True)
class SummaryInstance:
    id: str
    question: str
    reference: str
    candidates: tuple[str, ...]
    category: str = ""

    def to_json(self) -> str:
        record = {
            "id": self.id,
            "question": self.question,
            "reference": self.reference,
            "candidates": list(self.candidates),
            "category": self.category,
        }
        return json.dumps(record, ensure_ascii=False, separators=(",", ":"))

    @classmethod
    def from_dict(cls, record: dict) -> "SummaryInstance":
        try:
            return cls(
                id=str(record["id"]),
                question=record["question"],
                reference=record["reference"],
                candidates=tuple(record["candidates"]),
                category=record.get("category", ""),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed corpus record: {exc}") from exc


def read_corpus(lines: Iterable[str]) -> list[SummaryInstance]:
    instances = []
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
        if not isinstance(record, dict):
            raise ValueError(f"line {lineno}: expected a JSON object")
        instances.append(SummaryInstance.from_dict(record))
    return instances


class Reason(str, Enum):
    TOO_FEW_ANSWERS = "TooFewAnswers"
    BEST_ANSWER_TOO_SHORT = "BestAnswerTooShort"
    CANDIDATES_TOO_SHORT = "CandidatesTooShort"
    NOT_UNIQUE_BEST = "NotUniqueBest"
    REFERENCE_UNSUPPORTED = "ReferenceUnsupported"
    NON_ENGLISH = "NonEnglish"
    MALFORMED = "Malformed"


@dataclass(frozen=True)
class FilterOutcome:
    accepted: bool
    reason: Reason | None = None

    def __post_init__(self):
        if self.accepted == (self.reason is not None):
            raise ValueError("reason must be given exactly when rejected")

    @property
    def status(self) -> str:
        return "Accepted" if self.accepted else "Rejected"


ACCEPTED = FilterOutcome(True)


def rejected(reason: Reason) -> FilterOutcome:
    return FilterOutcome(False, reason)


@dataclass(frozen=True)
class FilterConfig:
    min_answers: int = 5
    min_best_answer_words: int = 100
    min_candidate_words: int = 200
    reference_words: int = 100
    support_threshold: float = 0.5
    max_unsupported_sentences: int = 2


# ---------------------------------------------------------------- parsing

_XML_DECL_RE = re.compile(rb"^\s*(?:\xef\xbb\xbf)?\s*<\?xml[^>]*\?>")
_BR_RE = re.compile(r"<br\s*/?>", re.IGNORECASE)
_STREAM_ROOT = b"<l6stream>"


def _clean(text: str) -> str:
    return html.unescape(_BR_RE.sub("\n", text)).strip()


def _text_of(elem: ET.Element | None) -> str | None:
    if elem is None:
        return None
    return _clean("".join(elem.itertext()))


def _thread_from_element(doc: ET.Element, index: int) -> QuestionThread:
    uri = _text_of(doc.find("uri"))
    record_id = uri or str(index)
    subject = _text_of(doc.find("subject"))
    best = _text_of(doc.find("bestanswer"))
    if not subject:
        raise _Malformed(record_id, "missing subject")
    if not best:
        raise _Malformed(record_id, "missing bestanswer")
    answers = []
    nbest = doc.find("nbestanswers")
    if nbest is not None:
        for item in nbest.findall("answer_item"):
            text = _text_of(item)
            if text and text != best:
                answers.append(text)
    language = _text_of(doc.find("qlang")) or _text_of(doc.find("language")) or ""
    return QuestionThread(
        id=record_id,
        subject=subject,
        best_answer=best,
        answers=tuple(answers),
        content=_text_of(doc.find("content")) or "",
        maincat=_text_of(doc.find("maincat")) or _text_of(doc.find("cat")) or "",
        subcat=_text_of(doc.find("subcat")) or "",
        language=language,
        date=_text_of(doc.find("date")) or "",
    )


class _Malformed(Exception):
    def __init__(self, record_id: str, message: str):
        super().__init__(message)
        self.record_id = record_id


MalformedHandler = Callable[[int, str, str], None]


def parse_l6_stream(
    stream: BinaryIO,
    on_malformed: MalformedHandler | None = None,
    chunk_size: int = 1 << 16,
) -> Iterator[QuestionThread]:
    """Yield one :class:`QuestionThread` per ``document`` element, lazily.

    Accepts a bare concatenation of ``vespaadd`` records as well as the usual
    ``ystfeed``-wrapped dump. Records missing their subject or best answer are
    skipped and reported through ``on_malformed(index, id, message)``;
    broken XML framing raises :class:`CorpusFormatError`.
    """
    parser = ET.XMLPullParser(events=("start", "end"))
    parser.feed(_STREAM_ROOT)
    stack: list[ET.Element] = []
    index = 0

    def drain() -> Iterator[QuestionThread]:
        nonlocal index
        for event, elem in parser.read_events():
            if event == "start":
                stack.append(elem)
                continue
            stack.pop()
            if elem.tag == "document":
                try:
                    yield _thread_from_element(elem, index)
                except _Malformed as bad:
                    if on_malformed is not None:
                        on_malformed(index, bad.record_id, str(bad))
                index += 1
                elem.clear()
                if stack:
                    stack[-1].remove(elem)
            elif elem.tag == "vespaadd" and stack:
                stack[-1].remove(elem)

    first = True
    try:
        while True:
            chunk = stream.read(chunk_size)
            if first:
                # the declaration may straddle reads; gather up to its end
                while chunk and b">" not in chunk:
                    more = stream.read(chunk_size)
                    if not more:
                        break
                    chunk += more
                chunk = _XML_DECL_RE.sub(b"", chunk, count=1)
                first = False
            if not chunk:
                break
            parser.feed(chunk)
            yield from drain()
        parser.feed(b"</l6stream>")
        parser.close()
        yield from drain()
    except ET.ParseError as exc:
        raise CorpusFormatError(f"malformed XML stream: {exc}") from exc


# -------------------------------------------------------------- filtering

def is_english(language: str) -> bool:
    return language.strip().lower().startswith("en")


def filter_thread(thread: QuestionThread, config: FilterConfig = FilterConfig()) -> FilterOutcome:
    if len(thread.answers) < config.min_answers:
        return rejected(Reason.TOO_FEW_ANSWERS)
    if word_count(thread.best_answer) < config.min_best_answer_words:
        return rejected(Reason.BEST_ANSWER_TOO_SHORT)
    if sum(word_count(a) for a in thread.answers) < config.min_candidate_words:
        return rejected(Reason.CANDIDATES_TOO_SHORT)
    if thread.language and not is_english(thread.language):
        return rejected(Reason.NON_ENGLISH)
    return ACCEPTED


# ---------------------------------------------------- reference generation

PROPER_NOUN_WEIGHT = 1.0
COMMON_NOUN_WEIGHT = 0.25
PARAGRAPH_START_WEIGHT = 1.0
QUESTION_WORD_WEIGHT = 1.0


def sentence_priority(sentence: Sentence) -> float:
    proper = sum(1 for t in sentence.tokens if t.pos is POS.PROPER_NOUN)
    common = sum(1 for t in sentence.tokens if t.pos is POS.COMMON_NOUN)
    has_question = any(t.pos is POS.QUESTION_WORD for t in sentence.tokens)
    return (
        PROPER_NOUN_WEIGHT * proper
        + COMMON_NOUN_WEIGHT * common
        + PARAGRAPH_START_WEIGHT * sentence.paragraph_initial
        + QUESTION_WORD_WEIGHT * has_question
    )


def select_reference_sentences(sentences: Sequence[Sentence], limit: int = 100) -> list[int]:
    """Indices of the sentences kept for the reference, in document order.

    Sentences are visited by descending priority (document order on ties) and
    taken until the running word count reaches ``limit``.
    """
    order = sorted(range(len(sentences)), key=lambda i: (-sentence_priority(sentences[i]), i))
    chosen = []
    total = 0
    for i in order:
        if total >= limit:
            break
        chosen.append(i)
        total += sentences[i].word_count
    return sorted(chosen)


def build_reference(best_answer: str, limit: int = 100, tagger: Tagger = tag_document) -> str:
    if word_count(best_answer) < limit:
        return best_answer
    sentences = tagger(split_sentences(best_answer))
    picked = select_reference_sentences(sentences, limit)
    text = " ".join(sentences[i].raw for i in picked)
    return truncate_words(text, limit)


# ------------------------------------------------------------- validation

def cumulative_correlation(thread: QuestionThread) -> list[tuple[int, float]]:
    """Sum of tf-idf cosines from each answer to every other answer.

    Answer id 0 is the best answer; id ``k`` >= 1 is ``thread.answers[k-1]``.
    The idf is computed over this thread's answers only.
    """
    docs = [thread.best_answer, *thread.answers]
    vectors = tfidf_vectors([tokenize(d) for d in docs])
    scores = []
    for i, v in enumerate(vectors):
        total = math.fsum(cosine(v, u) for j, u in enumerate(vectors) if j != i)
        scores.append((i, total))
    return scores


def validate_unique_best(thread: QuestionThread) -> bool:
    scores = [s for _, s in cumulative_correlation(thread)]
    best, others = scores[0], scores[1:]
    if not others:
        return True
    runner_up = max(others)
    # fsum makes symmetric ties exact; the tolerance absorbs rounding in norms
    return best > runner_up and not math.isclose(best, runner_up, rel_tol=1e-12, abs_tol=1e-12)


def reference_support(reference: str, candidates: Sequence[str]) -> list[float]:
    """Best cosine between each contentful reference sentence and any candidate."""
    sentences = [s for s in split_sentences(reference) if s.content_stems()]
    if not sentences or not candidates:
        return [0.0] * len(sentences)
    cand_tokens = [tokenize(c) for c in candidates]
    vectors = tfidf_vectors(cand_tokens + [list(s.tokens) for s in sentences])
    cand_vecs = vectors[: len(candidates)]
    return [max(cosine(sv, cv) for cv in cand_vecs) for sv in vectors[len(candidates):]]


def check_reference_support(
    reference: str,
    candidates: Sequence[str],
    threshold: float = 0.5,
    max_unsupported: int = 2,
) -> bool:
    """False when more than ``max_unsupported`` reference sentences have no
    candidate above ``threshold`` correlation."""
    unsupported = sum(1 for c in reference_support(reference, candidates) if c <= threshold)
    return unsupported <= max_unsupported


# --------------------------------------------------------------- pipeline

def process_thread(
    thread: QuestionThread, config: FilterConfig = FilterConfig()
) -> tuple[FilterOutcome, SummaryInstance | None]:
    outcome = filter_thread(thread, config)
    if not outcome.accepted:
        return outcome, None
    reference = build_reference(thread.best_answer, config.reference_words)
    if not validate_unique_best(thread):
        return rejected(Reason.NOT_UNIQUE_BEST), None
    if not check_reference_support(
        reference, thread.answers, config.support_threshold, config.max_unsupported_sentences
    ):
        return rejected(Reason.REFERENCE_UNSUPPORTED), None
    instance = SummaryInstance(
        id=thread.id,
        question=thread.subject,
        reference=reference,
        candidates=thread.answers,
        category=thread.maincat,
    )
    return ACCEPTED, instance


@dataclass
class CorpusStats:
    records: int = 0
    rejections: dict[Reason, int] = field(default_factory=lambda: {r: 0 for r in Reason})
    threads: int = 0
    answers: int = 0
    answer_words: int = 0
    reference_words: int = 0

    def add(self, instance: SummaryInstance) -> None:
        self.threads += 1
        self.answers += len(instance.candidates)
        self.answer_words += sum(word_count(c) for c in instance.candidates)
        self.reference_words += word_count(instance.reference)

    @property
    def answers_per_thread(self) -> float:
        return self.answers / self.threads if self.threads else 0.0

    @property
    def words_per_answer(self) -> float:
        return self.answer_words / self.answers if self.answers else 0.0

    @property
    def words_per_reference(self) -> float:
        return self.reference_words / self.threads if self.threads else 0.0

    def rows(self) -> list[tuple[str, str]]:
        """Summary statistics rows, then pipeline counters when any records were read."""
        rows = [
            ("Question Threads", str(self.threads)),
            ("Answer documents", str(self.answers)),
            ("Answers/thread", f"{self.answers_per_thread:.3f}"),
            ("Words/answer", f"{self.words_per_answer:.3f}"),
            ("Words/reference", f"{self.words_per_reference:.3f}"),
        ]
        if self.records:
            rows.append(("Records read", str(self.records)))
            rows.extend((f"Rejected {r.value}", str(n)) for r, n in self.rejections.items())
        return rows

    def report(self) -> str:
        return "".join(f"{k}: {v}\n" for k, v in self.rows())


def corpus_stats(instances: Iterable[SummaryInstance]) -> CorpusStats:
    stats = CorpusStats()
    for inst in instances:
        stats.add(inst)
    return stats


RecordSink = Callable[[SummaryInstance], None]


def jsonl_sink(handle) -> RecordSink:
    def write(instance: SummaryInstance) -> None:
        handle.write(instance.to_json() + "\n")
    return write


def build_corpus(
    stream: BinaryIO,
    config: FilterConfig = FilterConfig(),
    sink: RecordSink | None = None,
    jobs: int = 1,
) -> CorpusStats:
    """Run the whole pipeline over an L6 stream, emitting accepted instances
    to ``sink`` in input order."""
    stats = CorpusStats()

    def malformed(index: int, record_id: str, message: str) -> None:
        stats.records += 1
        stats.rejections[Reason.MALFORMED] += 1

    threads = parse_l6_stream(stream, on_malformed=malformed)
    for outcome, instance in ordered_map(partial(process_thread, config=config), threads, jobs):
        stats.records += 1
        if instance is None:
            stats.rejections[outcome.reason] += 1
            continue
        stats.add(instance)
        if sink is not None:
            sink(instance)
    return stats
