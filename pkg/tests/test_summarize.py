import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from threadsumm.summarize import (
    BASELINES,
    SummarizationError,
    SummaryConfig,
    candidate_sentences,
    kl_divergence,
    klsum_greedy,
    klsum_order,
    lexrank,
    lexrank_scores,
    power_iteration,
    select_until_budget,
    sumbasic,
    sumbasic_order,
    textrank,
    textrank_scores,
    textrank_similarity,
)
from threadsumm.textcore import split_sentences, tag_document, word_count


def sents(text, doc_index=0):
    return tag_document(split_sentences(text, doc_index=doc_index))


def words(n, tag):
    return " ".join(f"{tag}{chr(97 + i % 26)}{i // 26}" for i in range(n)) + "."


# ------------------------------------------------------------------ budget

def test_single_long_sentence_truncated():
    s = sents(words(150, "w"))
    out = select_until_budget(s, 100)
    assert out.word_count == 100 == word_count(out.text)


def test_three_forty_word_sentences():
    s = sents(" ".join(words(40, t) for t in "abc"))
    out = select_until_budget(s, 100)
    assert out.picks == ((0, 0), (0, 1), (0, 2))
    assert word_count(out.text.split(". ")[-1]) == 20
    assert out.word_count == 100


def test_under_supplied_budget():
    out = select_until_budget(sents(words(50, "w")), 100)
    assert out.word_count == 50


def test_config_validation():
    for bad in ({"budget_words": 0}, {"damping": 1.0}, {"epsilon": 0}):
        with pytest.raises(ValueError):
            SummaryConfig(**bad)


# ---------------------------------------------------------------- SumBasic

def test_sumbasic_squares_top_word():
    s = sents("apple banana cherry. apple apple date. apple fig grape kiwi.")
    order, prob = sumbasic_order(s, budget_words=3)
    # p(apple) = 4/10; the second sentence scores (0.4 + 0.4 + 0.1) / 3 = 0.3
    assert order == [1]
    assert prob["appl"] == pytest.approx(0.16)
    assert prob["date"] == pytest.approx(0.01)
    assert prob["banana"] == pytest.approx(0.1)


def test_sumbasic_identical_sentences_in_index_order():
    s = sents("Cheap players rock. Cheap players rock. Cheap players rock.")
    order, _ = sumbasic_order(s, budget_words=100)
    assert order == [0, 1, 2]


def test_sumbasic_single_sentence():
    s = sents("Only one sentence here.")
    assert sumbasic(s).text == "Only one sentence here."


def test_sumbasic_needs_content():
    with pytest.raises(SummarizationError):
        sumbasic(sents("It is what it is."))


# ------------------------------------------------------------------ KL-Sum

def test_kl_zero_for_identical():
    p = {"a": 0.25, "b": 0.75}
    assert kl_divergence(p, dict(p)) == 0.0


def test_klsum_prefers_shared_sentence_with_oracle_value():
    s = sents("apple apple banana banana. kiwi lime.")
    order, trace = klsum_order(s, SummaryConfig(budget_words=4))
    assert order == [0]
    # P over 6 tokens; Q from the first sentence with additive smoothing 1e-3
    d = 1e-3
    P = {"appl": 2 / 6, "banana": 2 / 6, "kiwi": 1 / 6, "lime": 1 / 6}
    denom = 4 + 4 * d
    Q = {"appl": (2 + d) / denom, "banana": (2 + d) / denom, "kiwi": d / denom, "lime": d / denom}
    expected = sum(p * math.log(p / Q[w]) for w, p in P.items())
    assert trace[0] == pytest.approx(expected, abs=1e-12)


def test_klsum_trace_non_negative_and_non_increasing():
    text = ("The battery dies fast. Apple offers a replacement battery. "
            "The store sells music. Music from the store plays on the player. "
            "Players are cheap elsewhere.")
    order, trace = klsum_order(sents(text), SummaryConfig(budget_words=1000))
    assert sorted(order) == list(range(5))
    assert all(v >= 0 for v in trace)
    assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))


# ------------------------------------------------------------ power iteration

D = 0.85


def test_power_iteration_chain_closed_form():
    adj = [[0, 1, 0], [1, 0, 1], [0, 1, 0]]
    v = power_iteration(adj, D, epsilon=1e-12, max_iterations=1000)
    x = (2 + D) / (6 * (1 + D))
    assert v == pytest.approx([x, 1 - 2 * x, x], abs=1e-9)
    assert v[1] > v[0]


def test_power_iteration_dangling_two_nodes():
    # a -> b only; b has no out-weight and jumps uniformly
    v = power_iteration([[0, 1], [0, 0]], D, epsilon=1e-12, max_iterations=1000)
    assert v == pytest.approx([1 / (2 + D), (1 + D) / (2 + D)], abs=1e-9)


def test_power_iteration_trivial_cases():
    assert power_iteration(np.zeros((4, 4))) == pytest.approx([0.25] * 4)
    assert power_iteration([[0, 1], [1, 0]]) == pytest.approx([0.5, 0.5])
    assert len(power_iteration(np.zeros((0, 0)))) == 0


def test_power_iteration_errors():
    with pytest.raises(ValueError):
        power_iteration([[0, 1, 0], [1, 0, 1]])
    with pytest.raises(ValueError):
        power_iteration([[0, -1], [1, 0]])


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 20), st.integers(0, 2**32 - 1))
def test_power_iteration_is_distribution(n, seed):
    rng = np.random.default_rng(seed)
    adj = rng.random((n, n)) * (rng.random((n, n)) < 0.5)
    v = power_iteration(adj)
    assert np.all(v >= 0)
    assert abs(v.sum() - 1) <= 1e-6


# ------------------------------------------------------------- graph models

def test_lexrank_orthogonal_uniform():
    s = sents("Apple sells music. Batteries die quickly. Gardens need water.")
    assert lexrank_scores(s) == pytest.approx([1 / 3] * 3)


def test_lexrank_pair_outranks_outlier():
    s = sents("Gardens need fresh water. Batteries die too quickly. Gardens need fresh water.")
    scores = lexrank_scores(s)
    assert scores[0] == pytest.approx(scores[2])
    assert scores[0] > scores[1]
    assert lexrank(s, SummaryConfig(budget_words=4)).picks == ((0, 0),)


def test_textrank_similarity():
    assert textrank_similarity(["a"], ["a", "b"]) == 0.0
    assert textrank_similarity(["a", "b"], ["a", "c"]) == pytest.approx(1 / (2 * math.log(2)))


def test_textrank_no_overlap_index_order():
    s = sents("Apple sells music. Batteries die quickly. Gardens need water.")
    assert textrank(s).picks == ((0, 0), (0, 1), (0, 2))


def test_textrank_hub_first():
    # the second sentence shares one stem with each other; they share none
    s = sents("Kiwi lime mango. Apple kiwi battery peach. Apple plum grape. "
              "Battery fig date. Peach pear melon.")
    scores = textrank_scores(s)
    assert int(np.argmax(scores)) == 1
    assert scores.sum() == pytest.approx(1.0, abs=1e-6)
    assert textrank(s).picks[0] == (0, 1)


def test_permutation_changes_no_scores():
    docs = ["The battery dies fast. Apple offers a replacement battery.",
            "The store sells music. Music from the store plays on the player.",
            "Players are cheap elsewhere and the battery lasts."]
    base = candidate_sentences(docs)
    shuffled = base[:]
    random.Random(3).shuffle(shuffled)
    for fn in (lexrank_scores, textrank_scores):
        a = dict(zip((s.key for s in base), fn(base)))
        b = dict(zip((s.key for s in shuffled), fn(shuffled)))
        for k in a:
            assert a[k] == pytest.approx(b[k], abs=1e-9)
    for name, fn in BASELINES.items():
        assert fn(base).picks == fn(shuffled).picks, name


def test_candidate_sentences_drop_short():
    s = candidate_sentences(["Yes. It is good. Really great stuff here!"])
    assert [x.raw for x in s] == ["It is good.", "Really great stuff here!"]
    assert [x.key for x in s] == [(0, 1), (0, 2)]


@pytest.mark.parametrize("name", sorted(BASELINES))
def test_budget_and_determinism(name):
    docs = [" ".join(words(12, t) for t in "abcdef"), " ".join(words(9, t) for t in "ghij")]
    s = candidate_sentences(docs)
    cfg = SummaryConfig(budget_words=50)
    out = BASELINES[name](s, cfg)
    assert out.word_count == 50 == word_count(out.text)
    assert len(set(out.picks)) == len(out.picks)
    assert BASELINES[name](s, cfg) == out


def test_klsum_needs_content():
    with pytest.raises(SummarizationError):
        klsum_greedy(sents("It is what it is."))
