import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from synthetic import fact_opinion_split, two_topic_document
from threadsumm.corpus import SummaryInstance
from threadsumm.opinio import (
    NEUTRAL_WEAK,
    FactOpinionModel,
    Polarity,
    SentimentLexicon,
    Strength,
    Tile,
    TileKind,
    TokenSequence,
    analyze_document,
    boundary_gaps,
    classify_tile,
    cluster_coherence,
    default_lexicon,
    default_model,
    gap_profile,
    gap_score,
    hashed_features,
    opiniosumm,
    paragraphs,
    read_labeled,
    resolve_anaphora,
    select_tiles,
    sentence_sentiment,
    tile_polarity,
    tile_text,
    train_fact_opinion,
)
from threadsumm.summarize import candidate_sentences, textrank
from threadsumm.textcore import TermVector, split_sentences, tag_document

POS_S = (Polarity.POSITIVE, Strength.STRONG)
NEG_S = (Polarity.NEGATIVE, Strength.STRONG)
POS_W = (Polarity.POSITIVE, Strength.WEAK)
NEG_W = (Polarity.NEGATIVE, Strength.WEAK)


def tagged(text):
    return tag_document(split_sentences(text))


def resolved_text(text):
    return " ".join(s.raw for s in resolve_anaphora(tagged(text)))


# ------------------------------------------------------------------ anaphora

def test_resolve_unique_antecedent():
    assert resolved_text("John went home. He slept.") == "John went home. John slept."


def test_resolve_without_antecedent():
    assert resolved_text("He slept.") == "He slept."


def test_resolve_nearest_antecedent():
    out = resolved_text("Apple makes iPods. Sony hates them. It wins.")
    assert out.endswith("Sony wins.")


def test_first_and_second_person_untouched():
    assert resolved_text("John asked. I told you.") == "John asked. I told you."


def test_resolve_offsets_and_idempotence():
    once = resolve_anaphora(tagged("Mary bought an iPod. She loves it a lot."))
    for s in once:
        for t in s.tokens:
            assert s.raw[t.char_offset:t.end] == t.surface
    twice = resolve_anaphora(once)
    assert [s.raw for s in twice] == [s.raw for s in once]


def test_paragraph_grouping():
    sents = split_sentences("A b c. D e f.\n\nG h i.")
    assert [len(p) for p in paragraphs(sents)] == [2, 1]


# -------------------------------------------------------------------- tiling

def test_gap_score_examples():
    seq = lambda *s: TokenSequence(tuple(s), 0)
    assert gap_score(seq("a", "b"), seq("c", "d"), set(), 2) == 1.0
    assert gap_score(seq("a", "b"), seq("a", "b"), {"a", "b"}, 2) == 0.0
    # w = 4: three new on the left, one new on the right
    assert gap_score(seq("a", "b", "c", "x"), seq("a", "d", "x", "b"), {"x"}, 4) == 0.5
    with pytest.raises(ValueError):
        gap_score(seq("a"), seq("b"), set(), 0)


@settings(max_examples=60)
@given(st.lists(st.sampled_from("abcdefghijklmnop"), max_size=120), st.integers(1, 10))
def test_gap_scores_in_unit_interval(stems, w):
    profile = gap_profile(stems, w)
    assert all(0.0 <= g <= 1.0 for g in profile)
    seen = set()
    for g, start in enumerate(range(0, len(stems) - w, w)):
        seen.update(stems[:start])
        if seen >= set(stems):
            assert profile[g] == 0.0


def test_boundary_guards():
    assert boundary_gaps([0.5, 0.5, 0.5, 0.5]) == []
    assert boundary_gaps([0.9]) == []
    # a run of high gaps gives one boundary at its start; gap 0 never counts
    assert boundary_gaps([0.9, 0.1, 0.1, 0.8, 0.8, 0.1]) == [3]


def test_two_topic_blocks_split_at_junction():
    text, junction = two_topic_document(seed=2)
    sents = tagged(text)
    tiles = tile_text(sents)
    assert len(tiles) == 2
    start = sum(len(s.content_stems()) for s in sents[:tiles[1].sentence_range[0]])
    assert abs(start - junction) <= 20


def test_uniform_vocabulary_single_tile():
    text = " ".join(["Apple battery music player store."] * 30)
    assert len(tile_text(tagged(text))) == 1


def test_short_document_single_tile():
    text = "alpha beta gamma delta epsilon zeta eta theta iota kappa. " * 3
    assert len(tile_text(tagged(text))) == 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_tiles_partition_sentences(seed):
    sents = tagged(two_topic_document(seed)[0])
    tiles = tile_text(sents)
    covered = [i for t in tiles for i in range(t.sentence_range[0], t.sentence_range[1] + 1)]
    assert covered == list(range(len(sents)))


# ----------------------------------------------------------------- sentiment

LEX = SentimentLexicon({"good": (0.6, 0.1), "okai": (0.3, 0.1), "bad": (0.0, 0.8)})


def sentiment(text, lex=LEX):
    (s,) = tagged(text)
    return sentence_sentiment(lex, s)


def test_sentence_sentiment_cases():
    assert sentiment("Nothing matches here.") == NEUTRAL_WEAK
    assert sentiment("Good phone.") == POS_S
    assert sentiment("Okay phone.") == NEUTRAL_WEAK
    assert sentiment("Bad phone.") == NEG_S


def test_lexicon_parse_and_range():
    lex = SentimentLexicon.parse(["# comment", "good\t0.5\t0", ""])
    assert lex.entries == {"good": (0.5, 0.0)}
    with pytest.raises(ValueError):
        SentimentLexicon.parse(["good\t1.5\t0"])
    with pytest.raises(ValueError):
        SentimentLexicon.parse(["good 0.5 0"])


def test_default_lexicon_polar_words():
    assert sentiment("Amazing player.", default_lexicon()) == POS_S
    assert sentiment("Awful player.", default_lexicon()) == NEG_S


def test_tile_polarity_cases():
    assert tile_polarity(None, [POS_S, POS_S, NEG_S]) == POS_S
    assert tile_polarity(None, [POS_W, NEG_W]) == NEUTRAL_WEAK
    assert tile_polarity(None, [NEUTRAL_WEAK, NEUTRAL_WEAK, POS_S]) == NEUTRAL_WEAK
    assert tile_polarity(None, [POS_S, POS_W, POS_W]) == POS_W
    assert tile_polarity(None, []) == NEUTRAL_WEAK


# ---------------------------------------------------------------- classifier

def labeled(items):
    return [(t, TileKind(l.capitalize())) for t, l in items]


@pytest.fixture(scope="module")
def synthetic_model():
    train, _ = fact_opinion_split()
    return train_fact_opinion(labeled(train), seed=0)


def test_training_fit(synthetic_model):
    train, _ = fact_opinion_split()
    preds = [classify_tile(synthetic_model, t) for t, _ in train]
    gold = [TileKind(l.capitalize()) for _, l in train]
    tp = sum(p is g is TileKind.OPINION for p, g in zip(preds, gold))
    fp = sum(p is TileKind.OPINION and g is TileKind.FACT for p, g in zip(preds, gold))
    fn = sum(p is TileKind.FACT and g is TileKind.OPINION for p, g in zip(preds, gold))
    assert 2 * tp / (2 * tp + fp + fn) >= 0.95


def test_training_deterministic():
    train, _ = fact_opinion_split()
    a = train_fact_opinion(labeled(train), dim=1 << 12, seed=3, epochs=3)
    b = train_fact_opinion(labeled(train), dim=1 << 12, seed=3, epochs=3)
    assert np.array_equal(a.weights, b.weights) and a.bias == b.bias


def test_single_class_rejected():
    with pytest.raises(ValueError):
        train_fact_opinion([("I love it.", TileKind.OPINION)] * 3, dim=64)


def test_contradictory_duplicates_train():
    data = [("The battery is big.", TileKind.FACT), ("The battery is big.", TileKind.OPINION)] * 5
    model = train_fact_opinion(data, dim=256, epochs=5)
    preds = {classify_tile(model, t) for t, _ in data}
    assert len(preds) == 1  # half of the pairs are necessarily wrong


def test_zero_model_ties_to_fact():
    model = FactOpinionModel.zeros(dim=1024)
    assert model.score("Completely unseen words.") == 0.0
    assert classify_tile(model, Tile((0, 0), "Completely unseen words.")) is TileKind.FACT


def test_forced_weights_make_opinion():
    dim = 1024
    model = FactOpinionModel.zeros(dim=dim)
    for slot in hashed_features("I love it.", dim):
        model.weights[slot] = 1.0
    assert classify_tile(model, "I love it.") is TileKind.OPINION


def test_duplicated_text_same_class(synthetic_model):
    _, test = fact_opinion_split()
    for text, _ in test[:20]:
        assert classify_tile(synthetic_model, text) is classify_tile(synthetic_model, f"{text} {text}")


def test_features_normalized_and_num_token():
    feats = hashed_features("It costs 189 dollars.", 1 << 10)
    assert sum(v * v for v in feats.values()) == pytest.approx(1.0)
    assert hashed_features("It costs 189 dollars.", 1 << 10) == hashed_features(
        "It costs 42 dollars.", 1 << 10)
    assert hashed_features("", 64) == {}


def test_model_round_trip(tmp_path, synthetic_model):
    path = tmp_path / "model.json"
    synthetic_model.save(path)
    loaded = FactOpinionModel.load(path)
    assert np.array_equal(loaded.weights, synthetic_model.weights)
    _, test = fact_opinion_split()
    for text, _ in test:
        assert loaded.score(text) == synthetic_model.score(text)


def test_model_load_rejects_other_files(tmp_path):
    path = tmp_path / "x.json"
    path.write_text('{"format": "other"}')
    with pytest.raises(ValueError):
        FactOpinionModel.load(path)


def test_read_labeled():
    rows = read_labeled(["fact\tThe sky is blue.", "", "Opinion\tI love it."])
    assert rows == [("The sky is blue.", TileKind.FACT), ("I love it.", TileKind.OPINION)]
    with pytest.raises(ValueError):
        read_labeled(["maybe\ttext"])


def test_default_model_separates_seed_styles():
    model = default_model()
    assert classify_tile(model, "I think this is the best player ever, I love it!") is TileKind.OPINION
    assert classify_tile(model, "The device was released in 2005 with 4 GB of storage.") is TileKind.FACT


# ------------------------------------------------------------ tile selection

def T(kind, pol=Polarity.NEUTRAL, strength=Strength.WEAK, text="x"):
    return Tile((0, 0), text, TileKind(kind), pol, strength)


def test_neutral_question_keeps_facts():
    tiles = [T("Fact"), T("Fact"), T("Opinion", *POS_S)]
    assert select_tiles(tiles, NEUTRAL_WEAK) == [0, 1]


def test_strong_question_leading_cluster():
    tiles = [T("Opinion", *POS_S)] * 5 + [T("Opinion", *NEG_S), T("Fact")]
    vectors = [TermVector({"a": 1.0})] * 7
    assert select_tiles(tiles, POS_S, vectors=vectors) == [0, 1, 2, 3, 4]


def test_strong_question_tied_clusters_keep_all():
    tiles = [T("Opinion", *POS_S)] * 3 + [T("Opinion", *NEG_S)] * 3
    vectors = [TermVector({"a": 1.0})] * 6
    assert select_tiles(tiles, POS_S, vectors=vectors) == list(range(6))


def test_incoherent_cluster_keeps_all():
    tiles = [T("Opinion", *POS_S)] * 3 + [T("Opinion", *NEG_S)]
    vectors = [TermVector({c: 1.0}) for c in "abcd"]
    assert cluster_coherence([0, 1, 2], vectors) == 0.0
    assert select_tiles(tiles, POS_S, vectors=vectors) == [0, 1, 2, 3]


def test_weak_opinions_majority_keeps_all():
    tiles = [T("Opinion", *POS_W)] * 2 + [T("Opinion", *POS_S)]
    assert select_tiles(tiles, POS_S, vectors=[TermVector({})] * 3) == [0, 1, 2]


# --------------------------------------------------------------- opiniosumm

def instance(cands, question="What battery does it use?", reference=""):
    return SummaryInstance("i", question, reference, tuple(cands), "c")


def test_all_fact_equals_textrank():
    cands = ["The battery lasts ten hours. It ships with a cable.",
             "Apple sells the player online. Music is bought in the store.",
             "I love it! The screen is amazing and I think it is the best."]
    model = FactOpinionModel.zeros(dim=1 << 10)  # every tile scores 0: Fact
    out = opiniosumm(instance(cands), model, default_lexicon())
    assert out == textrank(candidate_sentences(cands))


def test_analyze_document_uses_original_sentences():
    analyzed = analyze_document("Mary bought a phone. She likes it.", 0,
                                FactOpinionModel.zeros(dim=64), default_lexicon())
    raws = [s.raw for at in analyzed for s in at.sentences]
    assert raws == ["Mary bought a phone.", "She likes it."]
    assert all(at.tile.kind is TileKind.FACT for at in analyzed)


def test_opiniosumm_empty_candidates():
    with pytest.raises(ValueError):
        opiniosumm(instance([]), default_model(), default_lexicon())
