import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dsnlg.model import (
    ConditionalModel, ModelError, TrainingError, VocabularyError, dumps_model, feature_keys,
    fit, load_model, ptr_key, save_model, train,
)
from dsnlg.ttr import EMPTY, parse_rt

from conftest import JOHN_ARRIVES, JOHN_PREFIX

JOHN_ATOM = "sem:[v0=john:e]"
ARRIVE_ATOM = "sem:[v0=arrive:es]"


@pytest.fixture(scope="module")
def one_entry(lexicon):
    return [(["john", "arrives"], parse_rt(JOHN_ARRIVES))]


@pytest.fixture(scope="module")
def tiny(lexicon, one_entry):
    return train(one_entry, lexicon, alpha=0.0)


def test_one_entry_counts(tiny):
    assert tiny.pair_counts["john", JOHN_ATOM] == 1
    assert tiny.pair_counts["john", "ptr:?Ty(e)"] == 1
    assert tiny.pair_counts["arrives", ARRIVE_ATOM] == 1
    assert tiny.pair_counts["arrives", "ptr:?Ty(e→t)"] == 1
    assert tiny.word_counts == {"john": 1, "arrives": 1}
    assert tiny.total_tokens == 2


def test_arrives_does_not_see_john(tiny):
    assert tiny.pair_counts["arrives", JOHN_ATOM] == 0


def test_pointed_counts_bounded_by_occurrences(model):
    for (w, f), c in model.pair_counts.items():
        assert 0 < c <= model.word_counts[w], (w, f)


def test_feature_probability_unsmoothed(tiny):
    assert tiny.feature_probability(JOHN_ATOM, "john") == 1.0
    assert tiny.feature_probability(ARRIVE_ATOM, "john") == 1.0
    assert tiny.feature_probability("ptr:?Ty(e→t)", "john") == 0.0
    with pytest.raises(VocabularyError):
        tiny.feature_probability(JOHN_ATOM, "zebra")


def test_smoothing_is_positive(lexicon, one_entry):
    m = train(one_entry, lexicon, alpha=0.1)
    for w in m.vocab:
        for f in m.features + ["sem:[v0=never:e]"]:
            assert m.feature_probability(f, w) > 0


def test_feature_normalization_sums_over_words(model):
    col = ConditionalModel(model.word_counts, model.pair_counts, model.total_tokens,
                           alpha=0.1, normalization="feature")
    for f in model.features[:10]:
        assert math.isclose(sum(col.feature_probability(f, w) for w in col.vocab), 1.0)


def test_rank_first_word(tiny):
    ranked = tiny.score_words("?Ty(e)", parse_rt(JOHN_ARRIVES))
    assert ranked[0][0] == "john" and math.isfinite(ranked[0][1])
    assert ranked[1][1] == -math.inf


def test_empty_remainder_uses_only_pointer(tiny):
    assert tiny.triggered("?Ty(e)", EMPTY) == [ptr_key("?Ty(e)")]


def test_tie_break_is_lexicographic():
    m = ConditionalModel({"b": 1, "a": 1}, {("a", "ptr:?Ty(e)"): 1, ("b", "ptr:?Ty(e)"): 1}, 2)
    assert [w for w, _ in m.score_words("?Ty(e)", EMPTY)] == ["a", "b"]


def test_zero_count_vetoes_at_alpha_zero(tiny):
    scores = dict(tiny.score_words("?Ty(e→t)", parse_rt(JOHN_ARRIVES)))
    assert scores["john"] == -math.inf


def test_empty_corpus_fails(lexicon):
    with pytest.raises(TrainingError):
        train([], lexicon)


def test_unparsable_entries_are_skipped(lexicon, one_entry):
    bad = [(["arrives", "john"], parse_rt(JOHN_ARRIVES)), (["john"], parse_rt(JOHN_ARRIVES))]
    model, skipped = fit(bad + one_entry, lexicon)
    assert [s.index for s in skipped] == [0, 1]
    assert model.total_tokens == 2
    with pytest.raises(TrainingError):
        train(bad, lexicon)


def test_duplicated_entry_doubles(lexicon, one_entry, tiny):
    twice = train(one_entry * 2, lexicon, alpha=0.0)
    assert twice == tiny.scaled(2)
    for w in tiny.vocab:
        for f in tiny.features:
            assert twice.feature_probability(f, w) == tiny.feature_probability(f, w)


def test_feature_keys_of_prefix():
    assert feature_keys(parse_rt(JOHN_PREFIX)) == {"sem:[v0=john:e]", "sem:[v0:e, head=v0:e]"}


def test_round_trip(model):
    data = save_model(model)
    again = load_model(data)
    assert again == model
    assert save_model(again) == data
    assert load_model(data.decode()) == model


@pytest.mark.parametrize("payload", [b"", b"garbage", b"\xff\xfe", b"dsnlg-model 1\nalpha x\n"])
def test_garbage_rejected(payload):
    with pytest.raises(ModelError):
        load_model(payload)


def test_version_mismatch(model):
    text = dumps_model(model).replace("dsnlg-model 1", "dsnlg-model 9", 1)
    with pytest.raises(ModelError, match="version"):
        load_model(text)


def test_bad_settings_rejected():
    with pytest.raises(ModelError):
        ConditionalModel(alpha=-1)
    with pytest.raises(ModelError):
        ConditionalModel(normalization="rows")


def test_training_is_deterministic(lexicon, corpus):
    pairs = [(e.tokens, e.goal) for e in corpus]
    assert save_model(train(pairs, lexicon)) == save_model(train(pairs, lexicon))


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=2, max_value=50), st.integers(min_value=0, max_value=22))
def test_scaling_keeps_ranking(model, corpus, k, i):
    raw = ConditionalModel(model.word_counts, model.pair_counts, model.total_tokens, alpha=0.0)
    big = raw.scaled(k)
    goal = corpus[i].goal
    for ty_p in ("?Ty(e)", "?Ty(e→t)"):
        assert [w for w, _ in raw.score_words(ty_p, goal)] == \
            [w for w, _ in big.score_words(ty_p, goal)]
