"""n-gram training counts, smoothing arithmetic, continuation search, perplexity."""

from __future__ import annotations

import math
import random

import pytest

from specsim.ngram import (END, EmptyCorpus, NgramModel, parse_corpus,
                           train_ngram)

from oracles import enumerate_continuations


def test_train_hand_counts_order2():
    m = train_ngram([["a", "b", "c"], ["a", "b", "d"]], 2)
    assert m.counts[("b",)] == {"c": 1, "d": 1}
    assert m.counts[("a",)] == {"b": 2}
    assert m.counts[("<s>",)] == {"a": 2}
    assert m.counts[("c",)] == {END: 1}
    assert m.vocab == (END, "a", "b", "c", "d")


def test_train_unigram_single_token():
    m = train_ngram([["a"]], 1)
    assert m.counts[()] == {"a": 1, END: 1}


def test_train_empty_corpus_rejected():
    with pytest.raises(EmptyCorpus):
        train_ngram([], 2)


def test_additive_smoothing_value():
    m = train_ngram([["a", "b", "c"], ["a", "b", "d"]], 2, alpha=0.1)
    # V=5 (a b c d </s>): (1 + 0.1) / (2 + 0.5)
    assert m.conditional(("b",), "c") == pytest.approx(1.1 / 2.5, abs=1e-12)
    assert m.conditional(("b",), "d") == pytest.approx(1.1 / 2.5, abs=1e-12)
    assert m.conditional(("b",), "a") == pytest.approx(0.1 / 2.5, abs=1e-12)


def test_backoff_applies_only_to_unseen_history():
    m = train_ngram([["a", "b"]], 2, alpha=0.1)
    # seen history: plain smoothed value, no factor
    seen = m.conditional(("a",), "b")
    assert seen == pytest.approx((1 + 0.1) / (1 + 0.1 * 3), abs=1e-12)
    # unseen history "q": drops to the unigram with the 0.4 factor
    v = len(m.vocab)
    uni_b = (m.counts[()]["b"] + 0.1) / (m.totals[()] + 0.1 * v)
    assert m.conditional(("q",), "b") == pytest.approx(0.4 * uni_b, abs=1e-12)


def test_distributions_sum_to_one_for_every_stored_history():
    rng = random.Random(13)
    for _ in range(50):
        order = rng.randint(1, 3)
        corpus = [[rng.choice("abcdef") for _ in range(rng.randint(1, 6))]
                  for _ in range(rng.randint(1, 8))]
        m = train_ngram(corpus, order, alpha=rng.choice([0.05, 0.1, 1.0]))
        for hist in m.counts:
            total = math.fsum(m.conditional(hist, tok) for tok in m.vocab)
            assert abs(total - 1.0) <= 1e-9, (hist, total)


def test_empty_model_is_uniform():
    m = NgramModel(1, 0.1, ["a", "b", "c"], {})
    v = len(m.vocab)
    assert m.conditional((), "a") == pytest.approx(1 / v, abs=1e-12)
    assert m.perplexity(["a", "b"]) == pytest.approx(v, abs=1e-9)


def test_continuations_toy_example():
    m = train_ngram([["a", "b", "c"], ["a", "b", "d"]], 2, alpha=0.1)
    out = m.continuations(["a"], 2, 3)
    assert [cont for cont, _ in out] == [("b", "c", END), ("b", "d", END)]
    p_expected = (2.1 / 2.5) * (1.1 / 2.5) * (1.1 / 1.5)
    assert out[0][1] == pytest.approx(p_expected, abs=1e-12)
    assert out[0][1] == out[1][1]


def test_continuations_single_sentence_top1():
    m = train_ngram([["x", "y"]], 2, alpha=0.1)
    out = m.continuations([], 1, 5)
    cont, p = out[0]
    assert cont == ("x", "y", END)
    hand = m.conditional(("<s>",), "x") * m.conditional(("x",), "y") \
        * m.conditional(("y",), END)
    assert p == pytest.approx(hand, abs=1e-12)


def test_continuations_match_exhaustive_enumeration():
    rng = random.Random(42)
    for _ in range(40):
        order = rng.randint(1, 3)
        sigma = ["a", "b", "c", "d", "e"][:rng.randint(2, 5)]
        corpus = [[rng.choice(sigma) for _ in range(rng.randint(1, 5))]
                  for _ in range(rng.randint(1, 6))]
        m = train_ngram(corpus, order, alpha=rng.choice([0.1, 0.5]))
        assert len(m.vocab) <= 6
        prefix = [rng.choice(sigma) for _ in range(rng.randint(0, 3))]
        k = rng.randint(1, 5)
        max_len = rng.randint(1, 4)
        got = m.continuations(prefix, k, max_len)
        want = enumerate_continuations(m, prefix, k, max_len)
        assert [c for c, _ in got] == [c for c, _ in want]
        for (_, pg), (_, pw) in zip(got, want):
            assert abs(pg - pw) <= 1e-9


def test_continuations_deterministic():
    m = train_ngram([["a", "b"], ["a", "c"]], 2)
    a = m.continuations(["a"], 3, 4)
    b = m.continuations(["a"], 3, 4)
    assert a == b


def test_perplexity_hand_value_and_ordering():
    m = train_ngram([["a", "b", "c"], ["a", "b", "d"]], 2, alpha=0.1)
    hand = (2.1 / 8.5) * (2.1 / 2.5) * (1.1 / 2.5)
    assert m.perplexity(["a", "b", "c"]) == pytest.approx(
        math.exp(-math.log(hand) / 3), abs=1e-12)
    assert m.perplexity(["a", "b", "c"]) < m.perplexity(["q", "q", "q"])


def test_model_json_roundtrip_is_stable():
    m = train_ngram([["a", "b", "c"], ["a", "b", "d"]], 2)
    text = m.to_json()
    again = NgramModel.from_json(text)
    assert again == m
    assert again.to_json() == text


def test_parse_corpus():
    assert parse_corpus("a b\n\nc\n") == [["a", "b"], ["c"]]
