import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_tfidf
from polarity.exceptions import EmptyCorpus
from polarity.tfidf import (RATIO, SMOOTHED, TfidfVectorizer, fit_vocabulary,
                            transform_matrix, transform_tfidf)

CORPUS = [["a", "a", "b"], ["b", "c"]]


def test_ratio_idf_example():
    m = fit_vocabulary(CORPUS, 1, RATIO, l2_normalize=False)
    assert m.vocabulary == {"a": 0, "b": 1, "c": 2}
    assert m.doc_count == 2
    assert dict(zip(m.terms, m.doc_freq.tolist())) == {"a": 1, "b": 2, "c": 1}
    assert dict(zip(m.terms, m.idf.tolist())) == {"a": 2.0, "b": 1.0, "c": 2.0}


def test_smoothed_single_document():
    m = fit_vocabulary([["x"]], 1, SMOOTHED)
    assert m.idf.tolist() == [1.0]


def test_min_df():
    m = fit_vocabulary(CORPUS, 2, RATIO)
    assert m.vocabulary == {"b": 0}


def test_transform_examples():
    m = fit_vocabulary(CORPUS, 1, RATIO, l2_normalize=False)
    assert transform_tfidf(m, ["a", "a", "b"]).entries == [(0, 4.0), (1, 1.0)]
    oov = transform_tfidf(m, ["zzz"])
    assert oov.entries == [] and oov.dim == 3
    assert np.array_equal(oov.to_dense(), np.zeros(3))
    m2 = fit_vocabulary(CORPUS, 1, RATIO, l2_normalize=True)
    (i0, v0), (i1, v1) = transform_tfidf(m2, ["a", "a", "b"]).entries
    assert (i0, i1) == (0, 1)
    assert v0 == pytest.approx(4 / math.sqrt(17), abs=1e-15)
    assert v1 == pytest.approx(1 / math.sqrt(17), abs=1e-15)


def test_empty_corpus():
    with pytest.raises(EmptyCorpus):
        fit_vocabulary([])


def test_term_weights_are_unnormalized_counts_times_idf():
    m = fit_vocabulary(CORPUS, 1, RATIO, l2_normalize=True)
    assert m.term_weights(["a", "a", "b", "zzz"]) == {"a": 4.0, "b": 1.0}


def test_vectorizer_estimator():
    vec = TfidfVectorizer(mode=RATIO, l2_normalize=False).fit(CORPUS)
    assert list(vec.get_feature_names_out()) == ["a", "b", "c"]
    assert vec.transform([["a", "a", "b"]]).toarray().tolist() == [[4.0, 1.0, 0.0]]


corpora = st.lists(st.lists(st.sampled_from([f"t{i}" for i in range(12)]), max_size=8),
                   min_size=1, max_size=8)


@settings(max_examples=100, deadline=None)
@given(corpora, st.sampled_from([SMOOTHED, RATIO]), st.booleans())
def test_matches_brute_force(corpus, mode, l2):
    m = fit_vocabulary(corpus, 1, mode, l2)
    rows = transform_matrix(m, corpus).toarray()
    for doc, row in zip(corpus, rows):
        terms, expected = brute_tfidf(corpus, doc, mode, l2)
        assert terms == m.terms
        assert np.max(np.abs(row - expected), initial=0.0) < 1e-9


@settings(max_examples=100, deadline=None)
@given(corpora)
def test_idf_decreases_with_document_frequency(corpus):
    for mode in (SMOOTHED, RATIO):
        m = fit_vocabulary(corpus, 1, mode)
        order = np.argsort(m.doc_freq, kind="stable")
        idf = m.idf[order]
        df = m.doc_freq[order]
        for i in range(len(idf) - 1):
            if df[i] < df[i + 1]:
                assert idf[i] > idf[i + 1]
            else:
                assert idf[i] == idf[i + 1]
        assert np.all(m.idf >= 1.0)


@settings(max_examples=100, deadline=None)
@given(corpora)
def test_term_in_every_document(corpus):
    corpus = [doc + ["everywhere"] for doc in corpus]
    j = fit_vocabulary(corpus, 1, SMOOTHED).vocabulary["everywhere"]
    assert fit_vocabulary(corpus, 1, SMOOTHED).idf[j] == 1.0
    assert fit_vocabulary(corpus, 1, RATIO).idf[j] == 1.0


@settings(max_examples=100, deadline=None)
@given(corpora, st.lists(st.sampled_from([f"t{i}" for i in range(15)]), max_size=10))
def test_rows_unit_norm_or_zero_and_sorted(corpus, doc):
    m = fit_vocabulary(corpus, 1, SMOOTHED, l2_normalize=True)
    vec = transform_tfidf(m, doc)
    assert list(vec.indices) == sorted(set(vec.indices))
    assert all(v > 0 for v in vec.values)
    norm = math.sqrt(sum(v * v for v in vec.values))
    assert norm == 0.0 or abs(norm - 1.0) < 1e-12
