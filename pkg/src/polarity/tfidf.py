"""Bag-of-words tf-idf features.

Two idf flavours are supported:

``smoothed``
    ``idf(t) = ln((1 + N) / (1 + df(t))) + 1`` with L2-normalized rows by
    default (the common toolkit convention).
``ratio``
    ``idf(t) = N / df(t)``, no logarithm; raw term counts times idf.

where ``N`` is the number of training documents and ``df(t)`` the number of
documents containing ``t``.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import EmptyCorpus

SMOOTHED = "smoothed"
RATIO = "ratio"
MODES = (SMOOTHED, RATIO)


@dataclass(frozen=True)
class SparseVector:
    """Sorted ``(index, value)`` pairs over a ``dim``-dimensional space."""

    indices: tuple
    values: tuple
    dim: int

    @property
    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.indices, self.values))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[list(self.indices)] = self.values
        return out

    def dot(self, dense) -> float:
        dense = np.asarray(dense, dtype=float)
        return float(sum(v * dense[i] for i, v in zip(self.indices, self.values)))


def compute_idf(doc_count: int, doc_freq: np.ndarray, mode: str) -> np.ndarray:
    doc_freq = np.asarray(doc_freq, dtype=np.float64)
    if mode == SMOOTHED:
        return np.log((1.0 + doc_count) / (1.0 + doc_freq)) + 1.0
    if mode == RATIO:
        return doc_count / doc_freq
    raise ValueError(f"unknown tf-idf mode {mode!r}; expected one of {MODES}")


@dataclass
class TfIdfModel:
    """Fitted vocabulary, document frequencies and idf table."""

    terms: list                      # index -> term, sorted lexicographically
    doc_count: int
    doc_freq: np.ndarray             # int64, aligned with ``terms``
    mode: str = SMOOTHED
    l2_normalize: bool = True
    idf: np.ndarray = field(default=None)
    vocabulary: dict = field(default=None, repr=False)

    def __post_init__(self):
        self.doc_freq = np.asarray(self.doc_freq, dtype=np.int64)
        if self.idf is None:
            self.idf = compute_idf(self.doc_count, self.doc_freq, self.mode)
        if self.vocabulary is None:
            self.vocabulary = {t: i for i, t in enumerate(self.terms)}

    @property
    def dim(self) -> int:
        return len(self.terms)

    def term_weights(self, tokens: Iterable[str]) -> dict:
        """Raw (unnormalized) tf x idf per in-vocabulary term of one document."""
        counts = Counter(t for t in tokens if t in self.vocabulary)
        return {t: c * float(self.idf[self.vocabulary[t]]) for t, c in counts.items()}


def fit_vocabulary(corpus: Sequence[Sequence[str]], min_df: int = 1,
                   mode: str = SMOOTHED, l2_normalize: bool = True) -> TfIdfModel:
    if len(corpus) == 0:
        raise EmptyCorpus("cannot fit a vocabulary on an empty corpus")
    if min_df < 1:
        raise ValueError("min_df must be >= 1")
    if mode not in MODES:
        raise ValueError(f"unknown tf-idf mode {mode!r}; expected one of {MODES}")
    df = Counter()
    for tokens in corpus:
        df.update(set(tokens))
    terms = sorted(t for t, n in df.items() if n >= min_df)
    return TfIdfModel(
        terms=terms,
        doc_count=len(corpus),
        doc_freq=np.array([df[t] for t in terms], dtype=np.int64),
        mode=mode,
        l2_normalize=l2_normalize,
    )


def transform_tfidf(model: TfIdfModel, tokens: Iterable[str]) -> SparseVector:
    counts = Counter(model.vocabulary[t] for t in tokens if t in model.vocabulary)
    indices = sorted(counts)
    values = [counts[i] * float(model.idf[i]) for i in indices]
    if model.l2_normalize and values:
        norm = math.sqrt(sum(v * v for v in values))
        values = [v / norm for v in values]
    return SparseVector(tuple(indices), tuple(values), model.dim)


def transform_matrix(model: TfIdfModel, corpus: Iterable[Sequence[str]]) -> sp.csr_matrix:
    """Row-stacked :func:`transform_tfidf` as a CSR matrix."""
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for tokens in corpus:
        vec = transform_tfidf(model, tokens)
        indices.extend(vec.indices)
        data.extend(vec.values)
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
        shape=(len(indptr) - 1, model.dim),
    )


class TfidfVectorizer(BaseEstimator, TransformerMixin):
    """Token lists to tf-idf CSR rows.

    Parameters
    ----------
    mode : {"smoothed", "ratio"}, default "smoothed"
    min_df : int, default 1
        Terms in fewer training documents are dropped.
    l2_normalize : bool, default True
    """

    def __init__(self, mode=SMOOTHED, min_df=1, l2_normalize=True):
        self.mode = mode
        self.min_df = min_df
        self.l2_normalize = l2_normalize

    def fit(self, X, y=None):
        self.model_ = fit_vocabulary(list(X), self.min_df, self.mode, self.l2_normalize)
        self.vocabulary_ = self.model_.vocabulary
        self.idf_ = self.model_.idf
        return self

    def transform(self, X):
        check_is_fitted(self, "model_")
        return transform_matrix(self.model_, X)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "model_")
        return np.asarray(self.model_.terms, dtype=object)
