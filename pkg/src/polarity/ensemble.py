"""Multi-view soft-voting ensemble.

Each view pairs a text representation with a linear classifier; all views are
trained on the same documents. A document's class distribution is the
weighted sum of the views' distributions divided by the total weight, and
its label the arg-max (ties go to the earlier class in canonical order).

View names are written ``"<vectorizer>+<classifier>"``, e.g. ``"bow+svm_ovo"``.
Vectorizers: ``bow`` (tf-idf), ``mean`` (mean word vector), ``weighted``
(tf-idf-weighted mean word vector). Classifiers: ``svm_ovo``, ``svm_ovr``,
``logistic_ovr``, ``logistic_ovo``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .corpus import CLASSES, Document, LabeledDocument, SentimentLabel
from .embeddings import EmbeddingTable, OovPolicy, combine_mean, combine_weighted_mean
from .exceptions import EmptyCorpus, LengthMismatch, MissingClass
from .linear import HINGE, LOGISTIC, OVO, OVR, LinearClassifier
from .preprocess import load_stopwords, preprocess
from .tfidf import TfIdfModel, fit_vocabulary, transform_matrix

BOW = "bow"
MEAN = "mean"
WEIGHTED = "weighted"
VECTORIZERS = (BOW, MEAN, WEIGHTED)

CLASSIFIERS = {
    "svm_ovo": (HINGE, OVO),
    "svm_ovr": (HINGE, OVR),
    "logistic_ovr": (LOGISTIC, OVR),
    "logistic_ovo": (LOGISTIC, OVO),
}

DEFAULT_VIEWS = ("bow+svm_ovo", "mean+svm_ovo", "weighted+logistic_ovr")


@dataclass(frozen=True)
class ViewSpec:
    vectorizer: str
    classifier: str

    def __post_init__(self):
        if self.vectorizer not in VECTORIZERS:
            raise ValueError(f"unknown vectorizer {self.vectorizer!r}; expected one of {VECTORIZERS}")
        if self.classifier not in CLASSIFIERS:
            raise ValueError(f"unknown classifier {self.classifier!r}; expected one of {tuple(CLASSIFIERS)}")

    @classmethod
    def parse(cls, spec) -> "ViewSpec":
        if isinstance(spec, cls):
            return spec
        vec, sep, clf = str(spec).strip().partition("+")
        if not sep:
            raise ValueError(f"view {spec!r} is not of the form '<vectorizer>+<classifier>'")
        return cls(vec.strip(), clf.strip())

    @property
    def needs_embeddings(self) -> bool:
        return self.vectorizer in (MEAN, WEIGHTED)

    def __str__(self) -> str:
        return f"{self.vectorizer}+{self.classifier}"


def soft_vote(distributions: Sequence[np.ndarray], weights: Sequence[float]):
    """Combine per-view ``(n, k)`` distributions.

    Returns ``(label_indices, distribution)``. Zero-weight views are ignored;
    a single remaining view is passed through unchanged.
    """
    weights = np.asarray(weights, dtype=np.float64)
    if len(distributions) != weights.shape[0]:
        raise LengthMismatch(f"{len(distributions)} views but {weights.shape[0]} weights")
    if np.any(weights < 0) or not np.any(weights > 0):
        raise ValueError("view weights must be non-negative and not all zero")
    active = [(w, np.atleast_2d(p)) for w, p in zip(weights, distributions) if w > 0]
    if len(active) == 1:
        combined = active[0][1].copy()
    else:
        combined = sum(w * p for w, p in active) / sum(w for w, _ in active)
    return np.argmax(combined, axis=1), combined


def _as_documents(X) -> list[Document]:
    docs = []
    for item in X:
        if isinstance(item, LabeledDocument):
            docs.append(item.doc)
        elif isinstance(item, Document):
            docs.append(item)
        else:
            # bare strings key their OOV fallback by content
            docs.append(Document(str(item), str(item)))
    return docs


class SoftVotingEnsemble(BaseEstimator, ClassifierMixin):
    """Soft-voting ensemble over several (representation, classifier) views.

    ``X`` is a sequence of :class:`Document`, :class:`LabeledDocument` or raw
    strings; ``y`` a sequence of :class:`SentimentLabel` (or their string
    values). The class order is always positive, negative, neutral.

    Parameters
    ----------
    embeddings : EmbeddingTable or None
        Required when a ``mean`` or ``weighted`` view is configured.
    views : sequence of str
    weights : sequence of float or None
        Per-view voting weights; equal weights when None.
    stopwords : iterable of str or None
        None selects the bundled English list.
    drop_urls : bool
    tfidf_mode : {"smoothed", "ratio"}
    min_df : int
    l2_normalize : bool
        Row normalization of the bag-of-words view.
    oov_seed, oov_half_width : OOV fallback vector parameters.
    C, max_epochs, tol, eta0, random_state : classifier training controls.
    """

    def __init__(self, embeddings=None, views=DEFAULT_VIEWS, weights=None, stopwords=None,
                 drop_urls=False, tfidf_mode="smoothed", min_df=1, l2_normalize=True,
                 oov_seed=0, oov_half_width=0.25, C=1.0, max_epochs=200, tol=1e-6,
                 eta0=0.1, random_state=0):
        self.embeddings = embeddings
        self.views = views
        self.weights = weights
        self.stopwords = stopwords
        self.drop_urls = drop_urls
        self.tfidf_mode = tfidf_mode
        self.min_df = min_df
        self.l2_normalize = l2_normalize
        self.oov_seed = oov_seed
        self.oov_half_width = oov_half_width
        self.C = C
        self.max_epochs = max_epochs
        self.tol = tol
        self.eta0 = eta0
        self.random_state = random_state

    # -- configuration ----------------------------------------------------

    def _view_specs(self) -> list[ViewSpec]:
        specs = [ViewSpec.parse(v) for v in self.views]
        if not specs:
            raise ValueError("at least one view is required")
        return specs

    def _view_weights(self, n_views: int) -> np.ndarray:
        if self.weights is None:
            return np.ones(n_views)
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (n_views,):
            raise ValueError(f"{n_views} views configured but {w.size} weights given")
        if np.any(w < 0) or not np.any(w > 0) or not np.all(np.isfinite(w)):
            raise ValueError("view weights must be finite, non-negative and not all zero")
        return w

    # -- feature extraction -------------------------------------------------

    def _tokens(self, docs: Sequence[Document]) -> list[list[str]]:
        return [preprocess(d.text, self.stopwords_, self.drop_urls) for d in docs]

    def _features(self, spec: ViewSpec, tokens, docs):
        if spec.vectorizer == BOW:
            return transform_matrix(self.tfidf_, tokens)
        table: EmbeddingTable = self.embeddings
        out = np.empty((len(tokens), table.dim))
        for i, (toks, doc) in enumerate(zip(tokens, docs)):
            if spec.vectorizer == MEAN:
                out[i] = combine_mean(table, toks, self.policy_, doc.id)
            else:
                weights = self.tfidf_.term_weights(toks)
                out[i] = combine_weighted_mean(table, toks, weights, self.policy_, doc.id)
        return out

    # -- estimator API ------------------------------------------------------

    def fit(self, X, y):
        docs = _as_documents(X)
        labels = [SentimentLabel.parse(label) for label in y]
        if len(docs) != len(labels):
            raise LengthMismatch(f"{len(docs)} documents but {len(labels)} labels")
        if not docs:
            raise EmptyCorpus("cannot train on an empty corpus")
        missing = [c.value for c in CLASSES if c not in set(labels)]
        if missing:
            raise MissingClass(f"training data lacks class(es): {', '.join(missing)}")
        specs = self._view_specs()
        self.view_weights_ = self._view_weights(len(specs))
        if any(s.needs_embeddings for s in specs) and self.embeddings is None:
            raise ValueError("embedding views configured but no embedding table given")

        self.stopwords_ = (load_stopwords() if self.stopwords is None
                           else frozenset(w.lower() for w in self.stopwords))
        self.policy_ = OovPolicy(int(self.oov_seed), float(self.oov_half_width))
        tokens = self._tokens(docs)
        self.tfidf_: TfIdfModel | None = None
        if any(s.vectorizer in (BOW, WEIGHTED) for s in specs):
            self.tfidf_ = fit_vocabulary(tokens, self.min_df, self.tfidf_mode, self.l2_normalize)

        seeds = np.random.SeedSequence(int(self.random_state)).generate_state(len(specs))
        self.view_specs_ = specs
        self.estimators_ = []
        for spec, seed in zip(specs, seeds):
            loss, strategy = CLASSIFIERS[spec.classifier]
            clf = LinearClassifier(loss=loss, multi_class=strategy, C=self.C,
                                   max_epochs=self.max_epochs, tol=self.tol, eta0=self.eta0,
                                   random_state=int(seed), classes=list(CLASSES))
            clf.fit(self._features(spec, tokens, docs), labels)
            self.estimators_.append(clf)
        self.classes_ = np.array(CLASSES, dtype=object)
        return self

    def view_probabilities(self, X) -> list[np.ndarray]:
        """Per-view ``(n, 3)`` class distributions."""
        check_is_fitted(self, "estimators_")
        docs = _as_documents(X)
        if not docs:
            return [np.zeros((0, len(CLASSES))) for _ in self.estimators_]
        tokens = self._tokens(docs)
        return [clf.predict_proba(self._features(spec, tokens, docs))
                for spec, clf in zip(self.view_specs_, self.estimators_)]

    def predict_proba(self, X) -> np.ndarray:
        probs = self.view_probabilities(X)
        if probs[0].shape[0] == 0:
            return probs[0]
        return soft_vote(probs, self.view_weights_)[1]

    def predict(self, X) -> np.ndarray:
        proba = self.predict_proba(X)
        return self.classes_[np.argmax(proba, axis=1)] if proba.shape[0] else np.array([], dtype=object)

    def predict_soft_vote(self, doc):
        label, dist = predict_batch(self, [doc])[0]
        return label, dist

    @property
    def uses_embeddings(self) -> bool:
        return any(ViewSpec.parse(v).needs_embeddings for v in self.views)


def fit_ensemble(dataset: Sequence[LabeledDocument], embeddings: EmbeddingTable | None = None,
                 **params) -> SoftVotingEnsemble:
    model = SoftVotingEnsemble(embeddings=embeddings, **params)
    return model.fit([rec.doc for rec in dataset], [rec.label for rec in dataset])


def predict_batch(model: SoftVotingEnsemble, docs) -> list[tuple[SentimentLabel, np.ndarray]]:
    """``(label, distribution)`` for each document, in input order."""
    proba = model.predict_proba(docs)
    return [(CLASSES[int(np.argmax(row))], row) for row in proba]


def predict_soft_vote(model: SoftVotingEnsemble, doc) -> tuple[SentimentLabel, np.ndarray]:
    return predict_batch(model, [doc])[0]
