"""Multi-view soft-voting ensemble for message polarity classification."""

__version__ = "0.1.0"

from .corpus import (CLASSES, DatasetSummary, Document, LabeledDocument, SentimentLabel,
                     concat, load_dataset, summarize)
from .embeddings import (EmbeddingTable, MeanEmbeddingVectorizer, OovPolicy,
                         WeightedEmbeddingVectorizer, combine_mean, combine_weighted_mean,
                         load_embeddings, load_word2vec_binary, load_word2vec_text)
from .ensemble import (DEFAULT_VIEWS, SoftVotingEnsemble, ViewSpec, fit_ensemble,
                       predict_batch, predict_soft_vote, soft_vote)
from .evaluation import ConfusionMatrix, EvalReport, confusion, evaluate, report
from .linear import (LinearClassifier, LinearSVMClassifier, LogisticRegressionClassifier,
                     TrainConfig, fit_multiclass, predict_proba_multiclass)
from .preprocess import TweetPreprocessor, filter_tokens, load_stopwords, preprocess, tokenize
from .tfidf import TfIdfModel, TfidfVectorizer, fit_vocabulary, transform_tfidf

__all__ = [
    "CLASSES", "DatasetSummary", "Document", "LabeledDocument", "SentimentLabel", "concat",
    "load_dataset", "summarize", "EmbeddingTable", "MeanEmbeddingVectorizer", "OovPolicy",
    "WeightedEmbeddingVectorizer", "combine_mean", "combine_weighted_mean", "load_embeddings",
    "load_word2vec_binary", "load_word2vec_text", "DEFAULT_VIEWS", "SoftVotingEnsemble",
    "ViewSpec", "fit_ensemble", "predict_batch", "predict_soft_vote", "soft_vote",
    "ConfusionMatrix", "EvalReport", "confusion", "evaluate", "report", "LinearClassifier",
    "LinearSVMClassifier", "LogisticRegressionClassifier", "TrainConfig", "fit_multiclass",
    "predict_proba_multiclass", "TweetPreprocessor", "filter_tokens", "load_stopwords",
    "preprocess", "tokenize", "TfIdfModel", "TfidfVectorizer", "fit_vocabulary",
    "transform_tfidf",
]
