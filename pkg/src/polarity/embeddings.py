"""Pre-trained word vectors and sentence composition by (weighted) averaging.

Two on-disk formats are read:

* word2vec binary: an ASCII header ``"<vocab_size> <dim>\\n"`` followed by
  ``vocab_size`` entries, each the word bytes, one space, ``dim``
  little-endian float32 values and an optional newline.
* word2vec text: one ``word v1 ... vD`` line per word, with an optional
  ``"<vocab_size> <dim>"`` header line.
"""
from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import (DimensionZero, EmbeddingFormatError, IoFailure,
                         MalformedHeader, TruncatedFile)
from .tfidf import TfIdfModel, fit_vocabulary

_CHUNK = 1 << 20
_FLOAT = np.dtype("<f4")


@dataclass
class EmbeddingTable:
    words: list
    vectors: np.ndarray          # (vocab_size, dim)
    index: dict = field(default=None, repr=False)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors)
        if self.vectors.ndim != 2 or self.vectors.shape[0] != len(self.words):
            raise ValueError("vectors must be a (len(words), dim) array")
        if self.index is None:
            self.index = {}
            for i, w in enumerate(self.words):
                self.index.setdefault(w, i)

    @classmethod
    def from_dict(cls, mapping: Mapping[str, Sequence[float]], dim: int | None = None) -> "EmbeddingTable":
        words = list(mapping)
        if words:
            vectors = np.array([mapping[w] for w in words], dtype=np.float64)
        else:
            vectors = np.zeros((0, dim or 0))
        return cls(words, vectors)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def vocab_size(self) -> int:
        return len(self.words)

    def __contains__(self, word) -> bool:
        return word in self.index

    def __len__(self) -> int:
        return len(self.words)

    def lookup(self, word: str) -> np.ndarray:
        return self.vectors[self.index[word]]


def _parse_header(line: bytes) -> tuple[int, int]:
    try:
        parts = line.decode("ascii").split()
        vocab_size, dim = int(parts[0]), int(parts[1])
    except (UnicodeDecodeError, ValueError, IndexError):
        raise MalformedHeader(f"bad header line {line[:64]!r}") from None
    if len(parts) != 2 or vocab_size < 0 or dim < 0:
        raise MalformedHeader(f"bad header line {line[:64]!r}")
    return vocab_size, dim


class _Reader:
    """Chunked byte reader with delimiter search."""

    def __init__(self, fh):
        self.fh = fh
        self.buf = b""
        self.pos = 0
        self.eof = False

    def _fill(self) -> bool:
        if self.eof:
            return False
        chunk = self.fh.read(_CHUNK)
        if not chunk:
            self.eof = True
            return False
        self.buf = self.buf[self.pos:] + chunk
        self.pos = 0
        return True

    def read_until(self, delim: bytes) -> bytes | None:
        while True:
            end = self.buf.find(delim, self.pos)
            if end >= 0:
                out = self.buf[self.pos:end]
                self.pos = end + 1
                return out
            if not self._fill():
                return None

    def read_exact(self, n: int) -> bytes | None:
        while len(self.buf) - self.pos < n:
            if not self._fill():
                return None
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def skip_if(self, byte: bytes) -> None:
        if self.pos >= len(self.buf):
            self._fill()
        if self.buf[self.pos:self.pos + 1] == byte:
            self.pos += 1


def load_word2vec_binary(path, vocab_limit: int | None = None) -> EmbeddingTable:
    """Parse a word2vec binary file, keeping at most ``vocab_limit`` entries."""
    try:
        fh = open(path, "rb")
    except OSError as exc:
        raise IoFailure(f"cannot open embedding file {path}: {exc}") from exc
    with fh:
        reader = _Reader(fh)
        header = reader.read_until(b"\n")
        if header is None:
            raise MalformedHeader("missing header line")
        vocab_size, dim = _parse_header(header)
        if dim == 0:
            raise DimensionZero("embedding dimension is zero")
        n = vocab_size if vocab_limit is None else min(vocab_size, vocab_limit)
        words = []
        # grown incrementally: the header count is untrusted
        data = bytearray()
        nbytes = dim * _FLOAT.itemsize
        for i in range(n):
            raw = reader.read_until(b" ")
            if raw is None:
                raise TruncatedFile(f"expected {vocab_size} entries, found {i}")
            raw = raw.lstrip(b"\n")
            if not raw:
                raise EmbeddingFormatError(f"empty word at entry {i}")
            vec = reader.read_exact(nbytes)
            if vec is None:
                raise TruncatedFile(f"entry {i} ({raw[:32]!r}) ends mid-vector")
            words.append(raw.decode("utf-8", errors="replace"))
            data += vec
            reader.skip_if(b"\n")
    vectors = np.frombuffer(data, dtype=_FLOAT).reshape(len(words), dim)
    if not np.all(np.isfinite(vectors)):
        raise EmbeddingFormatError("non-finite value in embedding vectors")
    return EmbeddingTable(words, vectors)


def load_word2vec_text(path, vocab_limit: int | None = None) -> EmbeddingTable:
    try:
        fh = open(path, encoding="utf-8", errors="replace")
    except OSError as exc:
        raise IoFailure(f"cannot open embedding file {path}: {exc}") from exc
    words: list[str] = []
    rows: list[list[float]] = []
    dim = None
    with fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\r\n").split(" ")
            if not line.strip():
                continue
            if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                dim = int(parts[1])
                if dim == 0:
                    raise DimensionZero("embedding dimension is zero")
                continue
            if vocab_limit is not None and len(words) >= vocab_limit:
                break
            try:
                values = [float(v) for v in parts[1:] if v]
            except ValueError:
                raise EmbeddingFormatError(f"{path}:{lineno}: non-numeric vector component") from None
            if dim is None:
                dim = len(values)
                if dim == 0:
                    raise DimensionZero(f"{path}:{lineno}: no vector components")
            if len(values) != dim:
                raise EmbeddingFormatError(f"{path}:{lineno}: expected {dim} components, got {len(values)}")
            words.append(parts[0])
            rows.append(values)
    vectors = np.array(rows, dtype=np.float32).reshape(len(rows), dim or 0)
    if not np.all(np.isfinite(vectors)):
        raise EmbeddingFormatError("non-finite value in embedding vectors")
    return EmbeddingTable(words, vectors)


def load_embeddings(path, fmt: str = "auto", vocab_limit: int | None = None) -> EmbeddingTable:
    """Load either format; ``auto`` picks binary for ``.bin`` files."""
    if fmt == "auto":
        fmt = "binary" if Path(path).suffix.lower() == ".bin" else "text"
    if fmt == "binary":
        return load_word2vec_binary(path, vocab_limit)
    if fmt == "text":
        return load_word2vec_text(path, vocab_limit)
    raise ValueError(f"unknown embedding format {fmt!r}")


def file_digest(path) -> str:
    h = hashlib.sha256()
    try:
        with open(path, "rb") as fh:
            for chunk in iter(lambda: fh.read(_CHUNK), b""):
                h.update(chunk)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return "sha256:" + h.hexdigest()


@dataclass(frozen=True)
class OovPolicy:
    """Fallback for documents with no in-table token: a seeded uniform vector."""

    seed: int = 0
    range_half_width: float = 0.25

    def __post_init__(self):
        if not self.range_half_width > 0:
            raise ValueError("range_half_width must be positive")

    def random_vector(self, dim: int, doc_key: str) -> np.ndarray:
        key = int.from_bytes(hashlib.sha256(doc_key.encode("utf-8")).digest()[:16], "little")
        seq = np.random.SeedSequence([self.seed & 0xFFFFFFFFFFFFFFFF, key])
        rng = np.random.Generator(np.random.PCG64(seq))
        h = self.range_half_width
        return rng.uniform(-h, h, size=dim)


def combine_mean(table: EmbeddingTable, tokens: Iterable[str], policy: OovPolicy,
                 doc_key: str) -> np.ndarray:
    counts = Counter(t for t in tokens if t in table.index)
    if not counts:
        return policy.random_vector(table.dim, doc_key)
    # summed in sorted term order so token order cannot change the result
    terms = sorted(counts)
    c = np.array([counts[t] for t in terms], dtype=np.float64)
    vecs = table.vectors[[table.index[t] for t in terms]].astype(np.float64)
    return (c @ vecs) / c.sum()


def combine_weighted_mean(table: EmbeddingTable, tokens: Sequence[str], weights: Mapping[str, float],
                          policy: OovPolicy, doc_key: str) -> np.ndarray:
    """Weighted average of token vectors, normalized by the sum of weights.

    Every occurrence of a token found in both ``table`` and ``weights``
    contributes ``weights[token] * vector``. When no weight mass remains the
    plain mean (and then the OOV vector) is used instead.
    """
    tokens = list(tokens)
    counts = Counter(t for t in tokens if t in table.index and t in weights)
    if counts:
        # sorted for order-independent floating-point summation
        terms = sorted(counts)
        w = np.array([counts[t] * float(weights[t]) for t in terms])
        total = w.sum()
        if total != 0.0:
            vecs = table.vectors[[table.index[t] for t in terms]].astype(np.float64)
            return (w @ vecs) / total
    return combine_mean(table, tokens, policy, doc_key)


def _doc_keys(X, doc_keys):
    if doc_keys is None:
        return [" ".join(tokens) for tokens in X]
    if len(doc_keys) != len(X):
        raise ValueError("doc_keys must align with X")
    return [str(k) for k in doc_keys]


class MeanEmbeddingVectorizer(BaseEstimator, TransformerMixin):
    """Token lists to the mean of their word vectors.

    ``transform`` accepts optional ``doc_keys`` that seed the OOV fallback
    per document; by default the joined tokens serve as the key.
    """

    def __init__(self, embeddings=None, oov_seed=0, oov_half_width=0.25):
        self.embeddings = embeddings
        self.oov_seed = oov_seed
        self.oov_half_width = oov_half_width

    def fit(self, X=None, y=None):
        if self.embeddings is None:
            raise ValueError("an EmbeddingTable is required")
        self.policy_ = OovPolicy(self.oov_seed, self.oov_half_width)
        self.n_features_out_ = self.embeddings.dim
        return self

    def transform(self, X, doc_keys=None):
        check_is_fitted(self, "policy_")
        X = list(X)
        keys = _doc_keys(X, doc_keys)
        out = np.empty((len(X), self.embeddings.dim))
        for i, (tokens, key) in enumerate(zip(X, keys)):
            out[i] = combine_mean(self.embeddings, tokens, self.policy_, key)
        return out


class WeightedEmbeddingVectorizer(BaseEstimator, TransformerMixin):
    """Token lists to the tf-idf-weighted mean of their word vectors.

    Parameters
    ----------
    embeddings : EmbeddingTable
    tfidf : TfIdfModel or None
        Supplies idf values. When None, one is fitted on ``X`` during ``fit``.
    tfidf_mode : str, default "smoothed"
        Mode for the internally fitted model.
    """

    def __init__(self, embeddings=None, tfidf=None, tfidf_mode="smoothed", min_df=1,
                 oov_seed=0, oov_half_width=0.25):
        self.embeddings = embeddings
        self.tfidf = tfidf
        self.tfidf_mode = tfidf_mode
        self.min_df = min_df
        self.oov_seed = oov_seed
        self.oov_half_width = oov_half_width

    def fit(self, X, y=None):
        if self.embeddings is None:
            raise ValueError("an EmbeddingTable is required")
        self.tfidf_ = self.tfidf if self.tfidf is not None else fit_vocabulary(
            list(X), self.min_df, self.tfidf_mode, l2_normalize=False)
        self.policy_ = OovPolicy(self.oov_seed, self.oov_half_width)
        self.n_features_out_ = self.embeddings.dim
        return self

    def transform(self, X, doc_keys=None):
        check_is_fitted(self, "policy_")
        X = list(X)
        keys = _doc_keys(X, doc_keys)
        model: TfIdfModel = self.tfidf_
        out = np.empty((len(X), self.embeddings.dim))
        for i, (tokens, key) in enumerate(zip(X, keys)):
            weights = model.term_weights(tokens)
            out[i] = combine_weighted_mean(self.embeddings, tokens, weights, self.policy_, key)
        return out
