"""Single-file persistence for a fitted ensemble.

Layout (all integers little-endian)::

    magic        8 bytes   b"PLRBNDL\\x00"
    version      uint32
    meta_len     uint64
    payload_len  uint64
    digest       32 bytes  SHA-256 of meta + payload
    meta         meta_len bytes of UTF-8 JSON (sorted keys)
    payload      payload_len bytes of raw arrays

``meta["arrays"]`` maps array names to dtype, shape and byte offset into
the payload. Arrays are ``<f8`` or ``<i8``. Embedding vectors are not stored;
the bundle records the SHA-256 digest of the embedding file instead.
"""
from __future__ import annotations

import hashlib
import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .corpus import CLASSES, SentimentLabel
from .embeddings import OovPolicy
from .ensemble import SoftVotingEnsemble, ViewSpec
from .exceptions import BundleError, DigestMismatch, IoFailure, UnsupportedVersion
from .linear import LinearClassifier, MulticlassModel
from .tfidf import TfIdfModel

MAGIC = b"PLRBNDL\x00"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sIQQ32s")

_PARAM_KEYS = ("views", "weights", "drop_urls", "tfidf_mode", "min_df", "l2_normalize",
               "oov_seed", "oov_half_width", "C", "max_epochs", "tol", "eta0", "random_state")


class _Payload:
    def __init__(self):
        self.chunks: list[bytes] = []
        self.offset = 0
        self.index: dict = {}

    def add(self, name: str, array) -> None:
        array = np.asarray(array)
        dtype = "<i8" if np.issubdtype(array.dtype, np.integer) else "<f8"
        data = np.ascontiguousarray(array, dtype=dtype).tobytes()
        self.index[name] = {"dtype": dtype, "shape": list(array.shape), "offset": self.offset}
        self.chunks.append(data)
        self.offset += len(data)


def _jsonable(value):
    if isinstance(value, (tuple, list)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def bundle_bytes(model: SoftVotingEnsemble, embedding_digest: str | None = None,
                 config: dict | None = None) -> bytes:
    payload = _Payload()
    tfidf = model.tfidf_
    meta = {
        "format_version": FORMAT_VERSION,
        "classes": [c.value for c in CLASSES],
        "params": {k: _jsonable(getattr(model, k)) for k in _PARAM_KEYS},
        "view_weights": [float(w) for w in model.view_weights_],
        "stopwords": sorted(model.stopwords_),
        "oov_policy": {"seed": model.policy_.seed, "range_half_width": model.policy_.range_half_width},
        "embedding": None,
        "config": config or {},
        "tfidf": None,
        "models": [],
    }
    meta["params"]["views"] = [str(s) for s in model.view_specs_]
    if model.embeddings is not None and model.uses_embeddings:
        meta["embedding"] = {"digest": embedding_digest, "dim": model.embeddings.dim}
    if tfidf is not None:
        meta["tfidf"] = {"terms": list(tfidf.terms), "doc_count": tfidf.doc_count,
                         "mode": tfidf.mode, "l2_normalize": tfidf.l2_normalize}
        payload.add("tfidf.doc_freq", tfidf.doc_freq)
        payload.add("tfidf.idf", tfidf.idf)
    for i, (spec, clf) in enumerate(zip(model.view_specs_, model.estimators_)):
        mc: MulticlassModel = clf.model_
        meta["models"].append({
            "view": str(spec), "kind": mc.kind, "strategy": mc.strategy,
            "pairs": [list(p) for p in mc.pairs], "params": clf.get_params() | {"classes": None},
        })
        payload.add(f"view{i}.coef", mc.coef)
        payload.add(f"view{i}.intercept", mc.intercept)
        if mc.calibration is not None:
            payload.add(f"view{i}.calibration", mc.calibration)
    meta["arrays"] = payload.index
    meta_bytes = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
    body = b"".join(payload.chunks)
    digest = hashlib.sha256(meta_bytes + body).digest()
    return _HEADER.pack(MAGIC, FORMAT_VERSION, len(meta_bytes), len(body), digest) + meta_bytes + body


def save_bundle(model: SoftVotingEnsemble, path, embedding_digest: str | None = None,
                config: dict | None = None) -> Path:
    """Write the bundle atomically (temporary file in the target directory, then rename)."""
    path = Path(path)
    data = bundle_bytes(model, embedding_digest, config)
    directory = path.parent if str(path.parent) else Path(".")
    try:
        directory.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=directory)
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoFailure(f"cannot write bundle {path}: {exc}") from exc
    return path


def read_bundle(path) -> tuple[dict, dict]:
    """Validate a bundle file and return ``(meta, arrays)``."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read bundle {path}: {exc}") from exc
    if len(raw) < _HEADER.size:
        raise BundleError(f"{path}: file too short to be a model bundle")
    magic, version, meta_len, body_len, digest = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise BundleError(f"{path}: not a model bundle (bad magic)")
    if version > FORMAT_VERSION:
        raise UnsupportedVersion(
            f"{path}: bundle format version {version} is newer than supported ({FORMAT_VERSION})")
    if version < 1:
        raise BundleError(f"{path}: invalid format version {version}")
    if _HEADER.size + meta_len + body_len != len(raw):
        raise BundleError(f"{path}: section lengths do not match the file size")
    content = raw[_HEADER.size:]
    if hashlib.sha256(content).digest() != digest:
        raise BundleError(f"{path}: checksum mismatch, bundle is corrupted")
    try:
        meta = json.loads(content[:meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise BundleError(f"{path}: unreadable metadata: {exc}") from exc
    body = content[meta_len:]
    arrays = {}
    try:
        for name, info in meta["arrays"].items():
            dtype = np.dtype(info["dtype"])
            count = int(np.prod(info["shape"], dtype=np.int64))
            arr = np.frombuffer(body, dtype=dtype, count=count, offset=info["offset"])
            arrays[name] = arr.reshape(info["shape"]).astype(dtype.newbyteorder("="))
    except (KeyError, ValueError, TypeError) as exc:
        raise BundleError(f"{path}: inconsistent array table: {exc}") from exc
    return meta, arrays


def load_bundle(path, embeddings=None, embedding_digest: str | None = None) -> SoftVotingEnsemble:
    """Rebuild a fitted ensemble.

    ``embeddings`` must be supplied when the bundle has embedding views; if
    ``embedding_digest`` is given it must match the recorded digest.
    """
    meta, arrays = read_bundle(path)
    try:
        return _rebuild(meta, arrays, embeddings, embedding_digest)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DigestMismatch):
            raise
        raise BundleError(f"{path}: malformed bundle contents: {exc}") from exc


def _rebuild(meta, arrays, embeddings, embedding_digest) -> SoftVotingEnsemble:
    emb_meta = meta["embedding"]
    if emb_meta is not None:
        if embeddings is None:
            raise DigestMismatch("bundle needs the embedding table it was trained with")
        if embedding_digest is not None and emb_meta["digest"] not in (None, embedding_digest):
            raise DigestMismatch(
                f"embedding file digest {embedding_digest} does not match the bundle's {emb_meta['digest']}")
        if embeddings.dim != emb_meta["dim"]:
            raise DigestMismatch(f"embedding dimension {embeddings.dim} != bundle's {emb_meta['dim']}")

    params = dict(meta["params"])
    model = SoftVotingEnsemble(embeddings=embeddings, stopwords=tuple(meta["stopwords"]), **params)
    model.stopwords_ = frozenset(meta["stopwords"])
    model.policy_ = OovPolicy(meta["oov_policy"]["seed"], meta["oov_policy"]["range_half_width"])
    model.view_weights_ = np.asarray(meta["view_weights"], dtype=np.float64)
    model.view_specs_ = [ViewSpec.parse(v) for v in params["views"]]
    tf = meta["tfidf"]
    model.tfidf_ = None if tf is None else TfIdfModel(
        terms=tf["terms"], doc_count=tf["doc_count"], doc_freq=arrays["tfidf.doc_freq"],
        mode=tf["mode"], l2_normalize=tf["l2_normalize"], idf=arrays["tfidf.idf"])
    classes = [SentimentLabel.parse(c) for c in meta["classes"]]
    model.estimators_ = []
    for i, info in enumerate(meta["models"]):
        clf_params = dict(info["params"])
        clf_params["classes"] = list(classes)
        clf = LinearClassifier(**clf_params)
        clf.model_ = MulticlassModel(
            kind=info["kind"], strategy=info["strategy"], classes=list(classes),
            coef=arrays[f"view{i}.coef"], intercept=arrays[f"view{i}.intercept"],
            pairs=[tuple(p) for p in info["pairs"]],
            calibration=arrays.get(f"view{i}.calibration"),
        )
        clf.classes_ = np.array(classes, dtype=object)
        clf.n_features_in_ = clf.model_.coef.shape[1]
        model.estimators_.append(clf)
    model.classes_ = np.array(classes, dtype=object)
    return model
