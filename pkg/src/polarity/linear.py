"""Linear classifiers trained by averaged SGD, Platt scaling, OvR/OvO heads.

Both binary learners minimize

    F(w, b) = ||w||^2 / (2C) + sum_i loss(y_i (w.x_i + b))

with ``loss`` the logistic loss ``log(1 + exp(-m))`` or the hinge loss
``max(0, 1 - m)``. The bias is not regularized. Training visits samples in a
seeded random order each epoch with step size
``eta_t = eta0 / (1 + eta0 * lam * t)``, ``lam = 1 / (C n)``, and returns the
running average of all iterates. Weights are stored as ``w = s * v`` and the
average as ``r * B + c * v`` so that an update touches only the nonzero
features of one sample.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
import scipy.sparse as sp
from numba import njit
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import DimensionMismatch, MissingClass, SingleClassInput

LOGISTIC = "logistic"
HINGE = "hinge"
OVR = "ovr"
OVO = "ovo"

_LOSS_CODES = {LOGISTIC: 0, HINGE: 1}


@dataclass
class TrainConfig:
    C: float = 1.0
    max_epochs: int = 200
    tol: float = 1e-6
    eta0: float = 0.1
    seed: int = 0
    n_iter_no_change: int = 5

    def __post_init__(self):
        if not (self.C > 0 and self.max_epochs > 0 and self.tol >= 0 and self.eta0 > 0
                and self.n_iter_no_change > 0):
            raise ValueError(f"invalid training configuration {self}")


@dataclass
class BinaryLinearModel:
    weights: np.ndarray
    bias: float
    kind: str
    objective_history: list = field(default_factory=list, repr=False)

    @property
    def dim(self) -> int:
        return self.weights.shape[0]


@dataclass
class PlattCalibration:
    """``P(y=+1 | s) = 1 / (1 + exp(a*s + b))``."""

    a: float
    b: float

    def __call__(self, scores):
        return expit(-(self.a * np.asarray(scores, dtype=np.float64) + self.b))


# -- objectives -------------------------------------------------------------

def _as_csr(X) -> sp.csr_matrix:
    if sp.issparse(X):
        X = sp.csr_matrix(X, dtype=np.float64)
    else:
        X = sp.csr_matrix(np.atleast_2d(np.asarray(X, dtype=np.float64)))
    X.sort_indices()
    return X


def _margins(w, b, X, y):
    return y * (X @ w + b)


def logistic_objective(w, b, X, y, C=1.0):
    """Return ``(F, grad_w, grad_b)`` for the regularized logistic loss."""
    X = _as_csr(X)
    y = np.asarray(y, dtype=np.float64)
    m = _margins(w, b, X, y)
    value = 0.5 / C * float(w @ w) + float(np.logaddexp(0.0, -m).sum())
    g = -y * expit(-m)
    return value, w / C + X.T @ g, float(g.sum())


def hinge_objective(w, b, X, y, C=1.0) -> float:
    X = _as_csr(X)
    m = _margins(w, b, X, np.asarray(y, dtype=np.float64))
    return 0.5 / C * float(w @ w) + float(np.maximum(0.0, 1.0 - m).sum())


def objective(kind, w, b, X, y, C=1.0) -> float:
    if kind == LOGISTIC:
        return logistic_objective(w, b, X, y, C)[0]
    return hinge_objective(w, b, X, y, C)


# -- SGD kernel -------------------------------------------------------------

@njit(cache=True)
def _sgd_epoch(indptr, indices, data, y, order, loss, lam, eta0, v, B, state):
    # state = [s, r, c, bias, bias_avg, t]
    s, r, c, bias, bias_avg, t = state[0], state[1], state[2], state[3], state[4], state[5]
    for k in range(order.shape[0]):
        i = order[k]
        lo, hi = indptr[i], indptr[i + 1]
        dot = 0.0
        for p in range(lo, hi):
            dot += v[indices[p]] * data[p]
        m = y[i] * (s * dot + bias)
        if loss == 0:
            g = -1.0 / (1.0 + np.exp(m)) if m > -30.0 else -1.0
        else:
            g = -1.0 if m < 1.0 else 0.0
        eta = eta0 / (1.0 + eta0 * lam * t)
        # uniform average over w_0 .. w_{t+1}
        mu = 1.0 / (t + 2.0)
        s_new = s * (1.0 - eta * lam)
        r_new = r * (1.0 - mu)
        if g != 0.0:
            delta = eta * g * y[i] / s_new
            coef_b = (1.0 - mu) * c * delta / r_new
            for p in range(lo, hi):
                j = indices[p]
                v[j] -= delta * data[p]
                B[j] += coef_b * data[p]
            bias -= eta * g * y[i]
        c = (1.0 - mu) * c + mu * s_new
        bias_avg = (1.0 - mu) * bias_avg + mu * bias
        s, r = s_new, r_new
        t += 1.0
        if s < 1e-6:
            for j in range(v.shape[0]):
                v[j] *= s
            c /= s
            s = 1.0
        if r < 1e-6:
            for j in range(B.shape[0]):
                B[j] *= r
            r = 1.0
    state[0], state[1], state[2], state[3], state[4], state[5] = s, r, c, bias, bias_avg, t


def _check_binary(X, y):
    X = _as_csr(X)
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.shape[0] == 0:
        raise ValueError("empty training set")
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"X has {X.shape[0]} rows but y has {y.shape[0]} labels")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("binary labels must be -1 or +1")
    if np.all(y == y[0]):
        raise SingleClassInput("both classes must be present")
    return X, y


def _fit_binary(X, y, kind: str, cfg: TrainConfig) -> BinaryLinearModel:
    X, y = _check_binary(X, y)
    n, d = X.shape
    lam = 1.0 / (cfg.C * n)
    rng = np.random.default_rng(cfg.seed)
    indptr = X.indptr.astype(np.int64)
    indices = X.indices.astype(np.int64)
    data = X.data
    v = np.zeros(d)
    B = np.zeros(d)
    state = np.array([1.0, 1.0, 0.0, 0.0, 0.0, 0.0])
    history = []
    best = (np.inf, np.zeros(d), 0.0)
    stale = 0
    for _ in range(cfg.max_epochs):
        order = rng.permutation(n).astype(np.int64)
        _sgd_epoch(indptr, indices, data, y, order, _LOSS_CODES[kind], lam, cfg.eta0, v, B, state)
        w_avg = state[1] * B + state[2] * v
        b_avg = float(state[4])
        value = objective(kind, w_avg, b_avg, X, y, cfg.C)
        history.append(value)
        if best[0] - value < cfg.tol * max(1.0, abs(value)):
            stale += 1
        else:
            stale = 0
        if value < best[0]:
            best = (value, w_avg, b_avg)
        if stale >= cfg.n_iter_no_change:
            break
    return BinaryLinearModel(best[1], best[2], kind, history)


def fit_binary_logistic(X, y, cfg: TrainConfig | None = None) -> BinaryLinearModel:
    return _fit_binary(X, y, LOGISTIC, cfg or TrainConfig())


def fit_binary_svm(X, y, cfg: TrainConfig | None = None) -> BinaryLinearModel:
    return _fit_binary(X, y, HINGE, cfg or TrainConfig())


def decision_value(model: BinaryLinearModel, X):
    """``w.x + b`` for one vector (returns float) or a matrix (returns array)."""
    single = not sp.issparse(X) and np.ndim(X) == 1
    X = _as_csr(X)
    if X.shape[1] != model.dim:
        raise DimensionMismatch(f"expected {model.dim} features, got {X.shape[1]}")
    out = X @ model.weights + model.bias
    return float(out[0]) if single else out


def sigmoid(t):
    return expit(t)


def predict_proba_logistic(model: BinaryLinearModel, X):
    return sigmoid(decision_value(model, X))


# -- Platt scaling ----------------------------------------------------------

def platt_targets(y) -> np.ndarray:
    y = np.asarray(y)
    n_pos = int(np.sum(y > 0))
    n_neg = y.shape[0] - n_pos
    return np.where(y > 0, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))


def platt_objective(a, b, scores, targets):
    """Negative log-likelihood of the sigmoid fit and its gradient in (a, b)."""
    scores = np.asarray(scores, dtype=np.float64)
    f = a * scores + b
    value = float(np.sum(np.logaddexp(0.0, f) - (1.0 - targets) * f))
    resid = targets - expit(-f)
    return value, np.array([float(resid @ scores), float(resid.sum())])


def fit_platt(scores, y, tol: float = 1e-8, max_iter: int = 100) -> PlattCalibration:
    """Fit the sigmoid by damped Newton iterations with backtracking."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(y).ravel()
    n_pos = int(np.sum(y > 0))
    n_neg = y.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassInput("Platt scaling needs both classes")
    t = platt_targets(y)
    a, b = 0.0, float(np.log((n_neg + 1.0) / (n_pos + 1.0)))
    value, grad = platt_objective(a, b, scores, t)
    scale = max(1.0, float(scores.shape[0]))
    for _ in range(max_iter):
        if np.max(np.abs(grad)) < tol * scale:
            break
        p = expit(-(a * scores + b))
        d2 = p * (1.0 - p)
        h11 = float(d2 @ (scores * scores)) + 1e-12
        h22 = float(d2.sum()) + 1e-12
        h21 = float(d2 @ scores)
        det = h11 * h22 - h21 * h21
        da = -(h22 * grad[0] - h21 * grad[1]) / det
        db = -(-h21 * grad[0] + h11 * grad[1]) / det
        gd = grad[0] * da + grad[1] * db
        step = 1.0
        while step >= 1e-10:
            na, nb = a + step * da, b + step * db
            new_value, new_grad = platt_objective(na, nb, scores, t)
            if new_value < value + 1e-4 * step * gd:
                break
            step /= 2.0
        else:
            break
        a, b, value, grad = na, nb, new_value, new_grad
    return PlattCalibration(a, b)


# -- multiclass -------------------------------------------------------------

@dataclass
class MulticlassModel:
    kind: str
    strategy: str
    classes: list
    coef: np.ndarray                     # (n_binary, n_features)
    intercept: np.ndarray                # (n_binary,)
    pairs: list                          # positive/negative class index per binary model
    calibration: np.ndarray | None = None  # (n_binary, 2) Platt (a, b)

    @property
    def n_features(self) -> int:
        return self.coef.shape[1]

    def binary_probabilities(self, X) -> np.ndarray:
        X = _as_csr(X)
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected {self.n_features} features, got {X.shape[1]}")
        dec = np.asarray(X @ self.coef.T) + self.intercept
        if self.calibration is None:
            return expit(dec)
        a, b = self.calibration[:, 0], self.calibration[:, 1]
        return expit(-(a * dec + b))


def _binary_problems(k: int, strategy: str):
    if k == 2:
        return [(0, 1)]
    if strategy == OVR:
        return [(c, -1) for c in range(k)]
    return list(combinations(range(k), 2))


def fit_multiclass(X, labels, kind: str = LOGISTIC, strategy: str = OVR,
                   cfg: TrainConfig | None = None, classes=None) -> MulticlassModel:
    """Train one-vs-rest or one-vs-one binary models over ``classes``.

    ``classes`` fixes the output order; by default the sorted distinct labels.
    Hinge models get a Platt calibration fitted on their training scores.
    """
    cfg = cfg or TrainConfig()
    if kind not in _LOSS_CODES:
        raise ValueError(f"unknown model kind {kind!r}")
    if strategy not in (OVR, OVO):
        raise ValueError(f"unknown multiclass strategy {strategy!r}")
    X = _as_csr(X)
    labels = list(labels)
    if X.shape[0] != len(labels):
        raise DimensionMismatch(f"X has {X.shape[0]} rows but {len(labels)} labels were given")
    classes = list(classes) if classes is not None else sorted(set(labels))
    present = set(labels)
    missing = [c for c in classes if c not in present]
    if missing or len(classes) < 2:
        raise MissingClass(f"classes absent from training data: {missing or classes}")
    lookup = {c: i for i, c in enumerate(classes)}
    try:
        y_idx = np.array([lookup[label] for label in labels])
    except KeyError as exc:
        raise ValueError(f"label {exc.args[0]!r} not among classes {classes}") from None

    problems = _binary_problems(len(classes), strategy)
    seeds = np.random.SeedSequence(cfg.seed).generate_state(len(problems))
    coef = np.zeros((len(problems), X.shape[1]))
    intercept = np.zeros(len(problems))
    calibration = np.zeros((len(problems), 2)) if kind == HINGE else None
    for m, (pos, neg) in enumerate(problems):
        if neg < 0:
            rows = np.arange(X.shape[0])
        else:
            rows = np.flatnonzero((y_idx == pos) | (y_idx == neg))
        ybin = np.where(y_idx[rows] == pos, 1.0, -1.0)
        sub_cfg = TrainConfig(cfg.C, cfg.max_epochs, cfg.tol, cfg.eta0, int(seeds[m]),
                              cfg.n_iter_no_change)
        model = _fit_binary(X[rows], ybin, kind, sub_cfg)
        coef[m], intercept[m] = model.weights, model.bias
        if kind == HINGE:
            cal = fit_platt(decision_value(model, X[rows]), ybin)
            calibration[m] = (cal.a, cal.b)
    return MulticlassModel(kind, OVO if len(classes) > 2 and strategy == OVO else strategy,
                           classes, coef, intercept, problems, calibration)


def couple_ovr(probs: np.ndarray) -> np.ndarray:
    """Normalize independent per-class probabilities; all-zero rows become uniform."""
    probs = np.atleast_2d(probs)
    total = probs.sum(axis=1, keepdims=True)
    k = probs.shape[1]
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(total > 0, probs / np.where(total > 0, total, 1.0), 1.0 / k)
    return out


def couple_ovo(pair_probs: np.ndarray, pairs, k: int) -> np.ndarray:
    """Average pairwise win probabilities into a class distribution.

    ``pair_probs[:, m]`` is the probability that the first class of
    ``pairs[m]`` beats the second.
    """
    pair_probs = np.atleast_2d(pair_probs)
    scores = np.zeros((pair_probs.shape[0], k))
    for m, (i, j) in enumerate(pairs):
        scores[:, i] += pair_probs[:, m]
        scores[:, j] += 1.0 - pair_probs[:, m]
    scores *= 2.0 / (k * (k - 1))
    return couple_ovr(scores)


def predict_proba_multiclass(model: MulticlassModel, X) -> np.ndarray:
    single = not sp.issparse(X) and np.ndim(X) == 1
    probs = model.binary_probabilities(X)
    k = len(model.classes)
    if k == 2:
        out = np.column_stack([probs[:, 0], 1.0 - probs[:, 0]])
    elif model.strategy == OVR:
        out = couple_ovr(probs)
    else:
        out = couple_ovo(probs, model.pairs, k)
    out = np.clip(out, 0.0, 1.0)
    out /= out.sum(axis=1, keepdims=True)
    return out[0] if single else out


# -- estimators -------------------------------------------------------------

class LinearClassifier(BaseEstimator, ClassifierMixin):
    """Multiclass linear classifier with probability outputs.

    Parameters
    ----------
    loss : {"hinge", "logistic"}
    multi_class : {"ovo", "ovr"}
    C : float, default 1.0
        Inverse regularization strength.
    max_epochs, tol, eta0 : SGD controls, see :class:`TrainConfig`.
    random_state : int, default 0
    classes : sequence or None
        Fixed class order. Defaults to the sorted labels seen in ``fit``.
    """

    def __init__(self, loss=HINGE, multi_class=OVO, C=1.0, max_epochs=200, tol=1e-6,
                 eta0=0.1, random_state=0, classes=None):
        self.loss = loss
        self.multi_class = multi_class
        self.C = C
        self.max_epochs = max_epochs
        self.tol = tol
        self.eta0 = eta0
        self.random_state = random_state
        self.classes = classes

    def _config(self) -> TrainConfig:
        return TrainConfig(self.C, self.max_epochs, self.tol, self.eta0, int(self.random_state))

    def fit(self, X, y):
        X = check_array(X, accept_sparse="csr", dtype=np.float64)
        y = list(y)
        self.model_ = fit_multiclass(X, y, self.loss, self.multi_class, self._config(), self.classes)
        self.classes_ = np.array(self.model_.classes, dtype=object)
        self.n_features_in_ = X.shape[1]
        return self

    def _validated(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X, accept_sparse="csr", dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatch(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return X

    def decision_function(self, X):
        X = self._validated(X)
        return np.asarray(X @ self.model_.coef.T) + self.model_.intercept

    def predict_proba(self, X):
        return predict_proba_multiclass(self.model_, self._validated(X))

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]


class LinearSVMClassifier(LinearClassifier):
    """Hinge-loss linear SVM, one-vs-one, Platt-calibrated probabilities."""

    def __init__(self, multi_class=OVO, C=1.0, max_epochs=200, tol=1e-6, eta0=0.1,
                 random_state=0, classes=None):
        super().__init__(HINGE, multi_class, C, max_epochs, tol, eta0, random_state, classes)


class LogisticRegressionClassifier(LinearClassifier):
    """L2-regularized logistic regression, one-vs-rest by default."""

    def __init__(self, multi_class=OVR, C=1.0, max_epochs=200, tol=1e-6, eta0=0.1,
                 random_state=0, classes=None):
        super().__init__(LOGISTIC, multi_class, C, max_epochs, tol, eta0, random_state, classes)
