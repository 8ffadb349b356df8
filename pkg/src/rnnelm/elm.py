"""Extreme learning machine: random frozen input weights, one least-squares
fit of the output weights, and an iterative output-adaptation refinement.

The hidden layer is H = act(X @ W1.T) with W1 drawn uniformly from [0, 1]
and never trained. Output weights solve the least-squares problem
W2 = pinv(H) @ Y against one-hot targets. Adaptation repeatedly moves the
target matrix down the negative log-likelihood gradient of the current
output and refits W2 through the same pseudo-inverse.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    InvalidInputError,
    InvalidLabelError,
    ModelFormatError,
    ShapeError,
)
from .numerics import as_matrix, pinv
from .pca import PcaModel, pca_transform
from .rnn import ClusterParams, zeta_map

__all__ = [
    "ACTIVATION_KINDS",
    "Activation",
    "AdaptConfig",
    "AdaptStep",
    "ElmModel",
    "init_weights",
    "one_hot",
    "hidden_layer",
    "fit_output_weights",
    "predict_scores",
    "predict_labels",
    "softmax",
    "nll_cost",
    "nll_gradient",
    "adapt_output",
    "accuracy",
]

#: Classical hidden activations plus the spiking-cluster one ("rnn").
ACTIVATION_KINDS = ("sigmoid", "sine", "hardlim", "tribas", "radbas", "rnn")


@dataclass(frozen=True)
class Activation:
    """Hidden-unit activation: a classical kind, or the cluster activation
    parameterized by `cluster`."""

    kind: str
    cluster: ClusterParams | None = None

    def __post_init__(self):
        if self.kind not in ACTIVATION_KINDS:
            raise InvalidInputError(f"unknown activation {self.kind!r}; choose from {ACTIVATION_KINDS}")
        if self.kind == "rnn" and self.cluster is None:
            raise InvalidInputError("rnn activation requires ClusterParams")

    def apply(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.kind == "sigmoid":
            return 1.0 / (1.0 + np.exp(-np.clip(x, -500.0, 500.0)))
        if self.kind == "sine":
            return np.sin(x)
        if self.kind == "hardlim":
            return (x >= 0.0).astype(np.float64)
        if self.kind == "tribas":
            return np.maximum(0.0, 1.0 - np.abs(x))
        if self.kind == "radbas":
            return np.exp(-np.clip(x * x, 0.0, 700.0))
        return zeta_map(self.cluster, x)


@dataclass(frozen=True)
class AdaptConfig:
    """Output-adaptation settings: gradient step size, iteration budget, and
    the training-accuracy cap that stops adaptation to curb overfitting."""

    step: float = 5.0
    max_iters: int = 30
    train_acc_cap: float = 0.985

    def __post_init__(self):
        if self.step <= 0.0:
            raise InvalidInputError(f"step must be > 0, got {self.step}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 0:
            raise InvalidInputError(f"max_iters must be an integer >= 0, got {self.max_iters}")
        if not 0.0 <= self.train_acc_cap <= 1.0:
            raise InvalidInputError(f"train_acc_cap must be in [0, 1], got {self.train_acc_cap}")


@dataclass(frozen=True)
class AdaptStep:
    """Training accuracy and mean cost observed at the top of one iteration."""

    accuracy: float
    mean_cost: float


def init_weights(n_hidden, n_features, seed):
    """n_hidden x n_features input weights, i.i.d. uniform on [0, 1]."""
    if n_hidden < 1 or n_features < 1:
        raise InvalidInputError("n_hidden and n_features must be >= 1")
    return np.random.default_rng(seed).random((n_hidden, n_features))


def one_hot(labels, n_classes):
    """N x K target matrix: row d is 1.0 at column labels[d], 0.0 elsewhere."""
    labels = _as_labels(labels, n_classes)
    out = np.zeros((labels.size, n_classes))
    out[np.arange(labels.size), labels] = 1.0
    return out


def _as_labels(labels, n_classes=None):
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise ShapeError(f"labels must be 1-D, got shape {labels.shape}")
    if labels.size and (labels != labels.astype(np.int64)).any():
        raise InvalidLabelError("labels must be integers")
    labels = labels.astype(np.int64)
    if labels.size and n_classes is not None:
        bad = (labels < 0) | (labels >= n_classes)
        if bad.any():
            idx = int(np.flatnonzero(bad)[0])
            raise InvalidLabelError(
                f"label {labels[idx]} at index {idx} outside [0, {n_classes})"
            )
    return labels


def hidden_layer(w1, x, activation, bias=None):
    """Hidden-layer output matrix H: entry (d, h) is the activation of
    sample d's dot product with hidden unit h's weight row (plus optional
    per-unit bias, off by default)."""
    w1 = as_matrix(w1, "w1")
    x = as_matrix(x, "x")
    if x.shape[1] != w1.shape[1]:
        raise ShapeError(f"x has {x.shape[1]} features but w1 expects {w1.shape[1]}")
    pre = x @ w1.T
    if bias is not None:
        pre = pre + np.asarray(bias, dtype=np.float64)
    return activation.apply(pre)


def fit_output_weights(h, y, h_pinv=None):
    """Least-squares output weights W2 = pinv(H) @ Y (minimum-norm solution).

    Pass a precomputed h_pinv to reuse one pseudo-inverse across refits.
    """
    h = as_matrix(h, "h")
    y = as_matrix(y, "y")
    if h.shape[0] != y.shape[0]:
        raise ShapeError(f"h has {h.shape[0]} rows but y has {y.shape[0]}")
    if h_pinv is None:
        h_pinv = pinv(h)
    return h_pinv @ y


def softmax(o):
    """Row-wise softmax with max-subtraction stabilization."""
    o = np.asarray(o, dtype=np.float64)
    shifted = o - o.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def nll_cost(o, labels):
    """Per-row negative log-likelihood -ln softmax(O)[d, labels[d]], stabilized."""
    o = as_matrix(o, "scores")
    labels = _as_labels(labels, o.shape[1])
    if labels.size != o.shape[0]:
        raise ShapeError(f"{labels.size} labels for {o.shape[0]} score rows")
    shifted = o - o.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=1))
    return log_z - shifted[np.arange(o.shape[0]), labels]


def nll_gradient(o, labels):
    """Gradient of the per-row cost w.r.t. the scores: softmax(O) - onehot."""
    o = as_matrix(o, "scores")
    labels = _as_labels(labels, o.shape[1])
    if labels.size != o.shape[0]:
        raise ShapeError(f"{labels.size} labels for {o.shape[0]} score rows")
    grad = softmax(o)
    grad[np.arange(o.shape[0]), labels] -= 1.0
    return grad


def accuracy(pred, truth):
    """Fraction of exact matches between two label vectors."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ShapeError(f"length mismatch: {pred.shape} vs {truth.shape}")
    return float(np.mean(pred == truth))


def adapt_output(h, labels, w2_init, cfg, h_pinv=None):
    """Iterative output adaptation.

    Each iteration evaluates O = H @ W2, records training accuracy and mean
    cost, stops if the accuracy cap is reached, otherwise refits W2 against
    the shifted target O - step * dcost/dO. The pseudo-inverse of H is
    computed once and reused. Returns (w2, history); history holds one
    AdaptStep per evaluated iteration, at most cfg.max_iters.
    """
    h = as_matrix(h, "h")
    labels = _as_labels(labels, w2_init.shape[1])
    w2 = np.asarray(w2_init, dtype=np.float64)
    history = []
    if cfg.max_iters == 0:
        return w2, history
    if h_pinv is None:
        h_pinv = pinv(h)
    onehot = one_hot(labels, w2.shape[1])
    for _ in range(cfg.max_iters):
        o = h @ w2
        acc = accuracy(np.argmax(o, axis=1), labels)
        history.append(AdaptStep(accuracy=acc, mean_cost=float(np.mean(nll_cost(o, labels)))))
        if acc >= cfg.train_acc_cap:
            break
        target = o - cfg.step * (softmax(o) - onehot)
        w2 = h_pinv @ target
    return w2, history


@dataclass(frozen=True)
class ElmModel:
    """A trained classifier: frozen input weights, activation, learned output
    weights, and the optional input pipeline (PCA projection followed by a
    non-negativity shift) applied before the hidden layer.

    feature_shift, when present, maps features f to max(f - shift, 0); it is
    fitted on training data so that cluster-activation pre-activations stay
    non-negative after a PCA projection.
    """

    w1: np.ndarray
    activation: Activation
    w2: np.ndarray
    n_classes: int
    pca: PcaModel | None = None
    feature_shift: np.ndarray | None = None
    feature_scale: np.ndarray | None = None
    bias: np.ndarray | None = None
    train_config: AdaptConfig | None = None
    seed: int | None = None

    def __post_init__(self):
        w1 = as_matrix(self.w1, "w1")
        w2 = as_matrix(self.w2, "w2")
        if w1.min() < 0.0 or w1.max() > 1.0:
            raise InvalidInputError("w1 entries must lie in [0, 1]")
        if w2.shape[1] != self.n_classes:
            raise ShapeError(f"w2 has {w2.shape[1]} columns for {self.n_classes} classes")
        if w2.shape[0] != w1.shape[0]:
            raise ShapeError("w2 rows must match the hidden-unit count of w1")


def _pipeline_features(model, x):
    x = as_matrix(x, "x")
    if model.pca is not None:
        x = pca_transform(model.pca, x)
    if model.feature_shift is not None:
        x = np.maximum(x - model.feature_shift, 0.0)
    if model.feature_scale is not None:
        x = x / model.feature_scale
    return x


def predict_scores(model, x):
    """N x K score matrix O = H @ W2 for raw input rows x."""
    feats = _pipeline_features(model, x)
    h = hidden_layer(model.w1, feats, model.activation, bias=model.bias)
    return h @ model.w2


def predict_labels(model, x):
    """Per-row argmax of the scores; ties break toward the lowest class index."""
    return np.argmax(predict_scores(model, x), axis=1)


# ---------------------------------------------------------------------------
# Serialization: versioned binary container.

_ELM_MAGIC = b"ELMF"
_ELM_VERSION = 1


def _pack_array(arr):
    arr = np.ascontiguousarray(arr, dtype="<f8")
    return struct.pack("<QQ", *arr.shape) + arr.tobytes()


def _unpack_array(blob, offset, source):
    if len(blob) < offset + 16:
        raise ModelFormatError(f"{source}: truncated at array header (offset {offset})")
    rows, cols = struct.unpack_from("<QQ", blob, offset)
    offset += 16
    nbytes = 8 * rows * cols
    if len(blob) < offset + nbytes:
        raise ModelFormatError(f"{source}: truncated array payload (offset {offset})")
    arr = np.frombuffer(blob, dtype="<f8", count=rows * cols, offset=offset).reshape(rows, cols)
    return arr.copy(), offset + nbytes


def save_model(model, path):
    """Write an ElmModel to a versioned binary container."""
    flags = (
        (1 if model.pca is not None else 0)
        | (2 if model.feature_shift is not None else 0)
        | (4 if model.bias is not None else 0)
        | (8 if model.train_config is not None else 0)
        | (16 if model.feature_scale is not None else 0)
    )
    kind_idx = ACTIVATION_KINDS.index(model.activation.kind)
    cp = model.activation.cluster
    cluster_fields = (
        (cp.n, cp.p, cp.r, cp.lambda_plus, cp.lambda_minus) if cp is not None else (0, 0.0, 0.0, 0.0, 0.0)
    )
    tc = model.train_config or AdaptConfig()
    parts = [
        struct.pack(
            "<4sBBBQdddd",
            _ELM_MAGIC,
            _ELM_VERSION,
            kind_idx,
            flags,
            cluster_fields[0],
            *cluster_fields[1:],
        ),
        struct.pack("<QqdQd", model.n_classes, model.seed if model.seed is not None else -1,
                    tc.step, tc.max_iters, tc.train_acc_cap),
        _pack_array(model.w1),
        _pack_array(model.w2),
    ]
    if model.feature_shift is not None:
        parts.append(_pack_array(model.feature_shift.reshape(1, -1)))
    if model.feature_scale is not None:
        parts.append(_pack_array(model.feature_scale.reshape(1, -1)))
    if model.bias is not None:
        parts.append(_pack_array(model.bias.reshape(1, -1)))
    if model.pca is not None:
        blob = model.pca.to_bytes()
        parts.append(struct.pack("<Q", len(blob)) + blob)
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


def load_model(path):
    """Read an ElmModel written by save_model."""
    source = str(path)
    with open(path, "rb") as fh:
        blob = fh.read()
    head_fmt = "<4sBBBQdddd"
    head_size = struct.calcsize(head_fmt)
    if len(blob) < head_size:
        raise ModelFormatError(f"{source}: truncated header")
    magic, version, kind_idx, flags, cn, cp_, cr, clp, clm = struct.unpack_from(head_fmt, blob, 0)
    if magic != _ELM_MAGIC:
        raise ModelFormatError(f"{source}: bad magic {magic!r}")
    if version != _ELM_VERSION:
        raise ModelFormatError(f"{source}: unsupported version {version}")
    if kind_idx >= len(ACTIVATION_KINDS):
        raise ModelFormatError(f"{source}: unknown activation index {kind_idx}")
    offset = head_size
    meta_fmt = "<QqdQd"
    n_classes, seed, step, max_iters, cap = struct.unpack_from(meta_fmt, blob, offset)
    offset += struct.calcsize(meta_fmt)
    kind = ACTIVATION_KINDS[kind_idx]
    cluster = (
        ClusterParams(n=int(cn), p=cp_, r=cr, lambda_plus=clp, lambda_minus=clm)
        if kind == "rnn"
        else None
    )
    w1, offset = _unpack_array(blob, offset, source)
    w2, offset = _unpack_array(blob, offset, source)
    shift = scale = bias = pca = None
    if flags & 2:
        arr, offset = _unpack_array(blob, offset, source)
        shift = arr.ravel()
    if flags & 16:
        arr, offset = _unpack_array(blob, offset, source)
        scale = arr.ravel()
    if flags & 4:
        arr, offset = _unpack_array(blob, offset, source)
        bias = arr.ravel()
    if flags & 1:
        if len(blob) < offset + 8:
            raise ModelFormatError(f"{source}: truncated PCA block header")
        (pca_len,) = struct.unpack_from("<Q", blob, offset)
        offset += 8
        if len(blob) < offset + pca_len:
            raise ModelFormatError(f"{source}: truncated PCA block payload")
        pca = PcaModel.from_bytes(blob[offset : offset + pca_len], source=source)
        offset += pca_len
    if offset != len(blob):
        raise ModelFormatError(f"{source}: {len(blob) - offset} trailing bytes")
    return ElmModel(
        w1=w1,
        activation=Activation(kind=kind, cluster=cluster),
        w2=w2,
        n_classes=int(n_classes),
        pca=pca,
        feature_shift=shift,
        feature_scale=scale,
        bias=bias,
        train_config=AdaptConfig(step=step, max_iters=int(max_iters), train_acc_cap=cap)
        if flags & 8
        else None,
        seed=int(seed) if seed >= 0 else None,
    )
