"""Experiment runner: deterministic seeded training runs, activation
comparisons, PCA/hidden-size sweeps, and the named reproduction presets.

A run executes load -> optional PCA fit/transform (test data projected with
the training-fitted model) -> weight init -> hidden layer -> least-squares
fit -> output adaptation -> evaluation, once per seed. Results aggregate
the per-seed accuracies as mean and standard deviation.

Train wall-clock covers PCA fit/transform, weight init, the hidden layer,
the pseudo-inverse, and adaptation; test wall-clock covers the test-side
transform and forward pass. The PCA stage runs once per configuration (it
is seed-independent) and its duration is included in every seed's train
time. Timings are reported, never asserted, and are omitted from result
files when timing is off so that identical configs produce byte-identical
files.
"""

import json
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass, field, replace

import numpy as np

from .datasets import load_mnist, load_norb, synthetic_blobs
from .elm import (
    ACTIVATION_KINDS,
    Activation,
    AdaptConfig,
    ElmModel,
    accuracy,
    adapt_output,
    hidden_layer,
    init_weights,
    one_hot,
    predict_labels,
)
from .errors import InvalidInputError
from .numerics import pinv
from .pca import PcaModel, pca_fit, pca_transform
from .rnn import DEFAULT_CLUSTER, ClusterParams

__all__ = [
    "DatasetSpec",
    "ExperimentConfig",
    "RunResult",
    "run_experiment",
    "compare_activations",
    "sweep",
    "PRESETS",
    "preset_config",
    "results_document",
    "results_json_bytes",
    "results_csv",
]

RESULT_FORMAT_VERSION = 1

SHIFT_MODES = ("min", "minmax", "none")

MNIST_FILES = {
    "train_data": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_data": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}
NORB_FILES = {
    "train_data": "smallnorb-5x46789x9x18x6x2x96x96-training-dat.mat",
    "train_labels": "smallnorb-5x46789x9x18x6x2x96x96-training-cat.mat",
    "test_data": "smallnorb-5x01235x9x18x6x2x96x96-testing-dat.mat",
    "test_labels": "smallnorb-5x01235x9x18x6x2x96x96-testing-cat.mat",
}


@dataclass(frozen=True)
class DatasetSpec:
    """Where a train/test pair comes from: named files for mnist/norb, or
    generator settings for synthetic blobs."""

    kind: str
    scale: str = "scaled"
    train_data: str | None = None
    train_labels: str | None = None
    test_data: str | None = None
    test_labels: str | None = None
    downsample: int = 3
    pool_method: str = "pool"
    blobs_seed: int = 0
    blobs_train: int = 60
    blobs_test: int = 20
    blobs_classes: int = 3
    blobs_dim: int = 8
    blobs_spread: float = 0.25

    def __post_init__(self):
        if self.kind not in ("mnist", "norb", "blobs"):
            raise InvalidInputError(f"unknown dataset kind {self.kind!r}")
        if self.kind != "blobs":
            missing = [
                name
                for name in ("train_data", "train_labels", "test_data", "test_labels")
                if getattr(self, name) is None
            ]
            if missing:
                raise InvalidInputError(f"{self.kind} dataset needs paths for {missing}")


def load_dataset_pair(spec):
    """Load (train, test) Datasets for a DatasetSpec."""
    if spec.kind == "mnist":
        return (
            load_mnist(spec.train_data, spec.train_labels, scale=spec.scale),
            load_mnist(spec.test_data, spec.test_labels, scale=spec.scale),
        )
    if spec.kind == "norb":
        return (
            load_norb(spec.train_data, spec.train_labels, spec.downsample, spec.scale, spec.pool_method),
            load_norb(spec.test_data, spec.test_labels, spec.downsample, spec.scale, spec.pool_method),
        )
    per_train = max(1, spec.blobs_train // spec.blobs_classes)
    per_test = max(1, spec.blobs_test // spec.blobs_classes)
    return (
        synthetic_blobs(spec.blobs_seed, per_train, spec.blobs_classes, spec.blobs_dim, spec.blobs_spread),
        synthetic_blobs(spec.blobs_seed + 1_000_003, per_test, spec.blobs_classes, spec.blobs_dim, spec.blobs_spread),
    )


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetSpec
    activation: str = "rnn"
    cluster: ClusterParams = DEFAULT_CLUSTER
    n_hidden: int = 1000
    seeds: tuple = (1, 2, 3, 4, 5)
    adapt: AdaptConfig = AdaptConfig()
    pca_m: int | None = None
    pca_center: bool = True
    shift_mode: str = "min"
    use_bias: bool = False
    timing: bool = True
    tag: str = ""

    def __post_init__(self):
        if self.activation not in ACTIVATION_KINDS:
            raise InvalidInputError(f"unknown activation {self.activation!r}")
        if not self.seeds:
            raise InvalidInputError("seed list must be non-empty")
        if self.n_hidden < 1:
            raise InvalidInputError("n_hidden must be >= 1")
        if self.shift_mode not in SHIFT_MODES:
            raise InvalidInputError(f"shift_mode must be one of {SHIFT_MODES}")
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))

    def echo(self):
        """Plain-dict snapshot of everything that determines the result."""
        c = self.cluster
        d = self.dataset
        out = {
            "activation": self.activation,
            "cluster": {"n": c.n, "p": c.p, "r": c.r, "lambda_plus": c.lambda_plus, "lambda_minus": c.lambda_minus},
            "n_hidden": self.n_hidden,
            "seeds": list(self.seeds),
            "adapt": {"step": self.adapt.step, "max_iters": self.adapt.max_iters, "train_acc_cap": self.adapt.train_acc_cap},
            "pca_m": self.pca_m,
            "pca_center": self.pca_center,
            "shift_mode": self.shift_mode,
            "use_bias": self.use_bias,
            "dataset": {"kind": d.kind, "scale": d.scale},
            "tag": self.tag,
        }
        if d.kind == "blobs":
            out["dataset"].update(
                seed=d.blobs_seed, train=d.blobs_train, test=d.blobs_test,
                classes=d.blobs_classes, dim=d.blobs_dim, spread=d.blobs_spread,
            )
        else:
            out["dataset"].update(
                train_data=d.train_data, train_labels=d.train_labels,
                test_data=d.test_data, test_labels=d.test_labels,
            )
            if d.kind == "norb":
                out["dataset"].update(downsample=d.downsample, pool_method=d.pool_method)
        return out


@dataclass
class RunResult:
    """Per-seed accuracies, timings and adaptation history for one config."""

    config: dict
    seeds: list
    train_acc: list
    test_acc: list
    train_time: list
    test_time: list
    history: list
    format_version: int = RESULT_FORMAT_VERSION
    models: list = field(default_factory=list, repr=False)

    @property
    def mean_train(self):
        return float(np.mean(self.train_acc))

    @property
    def mean_test(self):
        return float(np.mean(self.test_acc))

    @property
    def std_test(self):
        return float(np.std(self.test_acc))

    def to_dict(self, include_timings=True):
        out = {
            "format_version": self.format_version,
            "config": self.config,
            "seeds": list(self.seeds),
            "train_accuracy": list(self.train_acc),
            "test_accuracy": list(self.test_acc),
            "mean_train_accuracy": self.mean_train,
            "mean_test_accuracy": self.mean_test,
            "std_train_accuracy": float(np.std(self.train_acc)),
            "std_test_accuracy": self.std_test,
            "history": [[[s.accuracy, s.mean_cost] for s in hist] for hist in self.history],
        }
        if include_timings:
            out["train_seconds"] = list(self.train_time)
            out["test_seconds"] = list(self.test_time)
        return out


@contextmanager
def _stage(name):
    """Re-raise any failure with the experiment stage prepended."""
    try:
        yield
    except Exception as exc:
        raise type(exc)(f"stage {name!r}: {exc}") from exc


def run_experiment(cfg, data=None, pca_model=None, keep_models=False):
    """Execute one configuration over its seed list and aggregate results.

    `data` may inject preloaded (train, test) Datasets; `pca_model` may
    inject a prefit projection (sweeps reuse one fit across cells). Errors
    surface with the failing stage named.
    """
    with _stage("load"):
        train, test = data if data is not None else load_dataset_pair(cfg.dataset)

    act = Activation(cfg.activation, cfg.cluster if cfg.activation == "rnn" else None)

    t0 = time.perf_counter()
    shift = scale = None
    feats_train = train.features
    with _stage("pca"):
        if cfg.pca_m is not None:
            if pca_model is None:
                pca_model = pca_fit(train.features, cfg.pca_m, center=cfg.pca_center)
            feats_train = pca_transform(pca_model, train.features)
            if cfg.shift_mode != "none":
                # Train-fitted non-negativity shift: cluster activations
                # need x >= 0, which raw projections do not guarantee.
                shift = feats_train.min(axis=0)
                feats_train = np.maximum(feats_train - shift, 0.0)
                if cfg.shift_mode == "minmax":
                    scale = feats_train.max(axis=0)
                    scale[scale == 0.0] = 1.0
                    feats_train = feats_train / scale
        else:
            pca_model = None
    shared_time = time.perf_counter() - t0

    targets = one_hot(train.labels, train.n_classes)
    result = RunResult(
        config=cfg.echo(), seeds=list(cfg.seeds),
        train_acc=[], test_acc=[], train_time=[], test_time=[], history=[],
    )
    for seed in cfg.seeds:
        t0 = time.perf_counter()
        with _stage("init_weights"):
            w1 = init_weights(cfg.n_hidden, feats_train.shape[1], seed)
            bias = np.random.default_rng([seed, 1]).random(cfg.n_hidden) if cfg.use_bias else None
        with _stage("hidden_layer"):
            h = hidden_layer(w1, feats_train, act, bias=bias)
        with _stage("fit_output_weights"):
            h_pinv = pinv(h)
            w2 = h_pinv @ targets
        with _stage("adapt_output"):
            w2, hist = adapt_output(h, train.labels, w2, cfg.adapt, h_pinv=h_pinv)
        train_pred = np.argmax(h @ w2, axis=1)
        train_elapsed = shared_time + (time.perf_counter() - t0)

        model = ElmModel(
            w1=w1, activation=act, w2=w2, n_classes=train.n_classes,
            pca=pca_model, feature_shift=shift, feature_scale=scale,
            bias=bias, train_config=cfg.adapt, seed=seed,
        )
        t0 = time.perf_counter()
        with _stage("evaluate"):
            test_pred = predict_labels(model, test.features)
        test_elapsed = time.perf_counter() - t0

        result.train_acc.append(accuracy(train_pred, train.labels))
        result.test_acc.append(accuracy(test_pred, test.labels))
        result.train_time.append(train_elapsed)
        result.test_time.append(test_elapsed)
        result.history.append(hist)
        if keep_models:
            result.models.append(model)
    return result


def compare_activations(cfg, data=None):
    """One run per activation kind under identical config and seeds."""
    with _stage("load"):
        train_test = data if data is not None else load_dataset_pair(cfg.dataset)
    return [
        (kind, run_experiment(replace(cfg, activation=kind), data=train_test))
        for kind in ACTIVATION_KINDS
    ]


def _slice_pca(model, m):
    return PcaModel(
        mean=model.mean,
        components=model.components[:, :m],
        singular_values=model.singular_values[:m],
        n_samples=model.n_samples,
    )


def sweep(cfg, pca_grid, hidden_grid, data=None):
    """Cartesian product over principal-component counts and hidden sizes.

    One PCA fit at max(pca_grid) is sliced per cell (the top-m directions
    of one decomposition). Returns [(m, n_hidden, RunResult), ...] in grid
    order.
    """
    if not pca_grid or not hidden_grid:
        raise InvalidInputError("sweep grids must be non-empty")
    with _stage("load"):
        train, test = data if data is not None else load_dataset_pair(cfg.dataset)
    with _stage("pca"):
        full = pca_fit(train.features, max(pca_grid), center=cfg.pca_center)
    out = []
    for m in pca_grid:
        sliced = _slice_pca(full, m)
        for n_hidden in hidden_grid:
            cell_cfg = replace(cfg, pca_m=m, n_hidden=n_hidden)
            out.append((m, n_hidden, run_experiment(cell_cfg, data=(train, test), pca_model=sliced)))
    return out


# ---------------------------------------------------------------------------
# Presets reproducing the benchmark tables.

def _mnist_spec(data_dir, scale):
    base = f"{data_dir}/mnist"
    paths = {k: _existing(f"{base}/{v}") for k, v in MNIST_FILES.items()}
    return DatasetSpec(kind="mnist", scale=scale, **paths)


def _norb_spec(data_dir, scale):
    base = f"{data_dir}/norb"
    paths = {k: _existing(f"{base}/{v}") for k, v in NORB_FILES.items()}
    return DatasetSpec(kind="norb", scale=scale, **paths)


def _existing(path):
    for candidate in (path, path + ".gz"):
        if os.path.exists(candidate):
            return candidate
    return path  # loader will report the missing file


def preset_config(name, data_dir, seeds=None):
    """Build the config (and grid, for sweeps) of a named preset.

    table1: activation comparison on MNIST, no PCA, 1000 hidden units, raw
            pixels, one-step fit (no adaptation).
    fig1:   MNIST PCA sweep, 30 adaptation iterations, step 5, cap 98.5%.
    table3: NORB PCA sweep at 500 hidden units, cap 99%.
    """
    if name == "table1":
        cfg = ExperimentConfig(
            dataset=_mnist_spec(data_dir, scale="raw"),
            activation="rnn",
            n_hidden=1000,
            seeds=tuple(seeds or (1, 2, 3, 4, 5)),
            adapt=AdaptConfig(step=5.0, max_iters=0, train_acc_cap=0.985),
            pca_m=None,
            tag="table1",
        )
        return cfg, None
    if name == "fig1":
        cfg = ExperimentConfig(
            dataset=_mnist_spec(data_dir, scale="scaled"),
            activation="rnn",
            seeds=tuple(seeds or (1, 2, 3, 4, 5)),
            adapt=AdaptConfig(step=5.0, max_iters=30, train_acc_cap=0.985),
            tag="fig1",
        )
        return cfg, ((5, 10, 20, 50, 100, 200), (100, 200, 500, 1000))
    if name == "table3":
        cfg = ExperimentConfig(
            dataset=_norb_spec(data_dir, scale="scaled"),
            activation="rnn",
            seeds=tuple(seeds or (1, 2, 3, 4, 5)),
            adapt=AdaptConfig(step=5.0, max_iters=30, train_acc_cap=0.99),
            tag="table3",
        )
        return cfg, ((2, 5, 10, 20, 30, 40, 50), (500,))
    raise InvalidInputError(f"unknown preset {name!r}; choose table1, fig1 or table3")


PRESETS = ("table1", "fig1", "table3")


# ---------------------------------------------------------------------------
# Result files.

def results_document(kind, entries, include_timings=True):
    """Self-describing result payload: every row carries its config."""
    rows = []
    for entry in entries:
        if kind == "run":
            rows.append(entry.to_dict(include_timings))
        elif kind == "compare":
            activation, res = entry
            rows.append({"activation": activation, **res.to_dict(include_timings)})
        else:
            m, n_hidden, res = entry
            rows.append({"pca_m": m, "n_hidden": n_hidden, **res.to_dict(include_timings)})
    return {"format_version": RESULT_FORMAT_VERSION, "kind": kind, "rows": rows}


def results_json_bytes(document):
    """Canonical JSON encoding (sorted keys, stable float repr)."""
    return (json.dumps(document, sort_keys=True, indent=2) + "\n").encode()


def results_csv(document):
    """Flat delimiter-separated table for plotting: one line per seed."""
    lines = ["pca_m,n_hidden,activation,seed,train_accuracy,test_accuracy,train_seconds,test_seconds"]
    for row in document["rows"]:
        cfg = row["config"]
        activation = row.get("activation", cfg["activation"])
        pca_m = row.get("pca_m", cfg["pca_m"])
        train_s = row.get("train_seconds")
        test_s = row.get("test_seconds")
        for i, seed in enumerate(row["seeds"]):
            lines.append(
                ",".join(
                    [
                        "" if pca_m is None else str(pca_m),
                        str(cfg["n_hidden"]),
                        activation,
                        str(seed),
                        repr(row["train_accuracy"][i]),
                        repr(row["test_accuracy"][i]),
                        repr(train_s[i]) if train_s else "",
                        repr(test_s[i]) if test_s else "",
                    ]
                )
            )
    return "\n".join(lines) + "\n"
