"""Supplementary evidence on a reduced real-MNIST subset (8k train / 2k test).

These tests mirror the benchmark criteria at subset scale with margins
chosen from the smaller training set; they are evidence that the pipeline
reproduces the published behavior when the canonical 60k/10k files are
unavailable, not a substitute for the full acceptance gate. Build the
subset with scripts/make_mnist_subset.py.
"""

from dataclasses import replace

import pytest

from rnnelm.elm import AdaptConfig
from rnnelm.experiments import (
    DatasetSpec,
    ExperimentConfig,
    compare_activations,
    load_dataset_pair,
    run_experiment,
)


def subset_spec(directory, scale):
    return DatasetSpec(
        kind="mnist",
        scale=scale,
        train_data=str(directory / "train-images-idx3-ubyte"),
        train_labels=str(directory / "train-labels-idx1-ubyte"),
        test_data=str(directory / "t10k-images-idx3-ubyte"),
        test_labels=str(directory / "t10k-labels-idx1-ubyte"),
    )


@pytest.fixture(scope="module")
def table1_subset(mnist_subset_dir):
    cfg = ExperimentConfig(
        dataset=subset_spec(mnist_subset_dir, "raw"),
        n_hidden=1000,
        seeds=(1, 2),
        adapt=AdaptConfig(step=5.0, max_iters=0, train_acc_cap=0.985),
    )
    return dict(compare_activations(cfg))


class TestSubsetContrast:
    def test_rnn_activation_dominates(self, table1_subset):
        rnn = table1_subset["rnn"].mean_test
        classical = {k: v.mean_test for k, v in table1_subset.items() if k != "rnn"}
        print(
            f"\nSUBSET EVIDENCE table1: rnn {rnn:.4f}, "
            + ", ".join(f"{k} {v:.4f}" for k, v in classical.items())
        )
        # full-data criterion: rnn >= 0.90; at 8k training samples the
        # measured value is ~0.92, so 0.88 leaves seed noise room
        assert rnn >= 0.88
        assert all(v <= 0.30 for v in classical.values())
        assert rnn - max(classical.values()) >= 0.40


class TestSubsetPcaPipeline:
    def test_pca_cell_accuracy(self, mnist_subset_dir):
        cfg = ExperimentConfig(
            dataset=subset_spec(mnist_subset_dir, "scaled"),
            n_hidden=1000,
            seeds=(1, 2),
            adapt=AdaptConfig(step=5.0, max_iters=30, train_acc_cap=0.985),
            pca_m=50,
        )
        res = run_experiment(cfg)
        print(f"\nSUBSET EVIDENCE pca m=50 nh=1000: test {res.mean_test:.4f} train {res.mean_train:.4f}")
        # full-data criterion: >= 0.955; measured ~0.965 at 8k samples
        assert res.mean_test >= 0.945
        assert res.mean_train >= 0.98

    def test_adaptation_stops_at_cap(self, mnist_subset_dir):
        cfg = ExperimentConfig(
            dataset=subset_spec(mnist_subset_dir, "scaled"),
            n_hidden=500,
            seeds=(1,),
            adapt=AdaptConfig(step=5.0, max_iters=30, train_acc_cap=0.985),
            pca_m=50,
        )
        res = run_experiment(cfg)
        hist = res.history[0]
        assert len(hist) <= 30
        assert res.train_acc[0] >= 0.985 or len(hist) == 30

    def test_subset_files_are_canonical_idx(self, mnist_subset_dir):
        train, test = load_dataset_pair(subset_spec(mnist_subset_dir, "scaled"))
        assert train.n_features == 784
        assert train.n_classes == 10
        assert test.n_samples >= 1000
