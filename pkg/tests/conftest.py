import os
from pathlib import Path

import pytest

from rnnelm.datasets import load_idx_labels

REPO_ROOT = Path(__file__).resolve().parent.parent
DATA_ROOT = Path(os.environ.get("RNNELM_DATA_DIR", REPO_ROOT / "data"))

MNIST_NAMES = (
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
)
NORB_NAMES = (
    "smallnorb-5x46789x9x18x6x2x96x96-training-dat.mat",
    "smallnorb-5x46789x9x18x6x2x96x96-training-cat.mat",
    "smallnorb-5x01235x9x18x6x2x96x96-testing-dat.mat",
    "smallnorb-5x01235x9x18x6x2x96x96-testing-cat.mat",
)


def _resolve(directory, names):
    paths = []
    for name in names:
        plain = directory / name
        gz = directory / (name + ".gz")
        if plain.exists():
            paths.append(plain)
        elif gz.exists():
            paths.append(gz)
        else:
            return None
    return paths


@pytest.fixture(scope="session")
def mnist_dir():
    """Canonical MNIST directory (60k/10k split), or skip."""
    paths = _resolve(DATA_ROOT / "mnist", MNIST_NAMES)
    if paths is None:
        pytest.skip(
            f"canonical MNIST not found under {DATA_ROOT / 'mnist'} "
            f"(need {', '.join(MNIST_NAMES)}; set RNNELM_DATA_DIR)"
        )
    labels = load_idx_labels(paths[1])
    if labels.shape[0] != 60000:
        pytest.skip(f"{paths[1]} has {labels.shape[0]} labels; canonical train set has 60000")
    return DATA_ROOT / "mnist"


@pytest.fixture(scope="session")
def norb_dir():
    """Canonical small-NORB directory (24300/24300 split), or skip."""
    paths = _resolve(DATA_ROOT / "norb", NORB_NAMES)
    if paths is None:
        pytest.skip(
            f"canonical small NORB not found under {DATA_ROOT / 'norb'} "
            f"(need {', '.join(NORB_NAMES)}; set RNNELM_DATA_DIR)"
        )
    return DATA_ROOT / "norb"


@pytest.fixture(scope="session")
def mnist_subset_dir():
    """Reduced real-MNIST subset (see scripts/make_mnist_subset.py), or skip."""
    paths = _resolve(DATA_ROOT / "mnist-subset", MNIST_NAMES)
    if paths is None:
        pytest.skip(
            f"MNIST subset not found under {DATA_ROOT / 'mnist-subset'} "
            "(build it with scripts/make_mnist_subset.py)"
        )
    return DATA_ROOT / "mnist-subset"
