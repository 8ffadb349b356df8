#!/usr/bin/env python3
"""Build a reduced real-MNIST subset in IDX format for evidence tests.

The npm package `mnist` (https://www.npmjs.com/package/mnist) bundles
~10k genuine MNIST digits as JSON (one file per class, pixels stored as
round(byte/255, 3), which converts back to the original bytes exactly).
This script converts them into the standard IDX file layout so the
package's loaders and pipelines can run on real digit images when the
canonical 60k/10k files are not available.

Usage:
    npm pack mnist && tar xzf mnist-*.tgz
    python scripts/make_mnist_subset.py package/src/digits data/mnist-subset

The split is deterministic: a seeded shuffle, stratified by digit, with
an 80/20 train/test division.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from rnnelm.datasets import write_idx_images, write_idx_labels  # noqa: E402

TRAIN_FRACTION = 0.8
SEED = 20170905


def load_digit_file(path):
    with open(path) as fh:
        flat = np.asarray(json.load(fh)["data"], dtype=np.float64)
    if flat.size % 784:
        raise ValueError(f"{path}: size {flat.size} is not a multiple of 784")
    images = np.round(flat * 255.0).astype(np.uint8).reshape(-1, 28, 28)
    return images


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("digits_dir", help="directory holding 0.json .. 9.json")
    parser.add_argument("out_dir", help="output directory for the IDX files")
    args = parser.parse_args()

    digits_dir = Path(args.digits_dir)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(SEED)
    train_imgs, train_lbls, test_imgs, test_lbls = [], [], [], []
    for digit in range(10):
        images = load_digit_file(digits_dir / f"{digit}.json")
        order = rng.permutation(images.shape[0])
        cut = int(round(TRAIN_FRACTION * images.shape[0]))
        train_imgs.append(images[order[:cut]])
        test_imgs.append(images[order[cut:]])
        train_lbls.append(np.full(cut, digit, dtype=np.uint8))
        test_lbls.append(np.full(images.shape[0] - cut, digit, dtype=np.uint8))
        print(f"digit {digit}: {cut} train / {images.shape[0] - cut} test")

    def finalize(imgs, lbls):
        imgs = np.concatenate(imgs)
        lbls = np.concatenate(lbls)
        order = rng.permutation(lbls.size)
        return imgs[order], lbls[order]

    tr_x, tr_y = finalize(train_imgs, train_lbls)
    te_x, te_y = finalize(test_imgs, test_lbls)
    write_idx_images(out_dir / "train-images-idx3-ubyte", tr_x)
    write_idx_labels(out_dir / "train-labels-idx1-ubyte", tr_y)
    write_idx_images(out_dir / "t10k-images-idx3-ubyte", te_x)
    write_idx_labels(out_dir / "t10k-labels-idx1-ubyte", te_y)
    print(f"wrote {tr_y.size} train / {te_y.size} test samples to {out_dir}")


if __name__ == "__main__":
    main()
