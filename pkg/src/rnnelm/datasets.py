"""Dataset loading: MNIST (IDX format), small NORB (binary matrix format),
and synthetic Gaussian blobs for desk-scale testing.

Both binary parsers are bit-exact against the published formats and report
the byte offset of any malformed field. Paths ending in .gz are
transparently decompressed.
"""

import gzip
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DatasetFormatError, InvalidInputError, InvalidLabelError

__all__ = [
    "Dataset",
    "PIXEL_SCALES",
    "load_mnist",
    "load_idx_images",
    "load_idx_labels",
    "write_idx_images",
    "write_idx_labels",
    "load_norb",
    "read_norb_matrix",
    "write_norb_matrix",
    "synthetic_blobs",
]

PIXEL_SCALES = ("scaled", "raw")

IDX_IMAGE_MAGIC = 2051
IDX_LABEL_MAGIC = 2049
NORB_BYTE_MAGIC = 0x1E3D4C55
NORB_INT_MAGIC = 0x1E3D4C54


@dataclass(frozen=True)
class Dataset:
    """Feature matrix (N x M float64) with integer labels in [0, n_classes)."""

    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    name: str

    def __post_init__(self):
        if self.features.ndim != 2 or self.features.shape[0] < 1:
            raise InvalidInputError(f"features must be a non-empty 2-D matrix, got {self.features.shape}")
        if not np.isfinite(self.features).all():
            raise InvalidInputError("features contain NaN or Inf")
        if self.labels.shape != (self.features.shape[0],):
            raise InvalidLabelError("labels must align with feature rows")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise InvalidLabelError(f"labels must be in [0, {self.n_classes})")

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]


def _open_binary(path):
    path = str(path)
    return gzip.open(path, "rb") if path.endswith(".gz") else open(path, "rb")


def _read_exact(fh, count, path, offset, what):
    data = fh.read(count)
    if len(data) != count:
        raise DatasetFormatError(
            f"{path}: truncated while reading {what} at offset {offset} "
            f"(wanted {count} bytes, got {len(data)})"
        )
    return data


def _read_be_u32(fh, path, offset, what):
    return struct.unpack(">I", _read_exact(fh, 4, path, offset, what))[0]


def load_idx_images(path):
    """Parse an IDX image file into a uint8 array of shape (N, rows, cols).

    Layout (big endian): i32 magic 2051 | i32 count | i32 rows | i32 cols |
    u8 pixels row-wise. Trailing bytes are an error.
    """
    with _open_binary(path) as fh:
        magic = _read_be_u32(fh, path, 0, "magic")
        if magic != IDX_IMAGE_MAGIC:
            raise DatasetFormatError(f"{path}: bad image magic {magic} at offset 0 (want {IDX_IMAGE_MAGIC})")
        count = _read_be_u32(fh, path, 4, "image count")
        rows = _read_be_u32(fh, path, 8, "row count")
        cols = _read_be_u32(fh, path, 12, "column count")
        payload = fh.read()
    expected = count * rows * cols
    if len(payload) != expected:
        raise DatasetFormatError(
            f"{path}: pixel payload at offset 16 has {len(payload)} bytes, want {expected}"
        )
    return np.frombuffer(payload, dtype=np.uint8).reshape(count, rows, cols)


def load_idx_labels(path):
    """Parse an IDX label file: i32 magic 2049 | i32 count | u8 labels."""
    with _open_binary(path) as fh:
        magic = _read_be_u32(fh, path, 0, "magic")
        if magic != IDX_LABEL_MAGIC:
            raise DatasetFormatError(f"{path}: bad label magic {magic} at offset 0 (want {IDX_LABEL_MAGIC})")
        count = _read_be_u32(fh, path, 4, "label count")
        payload = fh.read()
    if len(payload) != count:
        raise DatasetFormatError(
            f"{path}: label payload at offset 8 has {len(payload)} bytes, want {count}"
        )
    return np.frombuffer(payload, dtype=np.uint8)


def write_idx_images(path, images):
    """Write a uint8 (N, rows, cols) array in IDX image format (fixtures/round trips)."""
    images = np.ascontiguousarray(images, dtype=np.uint8)
    if images.ndim != 3:
        raise InvalidInputError(f"images must be (N, rows, cols), got {images.shape}")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", IDX_IMAGE_MAGIC, *images.shape))
        fh.write(images.tobytes())


def write_idx_labels(path, labels):
    labels = np.ascontiguousarray(labels, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", IDX_LABEL_MAGIC, labels.size))
        fh.write(labels.tobytes())


def _scale_pixels(values, scale):
    if scale not in PIXEL_SCALES:
        raise InvalidInputError(f"scale must be one of {PIXEL_SCALES}, got {scale!r}")
    values = values.astype(np.float64)
    return values / 255.0 if scale == "scaled" else values


def load_mnist(images_path, labels_path, scale="scaled"):
    """Load an MNIST-style IDX image/label pair as a flat-feature Dataset.

    scale="scaled" maps bytes to [0, 1] (divide by 255); "raw" keeps them.
    """
    images = load_idx_images(images_path)
    labels = load_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise DatasetFormatError(
            f"count mismatch: {images.shape[0]} images ({images_path}) vs "
            f"{labels.shape[0]} labels ({labels_path})"
        )
    features = _scale_pixels(images.reshape(images.shape[0], -1), scale)
    labels = labels.astype(np.int64)
    return Dataset(
        features=features,
        labels=labels,
        n_classes=int(labels.max()) + 1,
        name="mnist",
    )


def read_norb_matrix(path):
    """Parse a small-NORB binary matrix file.

    Layout (little endian): i32 magic (0x1E3D4C55 byte / 0x1E3D4C54 i32) |
    i32 ndim | i32 dims (at least 3 stored, extras are 1) | raw data.
    """
    with _open_binary(path) as fh:
        magic = struct.unpack("<I", _read_exact(fh, 4, path, 0, "magic"))[0]
        if magic == NORB_BYTE_MAGIC:
            dtype = np.uint8
        elif magic == NORB_INT_MAGIC:
            dtype = np.dtype("<i4")
        else:
            raise DatasetFormatError(f"{path}: bad magic 0x{magic:08X} at offset 0")
        ndim = struct.unpack("<i", _read_exact(fh, 4, path, 4, "ndim"))[0]
        if not 1 <= ndim <= 8:
            raise DatasetFormatError(f"{path}: implausible ndim {ndim} at offset 4")
        stored = max(ndim, 3)
        dims_raw = _read_exact(fh, 4 * stored, path, 8, "dimensions")
        dims = struct.unpack(f"<{stored}i", dims_raw)[:ndim]
        if any(d <= 0 for d in dims):
            raise DatasetFormatError(f"{path}: non-positive dimension in {dims} at offset 8")
        payload = fh.read()
    expected = int(np.prod(dims)) * np.dtype(dtype).itemsize
    header_len = 8 + 4 * stored
    if len(payload) != expected:
        raise DatasetFormatError(
            f"{path}: payload at offset {header_len} has {len(payload)} bytes, want {expected}"
        )
    return np.frombuffer(payload, dtype=dtype).reshape(dims)


def write_norb_matrix(path, array):
    """Write an array in small-NORB binary matrix format (uint8 or int32)."""
    array = np.ascontiguousarray(array)
    if array.dtype == np.uint8:
        magic = NORB_BYTE_MAGIC
    elif array.dtype in (np.int32, np.dtype("<i4")):
        magic = NORB_INT_MAGIC
        array = array.astype("<i4")
    else:
        raise InvalidInputError(f"unsupported dtype {array.dtype}")
    dims = list(array.shape) + [1] * max(0, 3 - array.ndim)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Ii", magic, array.ndim))
        fh.write(struct.pack(f"<{len(dims)}i", *dims))
        fh.write(array.tobytes())


def _pool_stereo(stereo, factor, method):
    """(N, 2, H, W) uint8 -> (N, 2 * (H/f) * (W/f)) float64, in sample chunks."""
    n, pair, h, w = stereo.shape
    out_h, out_w = h // factor, w // factor
    out = np.empty((n, pair * out_h * out_w))
    chunk = max(1, 2_000_000 // (pair * h * w))
    for start in range(0, n, chunk):
        block = stereo[start : start + chunk]
        if method == "pool":
            reduced = block.reshape(-1, pair, out_h, factor, out_w, factor).mean(
                axis=(3, 5), dtype=np.float64
            )
        else:  # stride
            reduced = block[:, :, ::factor, ::factor].astype(np.float64)
        out[start : start + chunk] = reduced.reshape(block.shape[0], -1)
    return out


def load_norb(data_path, label_path, downsample=3, scale="scaled", method="pool"):
    """Load a small-NORB stereo data/label file pair.

    Each 2 x 96 x 96 stereo pair is reduced by `downsample` (3 by default,
    yielding 2 x 32 x 32 = 2048 features): 3x3 average pooling, or strided
    subsampling with method="stride". The two reduced images are
    concatenated left-then-right.
    """
    if method not in ("pool", "stride"):
        raise InvalidInputError(f"method must be 'pool' or 'stride', got {method!r}")
    data = read_norb_matrix(data_path)
    labels = read_norb_matrix(label_path)
    if data.ndim != 4 or data.shape[1] != 2:
        raise DatasetFormatError(f"{data_path}: expected (N, 2, H, W) stereo data, got {data.shape}")
    n, _, h, w = data.shape
    if h % downsample or w % downsample:
        raise InvalidInputError(f"downsample factor {downsample} does not divide {h}x{w}")
    labels = labels.reshape(-1).astype(np.int64)
    if labels.shape[0] != n:
        raise DatasetFormatError(
            f"count mismatch: {n} samples ({data_path}) vs {labels.shape[0]} labels ({label_path})"
        )
    features = _pool_stereo(data, downsample, method)
    if scale not in PIXEL_SCALES:
        raise InvalidInputError(f"scale must be one of {PIXEL_SCALES}, got {scale!r}")
    if scale == "scaled":
        features /= 255.0
    return Dataset(
        features=features,
        labels=labels,
        n_classes=int(labels.max()) + 1,
        name="norb",
    )


def synthetic_blobs(seed, n_per_class, n_classes, dim, spread):
    """K Gaussian clusters with unit-separated non-negative means.

    Class c is centered at the constant vector c + 1; features are clipped
    at zero so cluster-activation preconditions hold. Deterministic in seed.
    """
    if n_per_class < 1 or n_classes < 1 or dim < 1:
        raise InvalidInputError("counts must be >= 1")
    rng = np.random.default_rng(seed)
    means = np.arange(1, n_classes + 1, dtype=np.float64)[:, None] * np.ones(dim)
    features = np.vstack(
        [rng.normal(means[c], spread, size=(n_per_class, dim)) for c in range(n_classes)]
    )
    labels = np.repeat(np.arange(n_classes), n_per_class)
    order = rng.permutation(labels.size)
    return Dataset(
        features=np.clip(features[order], 0.0, None),
        labels=labels[order],
        n_classes=n_classes,
        name="blobs",
    )
