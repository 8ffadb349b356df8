"""Principal-component reduction via singular value decomposition.

Rows are samples, columns are features; components live in feature space.
Fitting runs a thin SVD on the (by default, mean-centered) data matrix and
keeps the right singular vectors of the m largest singular values, so the
projection of new data is (X - mean) @ components.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, ModelFormatError, ShapeError
from .numerics import as_matrix, svd

__all__ = ["PcaModel", "pca_fit", "pca_transform", "pca_inverse_transform"]

_MAGIC = b"PCAF"
_VERSION = 1
_HEADER = "<4sBQQQ"


@dataclass(frozen=True)
class PcaModel:
    """Fitted projection: feature means, M x m component matrix (orthonormal
    columns, strongest direction first), the corresponding singular values,
    and the sample count they were estimated from."""

    mean: np.ndarray
    components: np.ndarray
    singular_values: np.ndarray
    n_samples: int

    @property
    def n_features(self):
        return self.components.shape[0]

    @property
    def n_components(self):
        return self.components.shape[1]

    @property
    def explained_variance(self):
        """Per-component variances, singular_values^2 / n_samples: the top
        eigenvalues of the (1/N-normalized) sample covariance."""
        return self.singular_values**2 / self.n_samples

    def to_bytes(self):
        """Flat binary encoding: versioned header, mean, singular values,
        then the component matrix row-major, all little-endian float64."""
        header = struct.pack(
            _HEADER, _MAGIC, _VERSION, self.n_features, self.n_components, self.n_samples
        )
        return b"".join(
            (
                header,
                self.mean.astype("<f8").tobytes(),
                self.singular_values.astype("<f8").tobytes(),
                np.ascontiguousarray(self.components, dtype="<f8").tobytes(),
            )
        )

    @classmethod
    def from_bytes(cls, blob, source="<bytes>"):
        hsize = struct.calcsize(_HEADER)
        if len(blob) < hsize:
            raise ModelFormatError(f"{source}: truncated header")
        magic, version, m_feat, m_comp, n_samples = struct.unpack(_HEADER, blob[:hsize])
        if magic != _MAGIC:
            raise ModelFormatError(f"{source}: bad magic {magic!r}")
        if version != _VERSION:
            raise ModelFormatError(f"{source}: unsupported version {version}")
        expected = 8 * (m_feat + m_comp + m_feat * m_comp)
        body = blob[hsize:]
        if len(body) != expected:
            raise ModelFormatError(f"{source}: expected {expected} payload bytes, got {len(body)}")
        mean = np.frombuffer(body[: 8 * m_feat], dtype="<f8").copy()
        sing = np.frombuffer(body[8 * m_feat : 8 * (m_feat + m_comp)], dtype="<f8").copy()
        comps = (
            np.frombuffer(body[8 * (m_feat + m_comp) :], dtype="<f8")
            .reshape(m_feat, m_comp)
            .copy()
        )
        return cls(mean=mean, components=comps, singular_values=sing, n_samples=int(n_samples))

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read(), source=str(path))


def pca_fit(x, m, center=True):
    """Fit an m-component projection to the N x M data matrix x.

    center=False skips mean subtraction (the projection then uses a zero
    mean vector), for comparisons against uncentered covariance variants.
    """
    x = as_matrix(x, "data")
    n, n_feat = x.shape
    if n < 2:
        raise InvalidInputError("need at least 2 samples to fit")
    if not 1 <= m <= min(n, n_feat):
        raise InvalidInputError(f"m must be in [1, {min(n, n_feat)}], got {m}")
    mean = x.mean(axis=0) if center else np.zeros(n_feat)
    _, s, vt = svd(x - mean)
    components = vt[:m].T
    # Deterministic sign: largest-magnitude entry of each component positive.
    anchor = np.argmax(np.abs(components), axis=0)
    signs = np.sign(components[anchor, np.arange(m)])
    signs[signs == 0] = 1.0
    return PcaModel(
        mean=mean,
        components=components * signs,
        singular_values=s[:m].copy(),
        n_samples=n,
    )


def pca_transform(model, x):
    """Project samples onto the principal directions: (x - mean) @ components."""
    x = as_matrix(x, "data")
    if x.shape[1] != model.n_features:
        raise ShapeError(f"expected {model.n_features} features, got {x.shape[1]}")
    return (x - model.mean) @ model.components


def pca_inverse_transform(model, y):
    """Map projected samples back to feature space: y @ components.T + mean."""
    y = as_matrix(y, "projection")
    if y.shape[1] != model.n_components:
        raise ShapeError(f"expected {model.n_components} components, got {y.shape[1]}")
    return y @ model.components.T + model.mean
