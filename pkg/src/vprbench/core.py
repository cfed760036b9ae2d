"""Shared domain types and similarity primitives.

Everything here is immutable after construction and free of hidden state,
so all operations are safe to call concurrently. Scalars are float64
internally; the 32-bit story only applies to serialized descriptor files.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image

from .exceptions import DimensionMismatchError, ZeroVectorError

#: Norm guard shared by every normalization in the package. Far below any
#: descriptor magnitude the pipelines produce.
NORM_EPS = 1e-12

#: Grayscale conversion weights (luma), applied to RGB in [0,1].
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class ImageGray:
    """Grayscale raster, row-major, intensities in [0, 1].

    ``pixels`` has shape (height, width); the array is frozen on construction.
    """

    pixels: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.pixels, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError(f"image must be 2-D with positive dims, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("image intensities must be finite")
        if a.min() < 0.0 or a.max() > 1.0:
            raise ValueError("image intensities must lie in [0, 1]")
        object.__setattr__(self, "pixels", _readonly(a))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class DescriptorVector:
    """Flat numeric vector plus the identity of the technique that made it."""

    technique_id: str
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if v.size < 1:
            raise ValueError("descriptor must have at least one element")
        if not np.all(np.isfinite(v)):
            raise ValueError("descriptor values must be finite")
        object.__setattr__(self, "values", _readonly(v))

    @property
    def dim(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class LocalDescriptorSet:
    """A bag of equal-dimension local descriptors, stored as an (n, d) array."""

    descriptors: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.descriptors, dtype=np.float64)
        if a.ndim != 2 or a.shape[1] < 1:
            raise ValueError(f"local descriptors must form an (n, d) array, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("local descriptors must be finite")
        object.__setattr__(self, "descriptors", _readonly(a))

    @property
    def dim(self) -> int:
        return self.descriptors.shape[1]

    def __len__(self) -> int:
        return self.descriptors.shape[0]


def _values(x) -> np.ndarray:
    if isinstance(x, DescriptorVector):
        return x.values
    return np.asarray(x, dtype=np.float64).reshape(-1)


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between two descriptors, in [-1, 1].

    Raises ZeroVectorError when either norm is below the guard; the metrics
    layer maps that case to score 0 (minimum confidence) rather than aborting.
    """
    va, vb = _values(a), _values(b)
    if va.size != vb.size:
        raise DimensionMismatchError(f"dims differ: {va.size} vs {vb.size}")
    na = np.linalg.norm(va)
    nb = np.linalg.norm(vb)
    if na <= NORM_EPS or nb <= NORM_EPS:
        raise ZeroVectorError("cosine similarity undefined for zero-norm vector")
    return float(np.clip(np.dot(va, vb) / (na * nb), -1.0, 1.0))


def l1_distance(a, b) -> float:
    """Sum of absolute element differences; 0 iff the vectors are equal."""
    va, vb = _values(a), _values(b)
    if va.size != vb.size:
        raise DimensionMismatchError(f"dims differ: {va.size} vs {vb.size}")
    return float(np.sum(np.abs(va - vb)))


def l2_normalize(v):
    """Scale to unit L2 norm; vectors with norm <= NORM_EPS pass through unchanged."""
    if isinstance(v, DescriptorVector):
        return DescriptorVector(v.technique_id, l2_normalize(v.values))
    a = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(a)
    if n <= NORM_EPS:
        return a.copy()
    return a / n


def resize_image(img: ImageGray, size: tuple[int, int]) -> ImageGray:
    """Resize to (width, height) with bilinear interpolation.

    Bilinear weights are convex, so intensities stay inside [0, 1].
    """
    w, h = int(size[0]), int(size[1])
    if (img.width, img.height) == (w, h):
        return img
    pil = Image.fromarray(img.pixels.astype(np.float32), mode="F")
    out = np.asarray(pil.resize((w, h), Image.BILINEAR), dtype=np.float64)
    return ImageGray(np.clip(out, 0.0, 1.0))
