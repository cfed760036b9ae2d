"""Input validation helpers shared by the technique estimators."""

from __future__ import annotations

import numpy as np

from .core import ImageGray

__all__ = ["as_image", "as_image_list", "as_float_rows", "as_flat_vector"]


def as_image(obj) -> ImageGray:
    """Coerce an ImageGray or a 2-D array in [0,1] into an ImageGray."""
    if isinstance(obj, ImageGray):
        return obj
    return ImageGray(np.asarray(obj))


def as_image_list(images) -> list[ImageGray]:
    imgs = [as_image(im) for im in images]
    if not imgs:
        raise ValueError("expected at least one image")
    return imgs


def as_float_rows(x, dim: int | None = None) -> np.ndarray:
    """Coerce to a C-contiguous (n, d) float64 matrix, optionally checking d."""
    a = np.ascontiguousarray(x, dtype=np.float64)
    if a.ndim == 1:
        a = a.reshape(1, -1)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D row matrix, got shape {a.shape}")
    if dim is not None and a.shape[1] != dim:
        raise ValueError(f"expected rows of dim {dim}, got {a.shape[1]}")
    return a


def as_flat_vector(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64).reshape(-1)
    if a.size == 0:
        raise ValueError("expected a non-empty vector")
    return a
