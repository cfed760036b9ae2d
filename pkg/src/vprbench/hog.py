"""Histogram-of-oriented-gradients whole-image descriptor.

Configuration follows the classical layout: 8x8 cells, 16x16 blocks sliding
one cell at a time, 9 unsigned orientation bins over [0, 180). Block vectors
are L2-normalized, clipped at 0.2, and renormalized before concatenation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import NORM_EPS, DescriptorVector, resize_image
from .exceptions import ConfigImageMismatchError
from .validation import as_image

#: Post-normalization clip applied to block vectors before renormalizing.
BLOCK_CLIP = 0.2


@dataclass(frozen=True)
class HogConfig:
    """Geometry of the descriptor grid.

    ``working_resolution`` is (width, height); images are resized to it before
    description. Set it to None to describe images at native size, which then
    must be cell-aligned.
    """

    cell_size: int = 8
    block_size: int = 16
    bin_count: int = 9
    block_stride: int = 8
    working_resolution: tuple[int, int] | None = (128, 128)

    def __post_init__(self):
        if self.cell_size < 1 or self.block_size < 1 or self.block_stride < 1:
            raise ValueError("cell_size, block_size and block_stride must be positive")
        if self.bin_count < 2:
            raise ValueError("bin_count must be >= 2")
        if self.block_size % self.cell_size != 0:
            raise ValueError("block_size must be an integer multiple of cell_size")
        if self.block_stride % self.cell_size != 0:
            raise ValueError("block_stride must be an integer multiple of cell_size")
        if self.working_resolution is not None:
            w, h = self.working_resolution
            object.__setattr__(self, "working_resolution", (int(w), int(h)))
            self._check_geometry(int(w), int(h))

    def _check_geometry(self, width: int, height: int) -> None:
        if width % self.cell_size != 0 or height % self.cell_size != 0:
            raise ConfigImageMismatchError(
                f"image {width}x{height} is not a multiple of cell size {self.cell_size}"
            )
        if width < self.block_size or height < self.block_size:
            raise ConfigImageMismatchError(
                f"image {width}x{height} cannot hold a {self.block_size}px block"
            )

    def block_grid(self, width: int, height: int) -> tuple[int, int]:
        """Number of block positions (nx, ny) for an image of the given size."""
        nx = (width - self.block_size) // self.block_stride + 1
        ny = (height - self.block_size) // self.block_stride + 1
        return nx, ny

    def descriptor_dim(self, width: int | None = None, height: int | None = None) -> int:
        if width is None or height is None:
            if self.working_resolution is None:
                raise ValueError("image size needed when working_resolution is None")
            width, height = self.working_resolution
        nx, ny = self.block_grid(width, height)
        cells_per_block = (self.block_size // self.cell_size) ** 2
        return nx * ny * cells_per_block * self.bin_count


def gradients(img) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel gradient magnitude and unsigned angle in degrees [0, 180).

    Central differences with the [-1, 0, 1] kernel in the interior; border
    pixels fall back to one-sided differences.
    """
    a = as_image(img).pixels
    gx = np.empty_like(a)
    gy = np.empty_like(a)
    gx[:, 1:-1] = a[:, 2:] - a[:, :-2]
    gx[:, 0] = a[:, 1] - a[:, 0]
    gx[:, -1] = a[:, -1] - a[:, -2]
    gy[1:-1, :] = a[2:, :] - a[:-2, :]
    gy[0, :] = a[1, :] - a[0, :]
    gy[-1, :] = a[-1, :] - a[-2, :]
    magnitude = np.hypot(gx, gy)
    angle = np.degrees(np.arctan2(gy, gx)) % 180.0
    return magnitude, angle


def cell_histograms(grads: tuple[np.ndarray, np.ndarray], cfg: HogConfig) -> np.ndarray:
    """Orientation histograms per cell, shape (cells_y, cells_x, bin_count).

    Each pixel's magnitude is split between the two nearest bin centers by
    linear interpolation in angle; bins wrap at 180 degrees, so per-cell
    histogram mass equals the cell's total gradient magnitude.
    """
    magnitude, angle = grads
    c = cfg.cell_size
    h, w = magnitude.shape
    if h % c != 0 or w % c != 0:
        raise ConfigImageMismatchError(f"gradient grid {w}x{h} not divisible by cell size {c}")
    bins = cfg.bin_count
    bin_width = 180.0 / bins

    t = angle / bin_width
    lower = np.floor(t)
    frac = t - lower
    b0 = lower.astype(np.int64) % bins
    b1 = (b0 + 1) % bins

    cy = np.arange(h) // c
    cx = np.arange(w) // c
    cell_y = np.broadcast_to(cy[:, None], (h, w))
    cell_x = np.broadcast_to(cx[None, :], (h, w))

    hist = np.zeros((h // c, w // c, bins))
    np.add.at(hist, (cell_y, cell_x, b0), magnitude * (1.0 - frac))
    np.add.at(hist, (cell_y, cell_x, b1), magnitude * frac)
    return hist


def _normalize_block(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n <= NORM_EPS:
        return v
    v = np.minimum(v / n, BLOCK_CLIP)
    n = np.linalg.norm(v)
    if n <= NORM_EPS:
        return v
    return v / n


def hog_descriptor(img, cfg: HogConfig | None = None) -> DescriptorVector:
    """Whole-image HOG descriptor as a flat vector.

    Blocks slide over the cell grid with ``block_stride``; each block's
    concatenated cell histograms are normalized independently and the block
    vectors are concatenated row-major (y outer, x inner).
    """
    cfg = cfg or HogConfig()
    image = as_image(img)
    if cfg.working_resolution is not None:
        image = resize_image(image, cfg.working_resolution)
    else:
        cfg._check_geometry(image.width, image.height)

    hist = cell_histograms(gradients(image), cfg)
    cells_per_side = cfg.block_size // cfg.cell_size
    stride_cells = cfg.block_stride // cfg.cell_size
    nx, ny = cfg.block_grid(image.width, image.height)

    blocks = []
    for by in range(ny):
        for bx in range(nx):
            y0 = by * stride_cells
            x0 = bx * stride_cells
            block = hist[y0:y0 + cells_per_side, x0:x0 + cells_per_side, :].reshape(-1)
            blocks.append(_normalize_block(block))
    # Constant images yield the all-zero descriptor; it is legal and scores 0
    # against everything under the matching policy.
    return DescriptorVector("hog", np.concatenate(blocks))
