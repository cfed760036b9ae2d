"""Bag-of-visual-words and VLAD encoders over pluggable local descriptors.

Vocabulary learning is a deterministic seeded k-means: farthest-point
initialization, Lloyd iterations with a fixed cap, empty clusters re-seeded
from the farthest point. Centroids are stored as float32 so vocabulary files
round-trip bit-exactly.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import NORM_EPS, DescriptorVector, LocalDescriptorSet
from .exceptions import (
    BadMagicError,
    DescriptorFileError,
    DimensionMismatchError,
    TooFewSamplesError,
    TruncatedPayloadError,
    UnsupportedVersionError,
)
from .hog import HogConfig, cell_histograms, gradients
from .validation import as_image

KMEANS_MAX_ITER = 100
KMEANS_TOL = 1e-6

VOCAB_MAGIC = b"VPRV"
VOCAB_VERSION = 1

LOCAL_SOURCES = ("hog_cells", "dense_patches", "external_file")


@dataclass(frozen=True)
class AggregationConfig:
    mode: str = "bow"  # bow | vlad
    k: int = 64
    local_source: str = "hog_cells"
    intra_normalize: bool = True  # vlad only

    def __post_init__(self):
        if self.mode not in ("bow", "vlad"):
            raise ValueError(f"mode must be bow or vlad, got {self.mode!r}")
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.local_source not in LOCAL_SOURCES:
            raise ValueError(f"unknown local source {self.local_source!r}")


@dataclass(frozen=True, eq=False)
class Vocabulary:
    """k visual words of dimension d, plus the seed that produced them."""

    centroids: np.ndarray
    seed: int
    source_tag: str = ""
    objective_history: tuple[float, ...] = field(default=(), compare=False, repr=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return (
            self.seed == other.seed
            and self.source_tag == other.source_tag
            and self.centroids.shape == other.centroids.shape
            and self.centroids.tobytes() == other.centroids.tobytes()
        )

    def __post_init__(self):
        c = np.ascontiguousarray(self.centroids, dtype=np.float32)
        if c.ndim != 2 or c.shape[0] < 1 or c.shape[1] < 1:
            raise ValueError(f"centroids must be a (k, d) matrix, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValueError("centroids must be finite")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")
        c.flags.writeable = False
        object.__setattr__(self, "centroids", c)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def d(self) -> int:
        return self.centroids.shape[1]


def save_vocabulary(vocab: Vocabulary, path) -> None:
    """Binary layout: magic VPRV | version u16 | k u32 | d u32 | seed u64 | k*d f32 LE."""
    header = struct.pack("<4sHIIQ", VOCAB_MAGIC, VOCAB_VERSION, vocab.k, vocab.d, vocab.seed)
    payload = vocab.centroids.astype("<f4").tobytes(order="C")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)
        fh.flush()
        os.fsync(fh.fileno())


def load_vocabulary(path) -> Vocabulary:
    data = Path(path).read_bytes()
    head_size = struct.calcsize("<4sHIIQ")
    if len(data) < head_size:
        raise TruncatedPayloadError(f"vocabulary file {path} shorter than its header")
    magic, version, k, d, seed = struct.unpack_from("<4sHIIQ", data)
    if magic != VOCAB_MAGIC:
        raise BadMagicError(f"{path} is not a vocabulary file")
    if version != VOCAB_VERSION:
        raise UnsupportedVersionError(f"vocabulary version {version} not supported")
    expected = head_size + k * d * 4
    if len(data) < expected:
        raise TruncatedPayloadError(f"vocabulary file {path} is truncated")
    if len(data) > expected:
        raise DescriptorFileError(f"vocabulary file {path} has trailing bytes")
    centroids = np.frombuffer(data, dtype="<f4", offset=head_size).reshape(k, d)
    return Vocabulary(centroids.copy(), seed=int(seed))


def _local_matrix(locals_pool) -> np.ndarray:
    if isinstance(locals_pool, LocalDescriptorSet):
        return np.asarray(locals_pool.descriptors, dtype=np.float64)
    return np.ascontiguousarray(locals_pool, dtype=np.float64)


def assign_words(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Nearest-centroid labels under squared L2; ties go to the smaller index."""
    X = np.asarray(X, dtype=np.float64)
    C = np.asarray(centroids, dtype=np.float64)
    labels = np.empty(X.shape[0], dtype=np.int64)
    chunk = max(1, int(2_000_000 / max(1, C.shape[0] * C.shape[1])))
    for start in range(0, X.shape[0], chunk):
        block = X[start:start + chunk]
        d2 = np.sum((block[:, None, :] - C[None, :, :]) ** 2, axis=2)
        labels[start:start + chunk] = np.argmin(d2, axis=1)
    return labels


def train_vocabulary(locals_pool, k: int, seed: int, source_tag: str = "") -> Vocabulary:
    """Deterministic seeded k-means over a pool of local descriptors.

    The first centroid is drawn from the seeded generator; the rest follow a
    farthest-point traversal. Lloyd updates run until centroid movement drops
    below KMEANS_TOL or KMEANS_MAX_ITER is hit, with the clustering objective
    checked to be non-increasing each iteration.
    """
    X = _local_matrix(locals_pool)
    n = X.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < k:
        raise TooFewSamplesError(f"need at least {k} local descriptors, got {n}")

    rng = np.random.default_rng(seed)
    chosen = [int(rng.integers(n))]
    nearest2 = np.sum((X - X[chosen[0]]) ** 2, axis=1)
    for _ in range(k - 1):
        nxt = int(np.argmax(nearest2))
        chosen.append(nxt)
        nearest2 = np.minimum(nearest2, np.sum((X - X[nxt]) ** 2, axis=1))
    centroids = X[chosen].copy()

    history: list[float] = []
    for _ in range(KMEANS_MAX_ITER):
        labels = assign_words(X, centroids)
        resid2 = np.sum((X - centroids[labels]) ** 2, axis=1)
        objective = float(np.sum(resid2))
        if history:
            assert objective <= history[-1] * (1 + 1e-12) + 1e-12, (
                "k-means objective increased"
            )
        history.append(objective)

        new_centroids = centroids.copy()
        counts = np.bincount(labels, minlength=k)
        for w in range(k):
            if counts[w] > 0:
                new_centroids[w] = X[labels == w].mean(axis=0)
        for w in range(k):
            if counts[w] == 0:
                farthest = int(np.argmax(resid2))
                new_centroids[w] = X[farthest]
                resid2[farthest] = 0.0

        movement = float(np.max(np.linalg.norm(new_centroids - centroids, axis=1)))
        centroids = new_centroids
        if movement <= KMEANS_TOL:
            break

    return Vocabulary(
        centroids.astype(np.float32),
        seed=seed,
        source_tag=source_tag,
        objective_history=tuple(history),
    )


def extract_local(img, source: str, cell_size: int = 8, patch_size: int = 8,
                  patch_stride: int = 8) -> LocalDescriptorSet:
    """Local descriptors from one image.

    hog_cells: per-cell 9-bin gradient histograms on the cell grid.
    dense_patches: mean-centered, L2-normalized patch intensity vectors on a
    stride grid (constant patches become all-zero under the norm guard).
    Images are cropped to whole cells/patches, so the operation is total.
    """
    image = as_image(img)
    if source == "hog_cells":
        cfg = HogConfig(cell_size=cell_size, block_size=cell_size, block_stride=cell_size,
                        working_resolution=None)
        h = (image.height // cell_size) * cell_size
        w = (image.width // cell_size) * cell_size
        cropped = image.pixels[:h, :w]
        hist = cell_histograms(gradients(cropped), cfg)
        return LocalDescriptorSet(hist.reshape(-1, cfg.bin_count))
    if source == "dense_patches":
        a = image.pixels
        rows = []
        for y0 in range(0, a.shape[0] - patch_size + 1, patch_stride):
            for x0 in range(0, a.shape[1] - patch_size + 1, patch_stride):
                patch = a[y0:y0 + patch_size, x0:x0 + patch_size].reshape(-1)
                patch = patch - patch.mean()
                norm = np.linalg.norm(patch)
                rows.append(patch / norm if norm > NORM_EPS else np.zeros_like(patch))
        return LocalDescriptorSet(np.stack(rows))
    raise ValueError(f"cannot extract locals from source {source!r}")


def _canonical_order(X: np.ndarray) -> np.ndarray:
    # Lexicographic row order makes residual summation independent of the
    # input order, so encodings are exactly permutation-invariant.
    return np.lexsort(X.T[::-1])


def bow_encode(locals_set, vocab: Vocabulary) -> DescriptorVector:
    """L2-normalized histogram of hard word assignments."""
    X = _local_matrix(locals_set)
    if X.shape[1] != vocab.d:
        raise DimensionMismatchError(f"locals dim {X.shape[1]} != vocabulary dim {vocab.d}")
    labels = assign_words(X, vocab.centroids)
    hist = np.bincount(labels, minlength=vocab.k).astype(np.float64)
    norm = np.linalg.norm(hist)
    if norm > NORM_EPS:
        hist = hist / norm
    return DescriptorVector("bow", hist)


def vlad_encode(locals_set, vocab: Vocabulary, cfg: AggregationConfig | None = None) -> DescriptorVector:
    """Concatenated per-word residual sums, intra- and globally L2-normalized.

    All-zero residuals (every local sitting exactly on its centroid) pass
    through the norm guards unchanged, giving the zero vector.
    """
    intra = cfg.intra_normalize if cfg is not None else True
    X = _local_matrix(locals_set)
    if X.shape[1] != vocab.d:
        raise DimensionMismatchError(f"locals dim {X.shape[1]} != vocabulary dim {vocab.d}")
    X = X[_canonical_order(X)]
    centroids = np.asarray(vocab.centroids, dtype=np.float64)
    labels = assign_words(X, centroids)

    blocks = np.zeros((vocab.k, vocab.d))
    for w in range(vocab.k):
        members = X[labels == w]
        if members.shape[0] > 0:
            blocks[w] = np.sum(members - centroids[w], axis=0)
    if intra:
        for w in range(vocab.k):
            norm = np.linalg.norm(blocks[w])
            if norm > NORM_EPS:
                blocks[w] = blocks[w] / norm
    values = blocks.reshape(-1)
    norm = np.linalg.norm(values)
    if norm > NORM_EPS:
        values = values / norm
    return DescriptorVector("vlad", values)
