"""Sequence matching over patch-normalized downsampled frames.

The matcher builds a reference-by-query difference matrix of mean absolute
differences, optionally applies local contrast enhancement along the
reference axis, and scores velocity-constrained trajectories ending at each
query. Scores are sums over the trajectory, rescaled when samples fall off
the matrix edge, minimized over a uniform velocity grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import EmptySequenceError, InsufficientHistoryError

#: Patches with a standard deviation below this are treated as featureless
#: and zeroed instead of amplified.
PATCH_SIGMA_EPS = 1e-8


@dataclass(frozen=True)
class SeqSlamConfig:
    """Sequence length, velocity bounds, and frame preprocessing geometry."""

    sequence_length: int = 10
    v_min: float = 0.8
    v_max: float = 1.2
    v_step: float = 0.1
    downsample_resolution: tuple[int, int] = (64, 32)
    patch_size: int = 8
    enhancement_window: int = 10

    def __post_init__(self):
        if self.sequence_length < 2:
            raise ValueError("sequence_length must be >= 2")
        if not 0 < self.v_min <= self.v_max:
            raise ValueError("need 0 < v_min <= v_max")
        if self.v_step <= 0:
            raise ValueError("v_step must be > 0")
        if self.enhancement_window < 0:
            raise ValueError("enhancement_window must be >= 0")
        w, h = self.downsample_resolution
        object.__setattr__(self, "downsample_resolution", (int(w), int(h)))
        if w % self.patch_size != 0 or h % self.patch_size != 0:
            raise ValueError(
                f"downsample resolution {w}x{h} must be divisible by patch size {self.patch_size}"
            )

    def velocities(self) -> np.ndarray:
        """Uniform grid {v_min, v_min+v_step, ..., <= v_max}."""
        count = int(np.floor((self.v_max - self.v_min) / self.v_step + 1e-9)) + 1
        return self.v_min + self.v_step * np.arange(count)


@dataclass(frozen=True)
class DifferenceMatrix:
    """Reference-by-query dissimilarity grid.

    Raw matrices hold nonnegative mean absolute differences; enhanced
    matrices hold signed locally-standardized scores (``enhanced`` flag).
    """

    values: np.ndarray
    enhanced: bool = False

    def __post_init__(self):
        a = np.ascontiguousarray(self.values, dtype=np.float64)
        if a.ndim != 2 or a.size == 0:
            raise ValueError(f"difference matrix must be non-empty 2-D, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("difference matrix entries must be finite")
        if not self.enhanced and a.min() < 0:
            raise ValueError("raw difference matrix entries must be >= 0")
        a.flags.writeable = False
        object.__setattr__(self, "values", a)

    @property
    def reference_count(self) -> int:
        return self.values.shape[0]

    @property
    def query_count(self) -> int:
        return self.values.shape[1]


def patch_normalize(img, cfg: SeqSlamConfig | None = None) -> np.ndarray:
    """Standardize each non-overlapping patch to mean 0, sigma 1.

    Removes per-patch affine intensity changes; featureless patches (sigma
    below the guard) become all zeros. Accepts an ImageGray or a 2-D array
    already at the downsampled working size.
    """
    cfg = cfg or SeqSlamConfig()
    p = cfg.patch_size
    a = img.pixels if hasattr(img, "pixels") else np.asarray(img, dtype=np.float64)
    h, w = a.shape
    if h % p != 0 or w % p != 0:
        raise ValueError(f"frame {w}x{h} is not divisible by patch size {p}")
    tiles = a.reshape(h // p, p, w // p, p).transpose(0, 2, 1, 3)
    means = tiles.mean(axis=(2, 3), keepdims=True)
    sigmas = tiles.std(axis=(2, 3), keepdims=True)
    normalized = np.where(sigmas < PATCH_SIGMA_EPS, 0.0, (tiles - means) / np.maximum(sigmas, PATCH_SIGMA_EPS))
    return normalized.transpose(0, 2, 1, 3).reshape(h, w)


def _stack_frames(frames) -> np.ndarray:
    frames = list(frames)
    if not frames:
        raise EmptySequenceError("frame sequence is empty")
    rows = [np.asarray(f, dtype=np.float64).reshape(-1) for f in frames]
    dim = rows[0].size
    if any(r.size != dim for r in rows):
        raise ValueError("all frames must share one resolution")
    return np.stack(rows)


def difference_matrix(query_frames, reference_frames, cfg: SeqSlamConfig | None = None) -> DifferenceMatrix:
    """D[j, i] = mean absolute difference between reference j and query i.

    Inputs are patch-normalized frames (2-D grids); the config argument is
    accepted for interface symmetry but the computation needs only the frames.
    """
    queries = _stack_frames(query_frames)
    references = _stack_frames(reference_frames)
    if queries.shape[1] != references.shape[1]:
        raise ValueError("query and reference frames must share one resolution")
    out = np.empty((references.shape[0], queries.shape[0]))
    for i in range(queries.shape[0]):
        out[:, i] = np.mean(np.abs(references - queries[i]), axis=1)
    return DifferenceMatrix(out)


def enhance_contrast(D: DifferenceMatrix, window: int) -> DifferenceMatrix:
    """Standardize each entry against its column-local neighborhood of rows.

    The neighborhood is the clamped sliding window of min(window, R) rows
    around each row. window <= 0 disables enhancement (identity).
    """
    if window <= 0:
        return D
    values = D.values
    R = values.shape[0]
    out = np.empty_like(values)
    for j in range(R):
        lo = max(0, j - window // 2)
        hi = min(R, lo + window)
        lo = max(0, hi - window)
        block = values[lo:hi, :]
        mu = block.mean(axis=0)
        sigma = block.std(axis=0)
        out[j, :] = np.where(sigma < PATCH_SIGMA_EPS, 0.0, (values[j, :] - mu) / np.maximum(sigma, PATCH_SIGMA_EPS))
    return DifferenceMatrix(out, enhanced=True)


def _check_history(q: int, cfg: SeqSlamConfig, query_count: int) -> None:
    ds = cfg.sequence_length
    if q < ds - 1:
        raise InsufficientHistoryError(
            f"query {q} has fewer than {ds} frames of history (needs index >= {ds - 1})"
        )
    if q >= query_count:
        raise ValueError(f"query index {q} out of range [0, {query_count - 1}]")


def sequence_score(D: DifferenceMatrix, q: int, j: int, cfg: SeqSlamConfig | None = None) -> float:
    """Best (minimum) trajectory cost over the velocity grid for match (q, j).

    Each velocity v sums D[round(j - v*k), q - k] for k = 0..ds-1; samples
    whose row falls outside the matrix are skipped and the sum is rescaled
    by ds / valid_count so scores stay comparable near the edges.
    """
    cfg = cfg or SeqSlamConfig()
    _check_history(q, cfg, D.query_count)
    R = D.reference_count
    if not 0 <= j < R:
        raise ValueError(f"reference index {j} out of range [0, {R - 1}]")
    values = D.values
    ds = cfg.sequence_length
    best = np.inf
    for v in cfg.velocities():
        acc = 0.0
        count = 0
        for k in range(ds):
            r = int(np.rint(j - v * k))
            if 0 <= r < R:
                acc += values[r, q - k]
                count += 1
        score = acc * ds / count
        best = min(best, score)
    return float(best)


def score_all_references(D: DifferenceMatrix, q: int, cfg: SeqSlamConfig | None = None) -> np.ndarray:
    """sequence_score against every reference index at once (same arithmetic)."""
    cfg = cfg or SeqSlamConfig()
    _check_history(q, cfg, D.query_count)
    values = D.values
    R = D.reference_count
    ds = cfg.sequence_length
    j_all = np.arange(R, dtype=np.float64)
    best = np.full(R, np.inf)
    for v in cfg.velocities():
        acc = np.zeros(R)
        count = np.zeros(R, dtype=np.int64)
        for k in range(ds):
            rows = np.rint(j_all - v * k).astype(np.int64)
            valid = (rows >= 0) & (rows < R)
            acc[valid] += values[rows[valid], q - k]
            count[valid] += 1
        best = np.minimum(best, acc * ds / count)
    return best


def best_match(D: DifferenceMatrix, q: int, cfg: SeqSlamConfig | None = None) -> tuple[int, float]:
    """Reference index minimizing the sequence score, with confidence -score.

    Ties break toward the smaller reference index.
    """
    scores = score_all_references(D, q, cfg)
    j = int(np.argmin(scores))
    return j, float(-scores[j])
