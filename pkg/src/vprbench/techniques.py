"""Technique estimators with a scikit-learn-style surface.

Each technique is a BaseEstimator: the constructor only stores parameters
(so ``get_params``/``set_params``/``clone`` compose with the wider
ecosystem), ``fit`` encodes the reference traverse, ``transform`` maps images
to descriptor rows, and ``match``/``predict`` retrieve reference indices for
queries. Confidences are uniformly "higher is better"; distance-based
techniques negate.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import seqslam as sq
from .aggregation import (
    AggregationConfig,
    bow_encode,
    extract_local,
    load_vocabulary,
    train_vocabulary,
    vlad_encode,
)
from .core import NORM_EPS, resize_image
from .dataset import IMAGE_EXTENSIONS, load_image_gray
from .descriptor_io import read_descriptor_file
from .exceptions import ConfigError, TechniqueError, VprBenchError
from .hog import HogConfig, hog_descriptor
from .seqslam import SeqSlamConfig
from .validation import as_image_list


def cosine_score_matrix(queries: np.ndarray, references: np.ndarray) -> np.ndarray:
    """Pairwise cosine scores; zero-norm rows score 0 against everything.

    This is the matching-layer policy for the ZeroVector case: constant
    images are legal inputs and must not abort a benchmark run.
    """
    qn = np.linalg.norm(queries, axis=1, keepdims=True)
    rn = np.linalg.norm(references, axis=1, keepdims=True)
    qs = np.where(qn > NORM_EPS, queries / np.maximum(qn, NORM_EPS), 0.0)
    rs = np.where(rn > NORM_EPS, references / np.maximum(rn, NORM_EPS), 0.0)
    return qs @ rs.T


def l1_score_matrix(queries: np.ndarray, references: np.ndarray) -> np.ndarray:
    """Pairwise negative L1 distances (higher = more similar)."""
    out = np.empty((queries.shape[0], references.shape[0]))
    for i in range(queries.shape[0]):
        out[i] = -np.sum(np.abs(references - queries[i]), axis=1)
    return out


class VprTechnique(TransformerMixin, BaseEstimator):
    """Base class: dense exhaustive matching against fitted reference rows."""

    technique_id = "base"
    similarity = "cosine"

    def fit(self, reference_images, y=None):
        raise NotImplementedError

    def transform(self, images) -> np.ndarray:
        raise NotImplementedError

    def report_id(self) -> str:
        return self.technique_id

    def evaluable_query_indices(self, n_queries: int) -> np.ndarray:
        return np.arange(n_queries)

    def score_matrix(self, query_rows: np.ndarray, reference_rows: np.ndarray) -> np.ndarray:
        if self.similarity == "l1":
            return l1_score_matrix(query_rows, reference_rows)
        return cosine_score_matrix(query_rows, reference_rows)

    def pair_score(self, query_row, reference_row) -> float:
        """Confidence for one descriptor pair; the unit operation the timing
        harness measures."""
        q = np.asarray(query_row, dtype=np.float64).reshape(-1)
        r = np.asarray(reference_row, dtype=np.float64).reshape(-1)
        if self.similarity == "l1":
            return float(-np.sum(np.abs(q - r)))
        nq, nr = np.linalg.norm(q), np.linalg.norm(r)
        if nq <= NORM_EPS or nr <= NORM_EPS:
            return 0.0
        return float(np.dot(q, r) / (nq * nr))

    def match(self, query_images):
        """(query_indices, matched_references, confidences) for evaluable queries.

        Tie confidences resolve toward the smaller reference index.
        """
        check_is_fitted(self, "reference_descriptors_")
        rows = self.transform(query_images)
        scores = self.score_matrix(rows, self.reference_descriptors_)
        matched = np.argmax(scores, axis=1)
        confidences = scores[np.arange(scores.shape[0]), matched]
        return np.arange(rows.shape[0]), matched, confidences

    def predict(self, query_images) -> np.ndarray:
        """Best reference index per query; -1 marks non-evaluable queries."""
        n = len(list(query_images))
        out = np.full(n, -1, dtype=np.int64)
        q_idx, matched, _ = self.match(query_images)
        out[q_idx] = matched
        return out


class HogTechnique(VprTechnique):
    """Whole-image HOG descriptors compared with cosine similarity."""

    technique_id = "hog"

    def __init__(self, cell_size=8, block_size=16, bin_count=9, block_stride=8,
                 working_resolution=(128, 128)):
        self.cell_size = cell_size
        self.block_size = block_size
        self.bin_count = bin_count
        self.block_stride = block_stride
        self.working_resolution = working_resolution

    def _config(self) -> HogConfig:
        try:
            return HogConfig(
                cell_size=self.cell_size,
                block_size=self.block_size,
                bin_count=self.bin_count,
                block_stride=self.block_stride,
                working_resolution=tuple(self.working_resolution),
            )
        except ValueError as exc:
            raise ConfigError(f"bad HOG configuration: {exc}") from exc

    def transform(self, images) -> np.ndarray:
        cfg = self._config()
        return np.stack([hog_descriptor(img, cfg).values for img in as_image_list(images)])

    def fit(self, reference_images, y=None):
        self.reference_descriptors_ = self.transform(reference_images)
        return self


class SeqSlamTechnique(VprTechnique):
    """Patch-normalized frames matched by velocity-constrained sequence search.

    Queries with fewer than ``sequence_length`` frames of history are
    excluded from matching, never silently scored.
    """

    technique_id = "seqslam"

    def __init__(self, sequence_length=10, v_min=0.8, v_max=1.2, v_step=0.1,
                 downsample_resolution=(64, 32), patch_size=8, enhancement_window=10):
        self.sequence_length = sequence_length
        self.v_min = v_min
        self.v_max = v_max
        self.v_step = v_step
        self.downsample_resolution = downsample_resolution
        self.patch_size = patch_size
        self.enhancement_window = enhancement_window

    def _config(self) -> SeqSlamConfig:
        try:
            return SeqSlamConfig(
                sequence_length=self.sequence_length,
                v_min=self.v_min,
                v_max=self.v_max,
                v_step=self.v_step,
                downsample_resolution=tuple(self.downsample_resolution),
                patch_size=self.patch_size,
                enhancement_window=self.enhancement_window,
            )
        except ValueError as exc:
            raise ConfigError(f"bad Seq-SLAM configuration: {exc}") from exc

    def _normalized_grids(self, images, cfg: SeqSlamConfig) -> np.ndarray:
        grids = [
            sq.patch_normalize(resize_image(img, cfg.downsample_resolution), cfg)
            for img in as_image_list(images)
        ]
        return np.stack(grids)

    def transform(self, images) -> np.ndarray:
        """Flattened patch-normalized frames; Seq-SLAM's 'descriptor' is the
        preprocessed frame itself."""
        cfg = self._config()
        grids = self._normalized_grids(images, cfg)
        return grids.reshape(grids.shape[0], -1)

    def fit(self, reference_images, y=None):
        cfg = self._config()
        self.reference_grids_ = self._normalized_grids(reference_images, cfg)
        self.reference_descriptors_ = self.reference_grids_.reshape(
            self.reference_grids_.shape[0], -1
        )
        return self

    def evaluable_query_indices(self, n_queries: int) -> np.ndarray:
        ds = self._config().sequence_length
        return np.arange(ds - 1, n_queries)

    def pair_score(self, query_row, reference_row) -> float:
        q = np.asarray(query_row, dtype=np.float64).reshape(-1)
        r = np.asarray(reference_row, dtype=np.float64).reshape(-1)
        return float(-np.mean(np.abs(q - r)))

    def match(self, query_images):
        check_is_fitted(self, "reference_grids_")
        cfg = self._config()
        query_grids = self._normalized_grids(query_images, cfg)
        D = sq.difference_matrix(query_grids, self.reference_grids_, cfg)
        if cfg.enhancement_window > 0:
            D = sq.enhance_contrast(D, cfg.enhancement_window)
        q_indices = self.evaluable_query_indices(query_grids.shape[0])
        matched = np.empty(q_indices.size, dtype=np.int64)
        confidences = np.empty(q_indices.size)
        for pos, q in enumerate(q_indices):
            j, conf = sq.best_match(D, int(q), cfg)
            matched[pos] = j
            confidences[pos] = conf
        return q_indices, matched, confidences


class _AggregationTechnique(VprTechnique):
    """Shared fit/transform plumbing for the BoW and VLAD encoders."""

    mode = "bow"

    def _aggregation_config(self) -> AggregationConfig:
        try:
            return AggregationConfig(
                mode=self.mode,
                k=self.word_count,
                local_source=self.local_source,
                intra_normalize=getattr(self, "intra_normalize", True),
            )
        except ValueError as exc:
            raise ConfigError(f"bad {self.mode} configuration: {exc}") from exc

    def _locals_for(self, img):
        image = resize_image(img, tuple(self.working_resolution))
        return extract_local(
            image, self.local_source,
            cell_size=self.cell_size,
            patch_size=self.patch_size,
            patch_stride=self.patch_stride,
        )

    def _encode(self, locals_set, cfg: AggregationConfig) -> np.ndarray:
        if cfg.mode == "vlad":
            return vlad_encode(locals_set, self.vocabulary_, cfg).values
        return bow_encode(locals_set, self.vocabulary_).values

    def transform(self, images) -> np.ndarray:
        check_is_fitted(self, "vocabulary_")
        cfg = self._aggregation_config()
        return np.stack([self._encode(self._locals_for(img), cfg) for img in as_image_list(images)])

    def _training_pool(self, reference_images):
        """Locals to train on: an explicit corpus directory when configured,
        the reference traverse otherwise."""
        if self.vocabulary_corpus:
            corpus_dir = Path(self.vocabulary_corpus)
            names = sorted(
                p for p in corpus_dir.iterdir()
                if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS
            ) if corpus_dir.is_dir() else []
            if not names:
                raise ConfigError(f"vocabulary_corpus {self.vocabulary_corpus} has no images")
            images = [load_image_gray(p) for p in names]
        else:
            images = reference_images
        return np.concatenate([self._locals_for(img).descriptors for img in images])

    def fit(self, reference_images, y=None):
        cfg = self._aggregation_config()
        if cfg.local_source == "external_file":
            raise ConfigError("external locals enter through the external technique")
        images = as_image_list(reference_images)
        if self.vocabulary_file:
            self.vocabulary_ = load_vocabulary(self.vocabulary_file)
        else:
            self.vocabulary_ = train_vocabulary(
                self._training_pool(images), cfg.k, self.seed, source_tag=cfg.local_source
            )
        self.reference_descriptors_ = self.transform(images)
        return self


class BowTechnique(_AggregationTechnique):
    """Bag-of-visual-words histogram over a trained vocabulary.

    Word counts default to desk scale; paper-scale dictionaries (10k words)
    are a configuration choice, not a different code path.
    """

    technique_id = "bow"
    mode = "bow"

    def __init__(self, word_count=64, local_source="hog_cells", seed=0,
                 working_resolution=(128, 128), cell_size=8, patch_size=8,
                 patch_stride=8, vocabulary_file=None, vocabulary_corpus=None):
        self.word_count = word_count
        self.local_source = local_source
        self.seed = seed
        self.working_resolution = working_resolution
        self.cell_size = cell_size
        self.patch_size = patch_size
        self.patch_stride = patch_stride
        self.vocabulary_file = vocabulary_file
        self.vocabulary_corpus = vocabulary_corpus


class VladTechnique(_AggregationTechnique):
    """Per-word residual aggregation (VLAD) over a trained vocabulary."""

    technique_id = "vlad"
    mode = "vlad"

    def __init__(self, word_count=16, local_source="hog_cells", seed=0,
                 working_resolution=(128, 128), cell_size=8, patch_size=8,
                 patch_stride=8, vocabulary_file=None, vocabulary_corpus=None,
                 intra_normalize=True):
        self.word_count = word_count
        self.local_source = local_source
        self.seed = seed
        self.working_resolution = working_resolution
        self.cell_size = cell_size
        self.patch_size = patch_size
        self.patch_stride = patch_stride
        self.vocabulary_file = vocabulary_file
        self.vocabulary_corpus = vocabulary_corpus
        self.intra_normalize = intra_normalize


class ExternalTechnique(VprTechnique):
    """Precomputed descriptors ingested from harness-format files.

    Rows align with dataset images by order; counts are validated against the
    dataset. Encoding has no compute cost here, so the reported encoding time
    reflects retrieval only.
    """

    technique_id = "external"

    def __init__(self, query_file=None, reference_file=None, similarity="cosine"):
        self.query_file = query_file
        self.reference_file = reference_file
        self.similarity = similarity

    def _read(self, path, role: str, expected_count: int):
        if not path:
            raise ConfigError(f"external technique requires a {role} descriptor file")
        try:
            parsed = read_descriptor_file(path)
        except FileNotFoundError as exc:
            raise TechniqueError(f"{role} descriptor file not found: {path}") from exc
        except VprBenchError:
            raise
        except OSError as exc:
            raise TechniqueError(f"cannot read {role} descriptor file {path}: {exc}") from exc
        if parsed.count != expected_count:
            raise TechniqueError(
                f"{role} descriptor file {path} has {parsed.count} rows for "
                f"{expected_count} images"
            )
        return parsed

    def fit(self, reference_images, y=None):
        if self.similarity not in ("cosine", "l1"):
            raise ConfigError(f"unknown similarity {self.similarity!r} (use cosine or l1)")
        parsed = self._read(self.reference_file, "reference", len(list(reference_images)))
        self.technique_id_ = parsed.technique_id
        self.reference_descriptors_ = parsed.rows.astype(np.float64)
        return self

    def report_id(self) -> str:
        return getattr(self, "technique_id_", self.technique_id)

    def transform(self, images) -> np.ndarray:
        check_is_fitted(self, "reference_descriptors_")
        parsed = self._read(self.query_file, "query", len(list(images)))
        if parsed.dim != self.reference_descriptors_.shape[1]:
            raise TechniqueError(
                f"query rows have dim {parsed.dim}, reference rows "
                f"{self.reference_descriptors_.shape[1]}"
            )
        return parsed.rows.astype(np.float64)

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X).reference_descriptors_


TECHNIQUES: dict[str, type[VprTechnique]] = {
    "hog": HogTechnique,
    "seqslam": SeqSlamTechnique,
    "bow": BowTechnique,
    "vlad": VladTechnique,
    "external": ExternalTechnique,
}
