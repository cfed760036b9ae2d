"""Dataset loading, ground-truth windows, and synthetic desk-scale data.

A dataset on disk is a directory tree::

    <root>/query/*.png|jpg      query traverse, filename-sorted
    <root>/reference/*.png|jpg  reference traverse, filename-sorted
    <root>/manifest             keys: name, window_radius, ground_truth_file

The ground-truth file is comma-separated text, one `query_index,reference_index`
row per query, zero-based. Every query must have a row: the recall denominator
assumes each query has a true match in the reference set.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .core import ImageGray, LUMA_WEIGHTS
from .exceptions import (
    DatasetError,
    InvalidPerturbationError,
    MalformedGroundTruthError,
    MissingDirectoryError,
    UnknownQueryError,
    UnreadableImageError,
)
from .keyvalue import format_keyvalue, parse_keyvalue

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg"}

#: Synthetic scenes live inside this intensity band so brightness offsets up
#: to +-0.2 never clip at the [0,1] bounds.
SCENE_BAND = (0.3, 0.7)


@dataclass(frozen=True)
class GroundTruth:
    """Query -> reference correspondence with a tolerance window.

    For a query whose true match is reference n, every index in
    {n-w .. n+w} clipped to [0, R-1] counts as correct.
    """

    pairs: tuple[tuple[int, int], ...]
    window_radius: int
    reference_count: int
    _by_query: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.window_radius < 0:
            raise ValueError("window_radius must be >= 0")
        if self.reference_count < 1:
            raise ValueError("reference_count must be >= 1")
        by_query: dict[int, int] = {}
        for q, n in self.pairs:
            if q < 0:
                raise ValueError(f"query index {q} is negative")
            if q in by_query:
                raise ValueError(f"duplicate ground-truth row for query {q}")
            if not 0 <= n < self.reference_count:
                raise ValueError(
                    f"reference index {n} out of range [0, {self.reference_count - 1}]"
                )
            by_query[q] = n
        object.__setattr__(self, "pairs", tuple((int(q), int(n)) for q, n in self.pairs))
        object.__setattr__(self, "_by_query", by_query)

    def true_match(self, query_index: int) -> int:
        if query_index not in self._by_query:
            raise UnknownQueryError(f"no ground-truth row for query {query_index}")
        return self._by_query[query_index]

    def correct_set(self, query_index: int) -> set[int]:
        return correct_set(self, query_index)


def correct_set(gt: GroundTruth, query_index: int) -> set[int]:
    """References accepted as correct for a query: {n-w .. n+w} clipped to range."""
    n = gt.true_match(query_index)
    w = gt.window_radius
    lo = max(0, n - w)
    hi = min(gt.reference_count - 1, n + w)
    return set(range(lo, hi + 1))


@dataclass(frozen=True)
class DatasetBundle:
    """Paired query/reference image sequences plus ground truth."""

    name: str
    query_images: tuple[ImageGray, ...]
    reference_images: tuple[ImageGray, ...]
    ground_truth: GroundTruth
    query_names: tuple[str, ...] = ()
    reference_names: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "query_images", tuple(self.query_images))
        object.__setattr__(self, "reference_images", tuple(self.reference_images))
        object.__setattr__(self, "query_names", tuple(self.query_names))
        object.__setattr__(self, "reference_names", tuple(self.reference_names))
        if self.ground_truth.reference_count != len(self.reference_images):
            raise ValueError(
                f"ground truth declares R={self.ground_truth.reference_count} but "
                f"{len(self.reference_images)} reference images are present"
            )
        for q, _ in self.ground_truth.pairs:
            if q >= len(self.query_images):
                raise ValueError(f"ground-truth query index {q} has no query image")


def load_image_gray(path) -> ImageGray:
    """Load one image file, convert to grayscale (luma weights), scale to [0,1]."""
    path = Path(path)
    try:
        with Image.open(path) as pil:
            mode = pil.mode
            if mode == "L":
                a = np.asarray(pil, dtype=np.float64) / 255.0
            elif mode in ("I;16", "I;16L", "I;16B"):
                a = np.asarray(pil, dtype=np.float64) / 65535.0
            elif mode == "F":
                a = np.clip(np.asarray(pil, dtype=np.float64), 0.0, 1.0)
            else:
                rgb = np.asarray(pil.convert("RGB"), dtype=np.float64) / 255.0
                a = rgb @ LUMA_WEIGHTS
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise UnreadableImageError(f"cannot decode image {path}: {exc}") from exc
    return ImageGray(np.clip(a, 0.0, 1.0))


def _load_image_dir(directory: Path) -> tuple[tuple[ImageGray, ...], tuple[str, ...]]:
    if not directory.is_dir():
        raise MissingDirectoryError(f"missing image directory {directory}")
    names = sorted(
        p.name for p in directory.iterdir()
        if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS
    )
    if not names:
        raise MissingDirectoryError(f"no images found in {directory}")
    images = tuple(load_image_gray(directory / name) for name in names)
    return images, tuple(names)


def _parse_ground_truth_file(path: Path, query_count: int, reference_count: int):
    if not path.is_file():
        raise MalformedGroundTruthError(f"ground-truth file {path} does not exist")
    pairs = []
    for lineno, raw in enumerate(path.read_text(encoding="ascii").splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        cols = line.split(",")
        if len(cols) != 2:
            raise MalformedGroundTruthError(
                f"{path}:{lineno}: expected 2 columns, got {len(cols)}"
            )
        try:
            q, n = int(cols[0]), int(cols[1])
        except ValueError as exc:
            raise MalformedGroundTruthError(f"{path}:{lineno}: non-integer index") from exc
        if not 0 <= q < query_count:
            raise MalformedGroundTruthError(
                f"{path}:{lineno}: query index {q} out of range [0, {query_count - 1}]"
            )
        if not 0 <= n < reference_count:
            raise MalformedGroundTruthError(
                f"{path}:{lineno}: reference index {n} out of range [0, {reference_count - 1}]"
            )
        pairs.append((q, n))
    seen = {q for q, _ in pairs}
    if len(seen) != len(pairs):
        raise MalformedGroundTruthError(f"{path}: duplicate query rows")
    if len(pairs) != query_count:
        raise MalformedGroundTruthError(
            f"{path}: {len(pairs)} rows for {query_count} query images; "
            "every query needs exactly one ground-truth row"
        )
    return tuple(pairs)


def load_dataset(root_path, manifest=None) -> DatasetBundle:
    """Load a dataset tree into an immutable bundle.

    Images are loaded in filename-sorted order at native resolution; resizing
    is a per-technique concern, not a dataset property.
    """
    root = Path(root_path)
    manifest_path = Path(manifest) if manifest is not None else root / "manifest"
    if not manifest_path.is_file():
        raise DatasetError(f"missing manifest file {manifest_path}")
    try:
        top, _ = parse_keyvalue(manifest_path.read_text())
    except ValueError as exc:
        raise DatasetError(f"bad manifest {manifest_path}: {exc}") from exc
    for key in ("name", "window_radius", "ground_truth_file"):
        if key not in top:
            raise DatasetError(f"manifest {manifest_path} is missing key {key!r}")
    try:
        window_radius = int(top["window_radius"])
    except ValueError as exc:
        raise DatasetError(f"manifest window_radius must be an integer") from exc
    if window_radius < 0:
        raise DatasetError("manifest window_radius must be >= 0")

    query_images, query_names = _load_image_dir(root / "query")
    reference_images, reference_names = _load_image_dir(root / "reference")
    pairs = _parse_ground_truth_file(
        root / top["ground_truth_file"], len(query_images), len(reference_images)
    )
    gt = GroundTruth(pairs, window_radius, len(reference_images))
    return DatasetBundle(
        name=top["name"],
        query_images=query_images,
        reference_images=reference_images,
        ground_truth=gt,
        query_names=query_names,
        reference_names=reference_names,
    )


# -- synthetic data -------------------------------------------------------

@dataclass(frozen=True)
class Perturbation:
    kind: str
    amount: float = 0.0


_PERTURBATION_RE = re.compile(r"^(identity|brightness|shift|noise)(?:[:+](.+))?$")


def parse_perturbation(spec) -> Perturbation:
    """Parse 'identity', 'brightness:0.2', 'shift:8', or 'noise:0.05'."""
    if isinstance(spec, Perturbation):
        return spec
    m = _PERTURBATION_RE.match(str(spec).strip())
    if not m:
        raise InvalidPerturbationError(f"unknown perturbation spec {spec!r}")
    kind, amount_text = m.group(1), m.group(2)
    if kind == "identity":
        if amount_text is not None:
            raise InvalidPerturbationError("identity perturbation takes no amount")
        return Perturbation("identity")
    if amount_text is None:
        raise InvalidPerturbationError(f"{kind} perturbation needs an amount")
    try:
        amount = float(amount_text)
    except ValueError as exc:
        raise InvalidPerturbationError(f"bad perturbation amount {amount_text!r}") from exc
    if kind == "shift":
        if amount != int(amount) or amount < 0:
            raise InvalidPerturbationError("shift amount must be a non-negative integer")
    elif kind == "brightness":
        if not 0.0 <= amount <= 0.25:
            raise InvalidPerturbationError("brightness amount must be in [0, 0.25]")
    elif kind == "noise":
        if amount < 0:
            raise InvalidPerturbationError("noise sigma must be >= 0")
    return Perturbation(kind, amount)


def _bilinear_upsample(grid: np.ndarray, width: int, height: int) -> np.ndarray:
    ys = np.linspace(0, grid.shape[0] - 1, height)
    xs = np.linspace(0, grid.shape[1] - 1, width)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, grid.shape[0] - 1)
    x1 = np.minimum(x0 + 1, grid.shape[1] - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    top = grid[np.ix_(y0, x0)] * (1 - fx) + grid[np.ix_(y0, x1)] * fx
    bot = grid[np.ix_(y1, x0)] * (1 - fx) + grid[np.ix_(y1, x1)] * fx
    return top * (1 - fy) + bot * fy


def _make_scene(rng: np.random.Generator, width: int, height: int) -> np.ndarray:
    """One procedurally textured scene in [0,1]: low-frequency field + rectangles."""
    field = _bilinear_upsample(rng.uniform(0.0, 1.0, size=(6, 6)), width, height)
    scene = field
    for _ in range(10):
        x0 = int(rng.integers(0, max(1, width - 4)))
        y0 = int(rng.integers(0, max(1, height - 4)))
        w = int(rng.integers(3, max(4, width // 3)))
        h = int(rng.integers(3, max(4, height // 3)))
        scene[y0:y0 + h, x0:x0 + w] = rng.uniform(0.0, 1.0)
    return scene


def make_synthetic_dataset(
    frame_count: int,
    perturbation,
    seed: int,
    frame_size: tuple[int, int] = (128, 96),
    window_radius: int = 2,
) -> DatasetBundle:
    """Procedural traverse pair with identity ground truth.

    Reference frames are textured scenes; query frames are the same scenes
    under the declared perturbation. Deterministic given the seed.
    """
    if frame_count < 20:
        raise DatasetError("synthetic datasets need at least 20 frames")
    pert = parse_perturbation(perturbation)
    width, height = int(frame_size[0]), int(frame_size[1])
    shift = int(pert.amount) if pert.kind == "shift" else 0
    if shift >= width:
        raise InvalidPerturbationError(f"shift {shift} exceeds frame width {width}")
    rng = np.random.default_rng(seed)
    lo, hi = SCENE_BAND

    references = []
    queries = []
    for _ in range(frame_count):
        master = _make_scene(rng, width + shift, height)
        master = lo + (hi - lo) * master
        ref = master[:, :width]
        if pert.kind == "identity":
            query = ref.copy()
        elif pert.kind == "shift":
            query = master[:, shift:shift + width]
        elif pert.kind == "brightness":
            query = ref + rng.uniform(-pert.amount, pert.amount)
        else:  # noise
            query = ref + rng.normal(0.0, pert.amount, size=ref.shape)
        references.append(ImageGray(ref))
        queries.append(ImageGray(np.clip(query, 0.0, 1.0)))

    gt = GroundTruth(
        pairs=tuple((i, i) for i in range(frame_count)),
        window_radius=window_radius,
        reference_count=frame_count,
    )
    label = pert.kind if pert.kind == "identity" else f"{pert.kind}-{pert.amount:g}"
    names = tuple(f"{i:06d}.png" for i in range(frame_count))
    return DatasetBundle(
        name=f"synthetic-{label}",
        query_images=tuple(queries),
        reference_images=tuple(references),
        ground_truth=gt,
        query_names=names,
        reference_names=names,
    )


def write_dataset(bundle: DatasetBundle, out_dir) -> Path:
    """Write a bundle as the on-disk layout load_dataset understands (8-bit PNG)."""
    out = Path(out_dir)
    (out / "query").mkdir(parents=True, exist_ok=True)
    (out / "reference").mkdir(parents=True, exist_ok=True)
    for sub, images in (("query", bundle.query_images), ("reference", bundle.reference_images)):
        for i, img in enumerate(images):
            data = np.round(img.pixels * 255.0).astype(np.uint8)
            Image.fromarray(data, mode="L").save(out / sub / f"{i:06d}.png")
    gt_lines = "".join(f"{q},{n}\n" for q, n in bundle.ground_truth.pairs)
    (out / "ground_truth.csv").write_text(gt_lines, encoding="ascii")
    (out / "manifest").write_text(
        format_keyvalue(
            {
                "name": bundle.name,
                "window_radius": bundle.ground_truth.window_radius,
                "ground_truth_file": "ground_truth.csv",
            }
        )
    )
    return out
