"""vprbench: a benchmark harness for visual place recognition.

Evaluates techniques under three standardized metrics: area under the
precision-recall curve, matching time (encoding + per-pair descriptor
comparison), and descriptor memory footprint. Ships native HOG, Seq-SLAM,
BoW, and VLAD implementations plus a binary file interface for ingesting
externally computed descriptors.
"""

from .aggregation import (
    AggregationConfig,
    Vocabulary,
    bow_encode,
    extract_local,
    load_vocabulary,
    save_vocabulary,
    train_vocabulary,
    vlad_encode,
)
from .core import (
    DescriptorVector,
    ImageGray,
    LocalDescriptorSet,
    cosine_similarity,
    l1_distance,
    l2_normalize,
    resize_image,
)
from .dataset import (
    DatasetBundle,
    GroundTruth,
    correct_set,
    load_dataset,
    make_synthetic_dataset,
    write_dataset,
)
from .descriptor_io import (
    DescriptorFile,
    footprint_bytes,
    read_descriptor_file,
    write_descriptor_file,
)
from .hog import HogConfig, cell_histograms, gradients, hog_descriptor
from .metrics import (
    EvaluationResult,
    PRCurve,
    QueryOutcome,
    auc_trapezoid,
    measure_encoding_time,
    measure_pair_match_time,
    pr_curve,
    total_match_time,
)
from .runner import RunConfig, build_technique, compare_results, emit_report, run_evaluation
from .seqslam import (
    DifferenceMatrix,
    SeqSlamConfig,
    best_match,
    difference_matrix,
    enhance_contrast,
    patch_normalize,
    sequence_score,
)
from .techniques import (
    TECHNIQUES,
    BowTechnique,
    ExternalTechnique,
    HogTechnique,
    SeqSlamTechnique,
    VladTechnique,
    VprTechnique,
)

__version__ = "0.1.0"

__all__ = [
    "AggregationConfig", "Vocabulary", "bow_encode", "extract_local",
    "load_vocabulary", "save_vocabulary", "train_vocabulary", "vlad_encode",
    "DescriptorVector", "ImageGray", "LocalDescriptorSet",
    "cosine_similarity", "l1_distance", "l2_normalize", "resize_image",
    "DatasetBundle", "GroundTruth", "correct_set", "load_dataset",
    "make_synthetic_dataset", "write_dataset",
    "DescriptorFile", "footprint_bytes", "read_descriptor_file", "write_descriptor_file",
    "HogConfig", "cell_histograms", "gradients", "hog_descriptor",
    "EvaluationResult", "PRCurve", "QueryOutcome", "auc_trapezoid",
    "measure_encoding_time", "measure_pair_match_time", "pr_curve", "total_match_time",
    "RunConfig", "build_technique", "compare_results", "emit_report", "run_evaluation",
    "DifferenceMatrix", "SeqSlamConfig", "best_match", "difference_matrix",
    "enhance_contrast", "patch_normalize", "sequence_score",
    "TECHNIQUES", "BowTechnique", "ExternalTechnique", "HogTechnique",
    "SeqSlamTechnique", "VladTechnique", "VprTechnique",
    "__version__",
]
