"""Exception taxonomy for the benchmark harness.

The three top-level branches map onto CLI exit codes: ConfigError -> 2,
DatasetError -> 3, TechniqueError -> 4.
"""

from __future__ import annotations


class VprBenchError(Exception):
    """Base class for all harness errors."""


class ConfigError(VprBenchError):
    """Invalid run configuration (unknown keys, bad values, missing files)."""


class DatasetError(VprBenchError):
    """Dataset cannot be loaded or violates its contract."""


class TechniqueError(VprBenchError):
    """A technique cannot encode or match with the given inputs."""


class IoFailure(VprBenchError):
    """Report or descriptor artifacts could not be written."""


# -- core ---------------------------------------------------------------

class ZeroVectorError(TechniqueError):
    """Cosine similarity requested for a vector with (near-)zero norm."""


class DimensionMismatchError(TechniqueError):
    """Two vectors or vector sets do not share a common dimension."""


# -- dataset ------------------------------------------------------------

class MissingDirectoryError(DatasetError):
    """A required query/reference directory is absent or empty."""


class MalformedGroundTruthError(DatasetError):
    """Ground-truth table has bad rows, bad indices, or missing queries."""


class UnreadableImageError(DatasetError):
    """An image file exists but cannot be decoded; message names the file."""


class UnknownQueryError(DatasetError):
    """Query index has no ground-truth row."""


class InvalidPerturbationError(DatasetError):
    """Synthetic-dataset perturbation spec cannot be parsed."""


# -- techniques ---------------------------------------------------------

class ConfigImageMismatchError(TechniqueError):
    """Image geometry is incompatible with the technique configuration."""


class EmptySequenceError(TechniqueError):
    """Difference matrix requested for an empty frame sequence."""


class InsufficientHistoryError(TechniqueError):
    """Sequence matching asked for a query with too little history."""


class TooFewSamplesError(TechniqueError):
    """Vocabulary training pool is smaller than the word count."""


class EmptyOutcomesError(TechniqueError):
    """PR curve requested for an empty outcome list."""


# -- descriptor files ---------------------------------------------------

class DescriptorFileError(TechniqueError):
    """Base class for descriptor-file format violations."""


class BadMagicError(DescriptorFileError):
    """File does not start with the descriptor-file magic."""


class UnsupportedVersionError(DescriptorFileError):
    """Descriptor file declares a version this reader does not speak."""


class TruncatedPayloadError(DescriptorFileError):
    """File ends before the declared header/manifest/payload bytes."""


class NonFiniteValueError(DescriptorFileError):
    """A descriptor row holds NaN or Inf; message reports the row index."""
