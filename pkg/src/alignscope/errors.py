"""Exception hierarchy shared across the toolkit.

Every domain failure derives from :class:`AnalysisError` so the CLI can map
any of them to exit code 1 while usage mistakes stay at exit code 2.
"""

from __future__ import annotations


class AnalysisError(Exception):
    """Base class for all domain errors raised by this package."""


# --- activation container -------------------------------------------------

class MissingFile(AnalysisError):
    """A manifest or payload file does not exist or is unreadable."""


class SchemaViolation(AnalysisError):
    """Manifest JSON is malformed: missing field, wrong type, duplicate id."""


class SizeMismatch(AnalysisError):
    """Payload byte length disagrees with (L+1)*T*d*4."""


class UnknownSample(AnalysisError):
    """Requested sample id or modality is not present in the manifest."""


class NonFiniteValue(AnalysisError):
    """Decoded payload contains NaN or Inf."""


class ShapeMismatch(AnalysisError):
    """Layer matrices passed for writing do not share one T x d shape."""


class IoFailure(AnalysisError):
    """Filesystem write failed."""


# --- kernels ----------------------------------------------------------------

class ZeroVector(AnalysisError):
    """Cosine or projection asked to operate on a zero-norm vector."""


class DimensionMismatch(AnalysisError):
    """Operands do not share vector dimension d."""


class EmptyMatrix(AnalysisError):
    """Pooling over a matrix with zero rows."""


# --- aggregation / statistics -------------------------------------------

class EmptySet(AnalysisError):
    """Corpus-level operation invoked on a set with no samples."""


class DegenerateInput(AnalysisError):
    """Rank statistic undefined: constant index sequence or length < 2."""


class LengthMismatch(AnalysisError):
    """Two alignment paths being compared differ in token count."""


# --- regression ----------------------------------------------------------

class DegenerateX(AnalysisError):
    """Least squares with zero predictor variance."""


class DegenerateY(AnalysisError):
    """Response has zero variance, so R squared is undefined."""


class InsufficientOverlap(AnalysisError):
    """Fewer than two checkpoints shared between predictors and scores."""


# --- intervention / fixtures ----------------------------------------------

class IndexOutOfRange(AnalysisError):
    """Intervention plan references a row outside the stored matrices."""


class InvalidSpec(AnalysisError):
    """Fixture specification violates its own constraints."""
