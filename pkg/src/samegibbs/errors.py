"""Exception types shared across the package.

``ValidationError`` subclasses signal bad caller input (CLI exit code 2);
other ``SamGibbsError`` subclasses signal runtime failures (exit code 3).
"""


class SamGibbsError(Exception):
    """Base class for all package errors."""


class ValidationError(SamGibbsError):
    """Invalid structure, file content, or arguments supplied by the caller."""


class CycleDetected(ValidationError):
    """The directed edge set admits no topological order."""


class InvalidIndex(ValidationError):
    """A variable index is outside [0, num_vars)."""


class DuplicateEdge(ValidationError):
    """The same directed edge was given more than once."""


class CardinalityTooSmall(ValidationError):
    """A variable was declared with fewer than two states."""


class DimensionMismatch(ValidationError):
    """Data and network disagree on the number of variables."""


class ShapeMismatch(ValidationError):
    """Two table sets are not congruent in shape."""


class EmptyData(ValidationError):
    """A data matrix with zero cases was supplied where cases are required."""


class DegenerateLabels(ValidationError):
    """A classification metric received single-class labels."""


class ParseError(ValidationError):
    """A network, CPT, or data file could not be parsed."""


class ZeroSupport(SamGibbsError):
    """All unnormalized full-conditional weights are zero.

    Signals a prior or CPT with hard zeros inconsistent with the data.
    """


class EmptyTrace(SamGibbsError):
    """A throughput summary was requested for a trace with no records."""


class IoError(SamGibbsError):
    """A required file could not be read or written."""
