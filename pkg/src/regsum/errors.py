"""Exception hierarchy shared across the toolkit.

Everything derives from RegsumError so callers (CLI, HTTP service) can map
data errors to exit codes / status codes in one place.
"""


class RegsumError(Exception):
    """Base class for all toolkit errors."""


# grid
class InvalidDecomposition(RegsumError):
    """Region counts incompatible with the grid dimensions."""


class OutOfBounds(RegsumError):
    """Cell index outside the grid."""


# histogram
class EmptyStats(RegsumError):
    """Bin selection requested for a variable with zero samples."""


class MissingQuartiles(RegsumError):
    """Freedman-Diaconis requested but quartiles were not retained."""


class EdgesMismatch(RegsumError):
    """Histograms cannot be combined exactly: edges/axes differ."""


class EmptyHistogram(RegsumError):
    """Operation undefined on a histogram with zero sample mass."""


class InvalidRange(RegsumError):
    """Query range with lo > hi."""


class EmptySearchWindow(RegsumError):
    """No bin center falls inside the requested search window."""


class Incompatible(RegsumError):
    """Histograms with different dimensionality or variables."""


class EmptyInput(RegsumError):
    """An operation over a collection received an empty collection."""


# summarizer
class BlockMisaligned(RegsumError):
    """A region straddles a block boundary."""


class IncompleteTiling(RegsumError):
    """Blocks overlap or leave gaps in the grid."""


class UnknownVariable(RegsumError):
    """Variable name or id not present in the dataset."""


# particles / store / query
class UnknownRegion(RegsumError):
    """Region id outside the decomposition."""


class UnknownTimestep(RegsumError):
    """Timestep index outside the stored range."""


class UnknownConfig(RegsumError):
    """PDF-config index outside the stored range."""


class BadMagic(RegsumError):
    """File does not start with the expected magic bytes."""


class UnsupportedVersion(RegsumError):
    """File version not handled by this reader."""


class TruncatedFile(RegsumError):
    """File ends before a declared section."""


class ChecksumMismatch(RegsumError):
    """Stored checksum does not match the payload."""


class EmptySelection(RegsumError):
    """Merge requested over an empty region selection."""


class IndexOutOfRange(RegsumError):
    """Slice index outside the region decomposition."""


class InvalidSpec(RegsumError):
    """Synthetic-data spec violates its invariants."""
