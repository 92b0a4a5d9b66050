"""Exception types raised by constructors, validators, and search routines."""


class RegracutError(ValueError):
    """Base class for every package-specific error."""


# ---- graph and partition construction ----

class MissingPair(RegracutError):
    """A pair of distinct vertices was left without a color/state."""


class DuplicatePair(RegracutError):
    """The same unordered pair was assigned twice."""


class ColorOutOfRange(RegracutError):
    """A color fell outside 1..r."""


class BadState(RegracutError):
    """An arrow state token was not one of none/bi/fwd/back."""


class BadOrder(RegracutError):
    """Requested partition order is not in 1..n."""


class RefinementTooFine(RegracutError):
    """Split factor exceeds the smallest block."""


class BadDistribution(RegracutError):
    """Probabilities are negative, do not normalize, or break a palette restriction."""


class BadPartition(RegracutError):
    """Blocks do not form the expected partition of the vertex set."""


# ---- density and counting checks ----

class OverlappingSets(RegracutError):
    """Vertex sets that must be disjoint are not."""


class EmptySet(RegracutError):
    """A vertex set that must be nonempty is empty."""


class TooLargeForExhaustive(RegracutError):
    """Set too large for exact subset enumeration."""


class BadM(RegracutError):
    """Split point m outside 1..n-1."""


class UnequalSubBlocks(RegracutError):
    """Sub-blocks are required to be of equal size."""


# ---- decomposition ----

class GraphTooSmall(RegracutError):
    """Too few vertices for the requested partition order."""


class SliceTooSmall(RegracutError):
    """Slice fraction falls below the pair's regularity parameter."""


# ---- embedding ----

class BadEta(RegracutError):
    """Density threshold outside (0, 1)."""


class ArityMismatch(RegracutError):
    """Number of parts does not match the pattern's vertex count."""


# ---- types and edit distance ----

class KindMismatch(RegracutError):
    """Mixed colored-graph and digraph objects where one kind is required."""


class EmptyLabel(RegracutError):
    """A type label that must be nonempty is empty."""


class FullSelfLabel(RegracutError):
    """A self-label equals the whole color set / palette."""


class SymmetryViolation(RegracutError):
    """Colored-graph type labels disagree between the two pair orders."""


class ArrowClosureViolation(RegracutError):
    """Dir-type labels break the arrow-reversal closure between pair orders."""


class SearchSpaceTooLarge(RegracutError):
    """Label enumeration would exceed the configured candidate cap."""


class DimensionMismatch(RegracutError):
    """Probability vector length does not match the type's color count."""


class SizeMismatch(RegracutError):
    """Graphs compared for edit distance have different vertex counts."""


class TooLargeForExact(RegracutError):
    """Too many vertices for exact distance search."""


class EmptyFamily(RegracutError):
    """An operation requires at least one forbidden pattern or one type."""
