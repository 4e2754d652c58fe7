"""Exception types shared across the package."""


class MdagError(Exception):
    """Base class for all errors raised by this library."""


class CyclicGraphError(MdagError):
    """The directed part of a graph contains a cycle."""


class FixedVertexHasParentError(MdagError):
    """A fixed (conditioning) vertex was given an incoming directed edge."""


class BidirectedEdgeTooSmallError(MdagError):
    """A bidirected edge has fewer than two members."""


class BidirectedEdgeNotMaximalError(MdagError):
    """A bidirected edge is contained in another one (strict mode only)."""


class UnknownVertexError(MdagError):
    """An edge or query refers to a vertex the graph does not contain."""


class CardinalityBelowTwoError(MdagError):
    """Every variable needs at least two states."""


class VertexHasChildrenError(MdagError):
    """Attempted to marginalize a vertex that still has children."""


class NotBidirectedConnectedError(MdagError):
    """The given vertex set is not bidirected-connected."""


class SearchBudgetExceededError(MdagError):
    """An exhaustive search was refused because the instance is too large."""


class TooManyEdgesError(MdagError):
    """Brute-force ordering search refused: too many bidirected edges."""


class NotGearedError(MdagError):
    """The graph admits no running-intersection ordering of its bidirected edges."""


class ShapeMismatchError(MdagError):
    """Axes, scopes or table shapes do not line up."""


class EnumerationBudgetExceededError(MdagError):
    """Exact enumeration would exceed the configured assignment budget."""


class NotDegenerateError(MdagError):
    """A table that must sum to zero along each of its axes does not."""


class BadPartitionError(MdagError):
    """The symmetric difference of the given parts does not match the target scope."""


class BadScopesError(MdagError):
    """Scope preconditions of a degenerate-function construction are violated."""


class ZeroProbabilityError(MdagError):
    """A strictly positive distribution is required here."""


class NotADistrictError(MdagError):
    """The given set is not a district of the graph."""


class ParseError(MdagError):
    """A graph or kernel document could not be parsed."""
