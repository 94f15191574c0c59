"""Exception types shared across the package."""


class ArbsampleError(Exception):
    """Base class for all structured errors raised by this package."""


class GraphFormatError(ArbsampleError):
    """Input file or graph description could not be parsed."""


class InvalidGraphError(ArbsampleError):
    """Graph violates a structural precondition (bad ids, nonpositive weight, ...)."""


class UnreachableVertexError(ArbsampleError):
    """Some vertex cannot take part in a walk to/from the chosen root."""


class CoverageFailureError(ArbsampleError):
    """The expanded transcript failed to certify first visits after all retries."""


class TooLargeError(ArbsampleError):
    """Instance exceeds the size guard of an exact/brute-force operation."""


class SingularSystemError(ArbsampleError):
    """A linear system backing a walk quantity is singular (graph not strongly connected)."""


class TrappedClusterError(ArbsampleError):
    """Some vertex of a cluster can never reach the cluster boundary."""


class ZeroConditioningError(ArbsampleError):
    """Conditioning event has probability zero from the requested start vertex."""


class NoCycleError(ArbsampleError):
    """No cycle above the weight floor exists through the requested edge."""


class UnknownTreeError(ArbsampleError):
    """A sampled arborescence is absent from the exact catalog (sampler bug)."""
