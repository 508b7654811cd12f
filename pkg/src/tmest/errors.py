"""Exception types shared across the toolkit."""


class TmestError(Exception):
    """Base class for all toolkit errors."""


class UnreachablePair(TmestError):
    """An OD pair in the support set has no directed path."""

    def __init__(self, src: str, dst: str):
        self.pair = (src, dst)
        super().__init__(f"no directed path from {src!r} to {dst!r}")


class UnknownPair(TmestError):
    """A demand file references an OD pair outside the support set."""


class DimensionMismatch(TmestError):
    """Vector/matrix shapes do not agree."""


class ZeroRow(TmestError):
    """A routing matrix row has no nonzero entries."""


class ZeroLoadNorm(TmestError):
    """Relative residual is undefined: zero load vector with nonzero residual."""


class QuadratureFailure(TmestError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class InsufficientData(TmestError):
    """Too few positive demands to fit a distribution."""


class DegenerateSample(TmestError):
    """All normalized demands equal the maximum; exponent is unidentifiable."""


class DegenerateCandidate(TmestError):
    """A candidate demand vector maps to zero loads; scale is unidentifiable."""


class MalformedWeights(TmestError):
    """Generator weight file is structurally invalid."""


class ZeroTruth(TmestError):
    """NMAE is undefined: the masked true demands sum to zero."""


class EmptyMask(TmestError):
    """A metric mask selects no entries."""
