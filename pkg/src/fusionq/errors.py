"""Exception types shared across the package."""


class FusionqError(Exception):
    """Base class for all package errors."""


class VanishingQuantumFactorial(FusionqError):
    """[j]_q vanished inside a quantum factorial (k >= ell)."""


class AlcoveViolation(FusionqError):
    """A weight required to lie in the open alcove does not."""


class RankDeficiency(FusionqError):
    """Numerical rank determination was ambiguous at the configured gap."""


class NotCompletelyReducible(FusionqError):
    """Generated submodules fail to span; a precondition was violated."""


class WeightAbsent(FusionqError):
    """Requested weight does not occur in a decomposition."""


class PositivityFailure(FusionqError):
    """A Gram form that must be positive definite has a small eigenvalue."""


class BranchCollision(FusionqError):
    """Two admissible square-root exponents collide on one eigenspace.

    Raised by the spectral construction of the unitarized coboundary on
    full tensor powers; callers fall back to the block-wise route.
    """


class LevelsUnavailable(FusionqError):
    """A section or check needs truncated levels that were not built."""


class ConjugateMissing(FusionqError):
    """Conjugate-weight block data is absent."""


class MemoryBudget(FusionqError):
    """An enumeration exceeded the configured memory budget."""


class DegreeOverflow(FusionqError):
    """A Haar pairing was requested above the filtration degree m-tilde."""


class VanishingNormalizer(FusionqError):
    """A normalizing quantum factorial vanishes; idempotent undefined."""
