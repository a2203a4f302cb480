"""Exception types shared across the package."""


class CollarLabError(Exception):
    """Base class for all collarlab errors."""


class SkeletonPoint(CollarLabError):
    """Nearest boundary point is not unique within tolerance."""


class OutsideNeighborhood(CollarLabError):
    """Point lies outside the requested boundary collar."""


class NormalUndefinedAtCorner(CollarLabError):
    """Outer normal requested at a polygon vertex, where it is set-valued."""


class EpsTooLarge(CollarLabError):
    """Collar width must stay below the inradius of the body."""


class CovarianceNotPSD(CollarLabError):
    """Covariance matrix failed factorization even after jitter escalation."""


class TooManyPoints(CollarLabError):
    """Shattering check limited to 12 points (exhaustive labeling)."""


class UnsupportedFamily(CollarLabError):
    """Bracketing construction not implemented for this set class."""


class DegenerateSolution(CollarLabError):
    """Excess-mass maximizer is the empty set."""


class Infeasible(CollarLabError):
    """No candidate set reaches the required probability mass."""


class InvalidSchedule(CollarLabError):
    """Replication schedule violates the growth conditions."""


class EmptyPairing(CollarLabError):
    """No class pair satisfies the pairing distance constraint."""
