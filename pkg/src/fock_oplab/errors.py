"""Exception hierarchy shared by every fock_oplab module."""


class FockOpLabError(Exception):
    """Base class for all library errors."""


class RadiusExceeded(FockOpLabError, ValueError):
    """A truncated series was evaluated outside its certified disc."""


class InsufficientCoefficients(FockOpLabError, ValueError):
    pass


class WrongMultiplierKind(FockOpLabError, TypeError):
    pass


class NonConvergent(FockOpLabError, RuntimeError):
    """An adaptive loop ran out of budget before it could certify a result."""


class IndeterminateLiminal(FockOpLabError, RuntimeError):
    pass


class DegenerateLambda(FockOpLabError, ValueError):
    pass


class NoFixedPoint(FockOpLabError, ValueError):
    pass


class HypothesisViolated(FockOpLabError, ValueError):
    """Inputs fall outside the regime in which a routine is meaningful."""


class InternalInconsistency(FockOpLabError, RuntimeError):
    pass


class ConfigInvalid(FockOpLabError, ValueError):
    pass
