"""Exception hierarchy shared by all walkcum modules."""


class WalkcumError(Exception):
    """Base class for every error raised by walkcum."""


class InvalidKernel(WalkcumError, ValueError):
    pass


class NonConvergent(WalkcumError):
    """Kernel integral does not converge within the maximum truncation."""


class GridTooCoarse(WalkcumError):
    pass


class InvalidParams(WalkcumError, ValueError):
    pass


class InvalidVertex(WalkcumError, ValueError):
    pass


class SelfLoop(WalkcumError, ValueError):
    pass


class InfeasibleRegime(WalkcumError, ValueError):
    pass


class RegimeMismatch(WalkcumError, ValueError):
    pass


class UnsupportedOrder(WalkcumError, ValueError):
    pass


class OrderTooLarge(WalkcumError, ValueError):
    pass


class TooFewReplicas(WalkcumError, ValueError):
    pass


class InvalidProfile(WalkcumError, ValueError):
    pass


class NotTreeType(WalkcumError, ValueError):
    pass


class TooLarge(WalkcumError, ValueError):
    pass


class NoJumpLaw(WalkcumError):
    """Moment sequence is not the moment sequence of a probability law."""


class RootNotBracketed(WalkcumError):
    pass


class ConfigError(WalkcumError, ValueError):
    pass
