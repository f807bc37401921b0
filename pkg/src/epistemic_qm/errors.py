"""Exception hierarchy shared by every module of the package."""


class EpistemicError(ValueError):
    """Base class for all errors raised by epistemic_qm."""


class NotHermitian(EpistemicError):
    pass


class NotPSD(EpistemicError):
    pass


class NotProjector(EpistemicError):
    pass


class NotUnitary(EpistemicError):
    pass


class NotPure(EpistemicError):
    pass


class DimMismatch(EpistemicError):
    """Two operators live on Hilbert spaces of different dimension."""


class InvalidChannel(EpistemicError):
    pass


class InvalidDistribution(EpistemicError):
    pass


class SpaceMismatch(EpistemicError):
    """Two assignments are over different outcome spaces and cannot be compared."""


class Incompatible(EpistemicError):
    """The supports of two assignments do not intersect."""


class JointlyIncompatible(EpistemicError):
    pass


class UnsupportedDecomposition(EpistemicError):
    pass


class ZeroEvidence(EpistemicError):
    """Conditioning on an outcome the agent considers impossible."""


class BadWeights(EpistemicError):
    pass


class BadConfig(EpistemicError):
    pass
