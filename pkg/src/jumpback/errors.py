"""Exception hierarchy. Everything derives from ``ValueError`` so callers
that only care about bad input can catch that."""


class JumpbackError(ValueError):
    pass


class NormalizationError(JumpbackError):
    pass


class DimensionError(JumpbackError):
    pass


class SupportError(JumpbackError):
    """State amplitude reaches levels where truncation would hide leakage."""


class NotReversibleError(JumpbackError):
    pass


class InfeasibleError(JumpbackError):
    pass


class AnnihilatedStateError(JumpbackError):
    """The requested jump sends the state to the zero vector."""


class ZeroProbabilityOutcomeError(JumpbackError):
    pass


class VacuousExperimentError(JumpbackError):
    pass
