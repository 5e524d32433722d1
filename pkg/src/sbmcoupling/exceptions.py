class SbmCouplingError(Exception):
    """Base class for errors raised by this package."""


class SizeMismatchError(SbmCouplingError, ValueError):
    pass


class CapExceededError(SbmCouplingError, ValueError):
    """An exact routine was asked for an instance above its hard size cap."""


class InvalidVertexError(SbmCouplingError, ValueError):
    pass


class InvalidSpecError(SbmCouplingError, ValueError):
    pass


class EnumerationBudgetError(SbmCouplingError, RuntimeError):
    """Cycle enumeration would exceed its budget; results would be truncated."""


class ProbabilityMassError(SbmCouplingError, RuntimeError):
    """An exact distribution failed its own normalization check."""


class DegenerateMeansError(SbmCouplingError, ValueError):
    pass


class MarginalError(SbmCouplingError, ValueError):
    pass
