"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`VolGrowthError`, so callers can catch the whole family at once.
"""


class VolGrowthError(ValueError):
    pass


class HorizonTooSmall(VolGrowthError):
    pass


class NormalizationFailed(VolGrowthError):
    pass


class InfeasibleGrowth(VolGrowthError):
    def __init__(self, level, reason=""):
        self.level = level
        msg = f"growth infeasible at level {level}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class OnTrunk(VolGrowthError):
    pass


class MalformedTree(VolGrowthError):
    pass


class DomainError(VolGrowthError):
    pass


class SearchExhausted(VolGrowthError):
    pass


class IncompleteCatalog(VolGrowthError):
    pass


class InfeasibleSelection(VolGrowthError):
    pass


class PlacementConflict(VolGrowthError):
    pass


class MultiTrunk(VolGrowthError):
    pass
