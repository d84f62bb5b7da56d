"""Exception hierarchy shared by every stablelab module."""


class StableLabError(ValueError):
    """Base class for all domain errors."""


class InvalidGroupError(StableLabError):
    """Cayley table or permutation generators do not define a group."""


class UnknownPresetError(StableLabError):
    pass


class NotNormalError(StableLabError):
    pass


class NotSubgroupError(StableLabError):
    pass


class CapExceededError(StableLabError):
    """A configured size limit would be exceeded."""


class ModuleError(StableLabError):
    """Action incompatible with the group, not invertible, or not descending."""


class RamifiedPrimeError(StableLabError):
    pass


class UnknownScenarioError(StableLabError):
    pass


class InputError(StableLabError):
    """Malformed payload or argument value."""
