"""Exception types raised across heisenlab."""


class HeisenlabError(Exception):
    """Base class for all library errors."""


class DimensionMismatchError(HeisenlabError, ValueError):
    """Two objects live on Heisenberg groups of different dimension."""


class GridError(HeisenlabError, ValueError):
    """A grid is malformed, too coarse, or incompatible with another grid."""


class NumericalFailure(HeisenlabError, RuntimeError):
    """A numerical procedure produced a result that cannot be trusted."""


class UnderflowError(NumericalFailure):
    """A norm vanished to zero because the field left the computational box."""
