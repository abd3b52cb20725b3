"""Exception hierarchy shared by the library and the CLI."""


class StabnegError(Exception):
    """Base class for all library errors."""


class ModelError(StabnegError, ValueError):
    """A stabilizer model violates one of its invariants."""


class NonCommutingError(ModelError):
    """Two generators fail to commute globally."""

    def __init__(self, i: int, j: int):
        super().__init__(f"generators {i} and {j} do not commute")
        self.pair = (i, j)


class DependentGeneratorsError(ModelError):
    """The generator list is linearly dependent over GF(2)."""

    def __init__(self, rank: int, k: int, redundant: int):
        super().__init__(
            f"generators are dependent: rank {rank} < {k}; generator {redundant} is redundant"
        )
        self.rank = rank
        self.k = k
        self.redundant = redundant


class GuardError(StabnegError):
    """A size guard refused a computation that would not fit at desk scale."""


class VerificationMismatch(StabnegError):
    """The dense oracle disagrees with the sector-table engine."""

    def __init__(self, quantity: str, deviation: float, tolerance: float, record=None):
        super().__init__(
            f"{quantity}: deviation {deviation:.3e} exceeds tolerance {tolerance:.1e}"
        )
        self.quantity = quantity
        self.deviation = deviation
        self.tolerance = tolerance
        self.record = record


class ConfigError(StabnegError):
    """A run configuration is malformed or incomplete."""
