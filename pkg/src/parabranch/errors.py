"""Exception hierarchy shared across the package."""


class ParabranchError(Exception):
    """Base class for all package-specific errors."""


class KernelFormatError(ParabranchError):
    """A kernel text expression could not be parsed; names the bad token."""


class PreconditionViolated(ParabranchError):
    """An operation was called outside its documented precondition."""


class SearchExhausted(ParabranchError):
    """A constructive search ran out of representable candidates.

    Carries the last survival index seen so the caller can report how far
    from the target the search got.
    """

    def __init__(self, message, last_d=None):
        super().__init__(message)
        self.last_d = last_d


class BudgetExceeded(ParabranchError):
    """A branching-side computation would exceed the configured cell budget."""


class MaxCellsExceeded(ParabranchError):
    """A replication grew past SimConfig.max_cells and was aborted."""


class SnapshotsMissing(ParabranchError):
    """Per-cell snapshots were requested from a trajectory that has none."""
