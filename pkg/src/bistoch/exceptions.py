"""Exception types raised across the package."""


class DimensionError(ValueError):
    """Operands have incompatible or unsupported shapes."""


class NotHermitianError(ValueError):
    pass


class NotUnitaryError(ValueError):
    pass


class InvalidKatzBlockError(ValueError):
    """Katz blocks exist only for size 1, 2 or odd sizes."""


class InvalidPartitionError(ValueError):
    pass


class IterationLimitError(RuntimeError):
    """The simplex pivot loop hit its iteration cap.

    Distinct from an infeasible verdict: it signals a solver failure, not a
    property of the problem.
    """


class NotSelfDualError(ValueError):
    pass


class NotSchurMapError(ValueError):
    """The map does not fix every diagonal matrix."""


class ResourceCapError(ValueError):
    """Requested dimension exceeds a hard cap (enumeration or LP size)."""
