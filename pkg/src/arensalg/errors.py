"""Exception hierarchy shared by all arensalg modules."""


class ArensAlgError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(ArensAlgError, ValueError):
    pass


class AmbientMismatch(DimensionMismatch):
    pass


class NotAnIdeal(ArensAlgError, ValueError):
    pass


class NotUnital(ArensAlgError, ValueError):
    pass


class InvalidAlgebra(ArensAlgError, ValueError):
    """Raised when a table fails associativity/unit checks where validity is required."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class BadLevel(ArensAlgError, ValueError):
    pass


class SideMismatch(ArensAlgError, ValueError):
    pass


class NotAHomomorphism(ArensAlgError, ValueError):
    pass


class UnknownFamily(ArensAlgError, KeyError):
    pass


class BadParams(ArensAlgError, ValueError):
    pass


class ExtractionFailed(ArensAlgError):
    def __init__(self, message, diagnostic=None):
        super().__init__(message)
        self.diagnostic = diagnostic or {}


class NotMaximalRank(ArensAlgError):
    """The extraction found a functional whose rank map beats the claimed maximum.

    ``witness`` is the improved functional (original coordinates) and ``rank``
    its rank; callers are expected to retry with it.
    """

    def __init__(self, witness, rank, claimed, branch=None):
        super().__init__(f"claimed maximal rank {claimed} but found rank {rank}")
        self.witness = witness
        self.rank = rank
        self.claimed = claimed
        self.branch = branch
