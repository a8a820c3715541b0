"""Exception hierarchy shared by all modules and mapped to CLI exit codes."""


class ExtProbError(Exception):
    """Base class for domain errors raised by the library."""

    code = "DomainError"

    def __init__(self, reason: str = ""):
        super().__init__(reason)
        self.reason = reason


class RankMismatch(ExtProbError, ValueError):
    code = "RankMismatch"


class RingMismatch(ExtProbError, ValueError):
    code = "RingMismatch"


class NotPhysical(ExtProbError):
    """Operator has no left orthonormal eigenbasis with real eigenvalues."""

    code = "NotPhysical"


class NotPhysicalInput(ExtProbError):
    code = "NotPhysicalInput"


class NotCommuting(ExtProbError):
    code = "NotCommuting"


class UnknownEigenvalue(ExtProbError, KeyError):
    code = "UnknownEigenvalue"

    def __str__(self):
        return self.reason


class DegenerateState(ExtProbError):
    """All raw weights vanish, so no distribution can be formed."""

    code = "DegenerateState"


class WeightSumInvalid(ExtProbError, ValueError):
    code = "WeightSumInvalid"


class InvalidModel(ExtProbError, ValueError):
    code = "InvalidModel"
