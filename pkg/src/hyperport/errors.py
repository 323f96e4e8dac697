"""Exception types raised by the simulator."""


class HyperportError(Exception):
    """Base class for all simulator errors."""


class ZeroState(HyperportError):
    """A state has no amplitude left, usually because post-selection removed it."""


class NonUnitaryTransform(HyperportError):
    """A mode transform failed its isometry check and was not declared lossy."""


class LeakageOutsideQubitSpace(HyperportError):
    """A photon carries amplitude outside the SAM x OAM qubit subspace."""

    def __init__(self, message: str, weight: float):
        super().__init__(message)
        self.weight = weight


class TruncationTooHigh(HyperportError):
    """Requested SPDC truncation order is not supported."""


class MismatchError(HyperportError):
    """Symbolic and amplitude-level cascade results disagree."""

    def __init__(self, message: str, labels):
        super().__init__(message)
        self.labels = labels
