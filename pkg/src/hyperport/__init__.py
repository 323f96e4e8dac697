"""Exact simulator for teleporting the spin and orbital angular momentum of a photon."""

from .errors import (
    HyperportError,
    LeakageOutsideQubitSpace,
    MismatchError,
    NonUnitaryTransform,
    TruncationTooHigh,
    ZeroState,
)
from .optical_state import (
    DetectionPattern,
    MixedState,
    ModeLabel,
    ModeTransform,
    PathConstraint,
    PauliOp,
    PureState,
    QubitPairDensity,
    apply_transform,
    extract_qubit_pair_density,
    fidelity,
    normalize,
    pauli_expectation,
    project,
)
from .sources import HyperBellLabel

__version__ = "0.1.0"
