"""Source states: hyper-Bell pairs, SPDC truncations and the five test inputs."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .elements import mirror, polarizing_beam_splitter, spiral_phase_plate, _scratch
from .errors import TruncationTooHigh
from .optical_state import (
    H,
    ModeLabel,
    MixedState,
    PureState,
    apply_transform,
    compose,
    configuration,
    photon_from_vector,
    qubit_mode,
)

SQ2 = 1 / math.sqrt(2)

SAM_LABELS = ("phi+", "phi-", "psi+", "psi-")
OAM_LABELS = ("omega+", "omega-", "chi+", "chi-")

_PRETTY = {
    "phi+": "φ⁺", "phi-": "φ⁻", "psi+": "ψ⁺", "psi-": "ψ⁻",
    "omega+": "ω⁺", "omega-": "ω⁻", "chi+": "χ⁺", "chi-": "χ⁻",
}

# two-qubit Bell vectors in the |00>, |01>, |10>, |11> basis; the OAM family
# (omega, chi) has the same form as the SAM family (phi, psi)
_BELL = {
    "phi+": np.array([1, 0, 0, 1]) * SQ2,
    "phi-": np.array([1, 0, 0, -1]) * SQ2,
    "psi+": np.array([0, 1, 1, 0]) * SQ2,
    "psi-": np.array([0, 1, -1, 0]) * SQ2,
}
_BELL.update({"omega+": _BELL["phi+"], "omega-": _BELL["phi-"], "chi+": _BELL["psi+"], "chi-": _BELL["psi-"]})


def bell_vector(label: str) -> np.ndarray:
    try:
        return _BELL[label].astype(complex)
    except KeyError:
        raise ValueError(f"unknown Bell label {label!r}") from None


@dataclass(frozen=True, order=True)
class HyperBellLabel:
    sam: str
    oam: str

    def __post_init__(self):
        if self.sam not in SAM_LABELS:
            raise ValueError(f"unknown SAM Bell label {self.sam!r}")
        if self.oam not in OAM_LABELS:
            raise ValueError(f"unknown OAM Bell label {self.oam!r}")

    @classmethod
    def all(cls) -> list[HyperBellLabel]:
        return [cls(s, o) for s in SAM_LABELS for o in OAM_LABELS]

    @classmethod
    def parse(cls, text: str) -> HyperBellLabel:
        parts = [part.strip() for part in text.replace("/", ",").split(",")]
        if len(parts) != 2:
            raise ValueError(f"expected 'sam,oam' such as 'phi-,omega+', got {text!r}")
        return cls(*parts)

    @property
    def key(self) -> str:
        return f"{self.sam},{self.oam}"

    def __str__(self) -> str:
        return f"({_PRETTY[self.sam]},{_PRETTY[self.oam]})"


PHI_MINUS_OMEGA_PLUS = HyperBellLabel("phi-", "omega+")
PHI_PLUS_OMEGA_MINUS = HyperBellLabel("phi+", "omega-")


def hyper_bell_vector(label: HyperBellLabel) -> np.ndarray:
    """16-vector over (s1, o1, s2, o2), index 8*s1 + 4*o1 + 2*s2 + o2."""
    s = bell_vector(label.sam).reshape(2, 2)
    o = bell_vector(label.oam).reshape(2, 2)
    return np.einsum("ac,bd->abcd", s, o).reshape(16)


def two_photon_state(vec: Sequence[complex], paths: tuple[int, int], wps: tuple[int, int] = (0, 0)) -> PureState:
    """Two photons on distinct paths with joint SAM x OAM amplitudes ``vec``."""
    p1, p2 = paths
    if p1 == p2:
        raise ValueError("the two photons need distinct paths")
    vec = np.asarray(vec, dtype=complex)
    terms = {}
    for idx in np.flatnonzero(np.abs(vec) > 0):
        a, b = divmod(int(idx), 4)
        m1 = qubit_mode(p1, a // 2, a % 2, wps[0])
        m2 = qubit_mode(p2, b // 2, b % 2, wps[1])
        terms[configuration((m1, m2))] = vec[idx]
    return PureState(terms)


def hyper_bell_state(label: HyperBellLabel, paths: tuple[int, int] = (1, 2)) -> PureState:
    return two_photon_state(hyper_bell_vector(label), paths)


def hyper_entangled_pair(paths: tuple[int, int] = (2, 3)) -> PureState:
    """(|00>s - |11>s)(|00>o + |11>o)/2 shared between the two paths."""
    return hyper_bell_state(PHI_MINUS_OMEGA_PLUS, paths)


def oam_entangled_pair(paths: tuple[int, int] = (4, 5)) -> PureState:
    """(|00>o + |11>o)/sqrt2 with both photons horizontally polarized."""
    full = np.zeros(16, dtype=complex)
    for o1, o2 in itertools.product((0, 1), repeat=2):
        full[4 * o1 + o2] = bell_vector("omega+")[2 * o1 + o2]
    return two_photon_state(full, paths)


INPUT_IDS = ("A", "B", "C", "D", "E")

INPUT_VECTORS = {
    "A": np.array([1, 0, 0, 0], dtype=complex),
    "B": np.array([0, 0, 0, 1], dtype=complex),
    "C": np.array([1, 1, 1, 1], dtype=complex) / 2,
    "D": np.kron([1, 1j], [1, 1j]).astype(complex) / 2,
    "E": np.array([1, 0, 0, 1], dtype=complex) * SQ2,
}


def input_vector(input_id: str) -> np.ndarray:
    try:
        return INPUT_VECTORS[input_id].copy()
    except KeyError:
        raise ValueError(f"unknown input state {input_id!r}; expected one of {INPUT_IDS}") from None


def sagnac_entangler(path: int) -> object:
    """PBS loop with an SPP traversed in opposite directions by H and V.

    H goes mirror -> SPP forward, V goes SPP backward -> mirror; the two
    PBS reflections give V the extra pi phase.
    """
    aux, arm_h, arm_v, dump = (_scratch(path, 20 + k) for k in range(4))
    return compose(
        polarizing_beam_splitter(path, aux, arm_h, arm_v),
        mirror(arm_h),
        spiral_phase_plate(arm_h, 1, "forward"),
        spiral_phase_plate(arm_v, 1, "backward"),
        mirror(arm_v),
        polarizing_beam_splitter(arm_h, arm_v, path, dump),
    )


def sagnac_input_e(path: int = 1) -> PureState:
    seed = PureState({(ModeLabel(path, 0, 0),): SQ2, (ModeLabel(path, 1, 0),): -SQ2})
    return apply_transform(seed, sagnac_entangler(path))


def prepare_input_state(input_id: str, path: int = 1) -> PureState:
    """One of the five test states on ``path``; E is produced by the Sagnac circuit."""
    if input_id == "E":
        return sagnac_input_e(path)
    return photon_from_vector(input_vector(input_id), path)


# ---------------------------------------------------------------------------
# SPDC


@dataclass(frozen=True)
class SourceParams:
    mu: float
    truncation_order: int = 2
    fidelity_inject: float | None = None

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError("mu must be non-negative")
        if self.truncation_order > 2:
            raise TruncationTooHigh(f"truncation order {self.truncation_order} > 2 is not supported")
        if self.truncation_order < 1:
            raise ValueError("truncation order must be 1 or 2")
        if self.fidelity_inject is not None and not 0 <= self.fidelity_inject <= 1:
            raise ValueError("fidelity_inject must lie in [0, 1]")


SPDC_KINDS = ("zero_order", "hyper", "oam_entangled")


def pair_state(paths: tuple[int, int], kind: str) -> PureState:
    if kind == "zero_order":
        return PureState({(ModeLabel(paths[0], H, 0), ModeLabel(paths[1], H, 0)): 1.0})
    if kind == "hyper":
        return hyper_entangled_pair(paths)
    if kind == "oam_entangled":
        return oam_entangled_pair(paths)
    raise ValueError(f"unknown SPDC kind {kind!r}; expected one of {SPDC_KINDS}")


@dataclass(frozen=True)
class SpdcOutput:
    state: PureState
    pair_weights: tuple  # normalized probability of 0, 1, ... pairs
    truncation_weight: float  # weight of the first dropped order, relative to the kept norm


def _pair_power_terms(pair: PureState, order: int, mu: float) -> list[PureState]:
    """[(sqrt(mu) P^dag)^n / n! |0> for n = 0..order]."""
    terms = [PureState.vacuum()]
    power = PureState.vacuum()
    for n in range(1, order + 1):
        power = power.tensor(pair)
        terms.append(power.scaled(math.sqrt(mu) ** n / math.factorial(n)))
    return terms


def spdc_source(paths: tuple[int, int], kind: str, params: SourceParams) -> SpdcOutput:
    """Truncated two-mode-squeezing series exp(sqrt(mu) P^dag)|0>, normalized.

    ``P^dag`` is the pair-creation operator of the requested kind, so the
    double-pair term carries the full bosonic structure of its square.
    """
    pair = pair_state(paths, kind)
    terms = _pair_power_terms(pair, params.truncation_order + 1, params.mu)
    kept = terms[: params.truncation_order + 1]
    weights = [t.norm_squared() for t in kept]
    total = sum(weights)
    state = kept[0]
    for t in kept[1:]:
        state = state + t
    state = PureState._from_canonical(
        {c: a / math.sqrt(total) for c, a in state.terms.items()}, number_superposition=True
    )
    return SpdcOutput(
        state=state,
        pair_weights=tuple(w / total for w in weights),
        truncation_weight=terms[-1].norm_squared() / total,
    )


# ---------------------------------------------------------------------------
# white-noise ensembles


def white_noise_weight(fidelity: float, dim: int) -> float:
    """Weight p of the target in p|t><t| + (1-p) I/d so that the fidelity equals ``fidelity``."""
    if not 0 <= fidelity <= 1:
        raise ValueError("fidelity must lie in [0, 1]")
    p = (fidelity - 1 / dim) / (1 - 1 / dim)
    if p < 0:
        raise ValueError(f"fidelity {fidelity} is below the maximally mixed value 1/{dim}")
    return p


def single_photon_basis(path: int) -> Iterator[PureState]:
    for idx in range(4):
        yield photon_from_vector(np.eye(4)[idx], path)


def oam_pair_basis(paths: tuple[int, int]) -> Iterator[PureState]:
    """The four OAM product states of an H-polarized photon pair."""
    for o1, o2 in itertools.product((0, 1), repeat=2):
        vec = np.zeros(16, dtype=complex)
        vec[4 * o1 + o2] = 1
        yield two_photon_state(vec, paths)


def two_photon_basis(paths: tuple[int, int]) -> Iterator[PureState]:
    for idx in range(16):
        yield two_photon_state(np.eye(16)[idx], paths)


def white_noise_ensemble(target: PureState, fidelity: float, basis: Sequence[PureState]) -> MixedState:
    """p|target><target| + (1-p) I/d written as a pure-state ensemble over ``basis``."""
    basis = list(basis)
    p = white_noise_weight(fidelity, len(basis))
    branches = [(p, target)] if p > 0 else []
    if p < 1:
        branches += [((1 - p) / len(basis), b) for b in basis]
    return MixedState(tuple(branches))
