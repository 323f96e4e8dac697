"""Hyper-entangled Bell-state measurement: correction map, stages and full pipeline.

Path layout used throughout the teleportation circuit::

    1      photon to be teleported        2, 3   hyper-entangled pair
    4, 5   OAM-entangled ancilla pair     6, 7   outputs of the QND beam splitter
    8, 9   outputs of the OAM Bell-state beam splitter
    10-13  QND detectors (6+, 6-, 7+, 7-)
    14-17  OAM BSM detectors (8+, 8-, 9+, 9-)
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .elements import (
    beam_splitter,
    dual_channel_readout,
    polarizer,
    polarizing_beam_splitter,
    wave_plate,
)
from .optical_state import (
    MixedState,
    ModeTransform,
    PauliOp,
    PureState,
    QubitPairDensity,
    apply_transform,
    as_mixed,
    contract,
    extract_qubit_pair_density,
    interfere,
    normalize,
    oam,
    pauli_pair_matrix,
    pauli_transform,
    photon_from_vector,
    sam,
    vector_from_photon,
)
from .sources import (
    PHI_MINUS_OMEGA_PLUS,
    PHI_PLUS_OMEGA_MINUS,
    HyperBellLabel,
    hyper_bell_state,
    hyper_entangled_pair,
    oam_entangled_pair,
)

INPUT, PAIR_NEAR, OUTPUT, ANC_NEAR, ANC_FAR = 1, 2, 3, 4, 5
QND_OUT = (6, 7)
BSM_OUT = (8, 9)
QND_DETECTORS = (10, 11, 12, 13)
BSM_DETECTORS = (14, 15, 16, 17)

# wavepacket tags used for partial distinguishability at each interferometer
TAG_PBS, TAG_BS1, TAG_BS2 = 101, 102, 103


# ---------------------------------------------------------------------------
# correction map


@dataclass(frozen=True)
class CorrectionEntry:
    """Local Pauli pair that undoes the outcome, plus the phase of the expansion term.

    Photon 3 is left in ``phase * (sam_op x oam_op) |phi>`` up to normalization,
    so applying ``sam_op x oam_op`` restores the input.
    """

    outcome: HyperBellLabel
    sam_op: PauliOp
    oam_op: PauliOp
    phase: complex

    @property
    def matrix(self) -> np.ndarray:
        return pauli_pair_matrix(self.sam_op, self.oam_op)

    def transform(self, path: int = OUTPUT) -> ModeTransform:
        return pauli_transform(path, self.sam_op, self.oam_op)


_CORRECTIONS = {
    ("phi+", "omega+"): ("Z", "I", 1),
    ("phi+", "omega-"): ("Z", "Z", 1),
    ("phi+", "chi+"): ("Z", "X", 1),
    ("phi+", "chi-"): ("Z", "Y", -1j),
    ("phi-", "omega+"): ("I", "I", 1),
    ("phi-", "omega-"): ("I", "Z", 1),
    ("phi-", "chi+"): ("I", "X", 1),
    ("phi-", "chi-"): ("I", "Y", -1j),
    ("psi+", "omega+"): ("Y", "I", 1j),
    ("psi+", "omega-"): ("Y", "Z", 1j),
    ("psi+", "chi+"): ("Y", "X", 1j),
    ("psi+", "chi-"): ("Y", "Y", 1),
    ("psi-", "omega+"): ("X", "I", -1),
    ("psi-", "omega-"): ("X", "Z", -1),
    ("psi-", "chi+"): ("X", "X", -1),
    ("psi-", "chi-"): ("X", "Y", 1j),
}


def correction_for_outcome(outcome: HyperBellLabel) -> CorrectionEntry:
    s, o, phase = _CORRECTIONS[outcome.sam, outcome.oam]
    return CorrectionEntry(outcome, sam(s), oam(o), complex(phase))


def _as_vector(state) -> np.ndarray:
    if isinstance(state, PureState):
        return vector_from_photon(state, INPUT)
    vec = np.asarray(state, dtype=complex)
    if vec.shape != (4,):
        raise ValueError("expected a single-photon SAM x OAM state")
    return vec


@dataclass(frozen=True)
class DecompositionEntry:
    probability: float
    corrected_fidelity: float
    photon3: np.ndarray  # unnormalized conditional qubit-pair vector of photon 3


def hyper_bell_decompose(state) -> dict[HyperBellLabel, DecompositionEntry]:
    """Project |phi>_1 |xi>_23 onto the 16 hyper-Bell states of photons 1 and 2."""
    phi = _as_vector(state)
    if abs(np.linalg.norm(phi) - 1) > 1e-9:
        raise ValueError("input state must be normalized")
    full = photon_from_vector(phi, INPUT).tensor(hyper_entangled_pair((PAIR_NEAR, OUTPUT)))
    out = {}
    for label in HyperBellLabel.all():
        rest = contract(full, hyper_bell_state(label, (INPUT, PAIR_NEAR)), (INPUT, PAIR_NEAR))
        v3 = vector_from_photon(rest, OUTPUT)
        p = float(np.vdot(v3, v3).real)
        fixed = correction_for_outcome(label).matrix @ v3
        fid = float(abs(np.vdot(phi, fixed)) ** 2 / p) if p > 0 else 0.0
        out[label] = DecompositionEntry(p, fid, v3)
    return out


# ---------------------------------------------------------------------------
# OAM signatures


def classify_oam_pair(counts: Sequence[int]) -> str | None:
    """Bell outcome from photon counts on (a+, a-, b+, b-).

    Opposite ports with equal OAM sign mean omega-; the same port with
    orthogonal OAM means omega+. Anything else carries no signature.
    """
    a_p, a_m, b_p, b_m = counts
    if sum(counts) != 2 or max(counts) > 1:
        return None
    if (a_p and b_p) or (a_m and b_m):
        return "omega-"
    if (a_p and a_m) or (b_p and b_m):
        return "omega+"
    return None


def _counts(cfg, paths: Sequence[int]) -> tuple[int, ...]:
    return tuple(sum(1 for m in cfg if m.path == p) for p in paths)


def dual_channel_oam_readout(path: int, plus_path: int, minus_path: int, efficiency: float = 1.0) -> ModeTransform:
    """Sorter plus PBS sending l = +1 to ``plus_path`` and l = -1 to ``minus_path``."""
    return dual_channel_readout(path, plus_path, minus_path, efficiency)


def _oam_bell_circuit(
    state, in_paths, out_paths, detectors, tag_path, overlap, tag, efficiency
) -> MixedState:
    bs = beam_splitter(in_paths[0], in_paths[1], out_paths[0], out_paths[1])
    state = interfere(state, bs, tag_path, overlap, tag)
    readouts = [
        dual_channel_oam_readout(out_paths[0], detectors[0], detectors[1], efficiency),
        dual_channel_oam_readout(out_paths[1], detectors[2], detectors[3], efficiency),
    ]
    return apply_transform(state, readouts)


def _outcome_split(state: MixedState, detectors) -> dict[str | None, MixedState]:
    groups: dict[str | None, list] = defaultdict(list)
    for w, s in state:
        parts: dict[str | None, dict] = defaultdict(dict)
        for cfg, amp in s.terms.items():
            parts[classify_oam_pair(_counts(cfg, detectors))][cfg] = amp
        for key, terms in parts.items():
            groups[key].append((w, PureState._from_canonical(terms, s.prune_eps, s.number_superposition)))
    return {k: MixedState(tuple(v)) for k, v in groups.items()}


def _normalized_or_zero(m: MixedState) -> tuple[float, MixedState]:
    p = m.total_probability()
    if p <= 1e-24:
        return 0.0, MixedState(((1.0, PureState.zero()),))
    return p, m.normalized()


def qnd_outcomes(
    state,
    in_path: int = INPUT,
    ancilla_paths: tuple[int, int] = (ANC_NEAR, ANC_FAR),
    overlap: float = 1.0,
    efficiency: float = 1.0,
) -> dict[str | None, tuple[float, MixedState]]:
    """Teleportation-based QND: BS on (in, near ancilla) plus dual-channel readout.

    Adds the |omega+> ancilla pair when its paths are empty. Returns every
    readout class with its probability and normalized conditional state;
    detected photons remain on the detector paths.
    """
    state = as_mixed(state)
    if not any(p in s.paths() for _, s in state for p in ancilla_paths):
        anc = oam_entangled_pair(ancilla_paths)
        state = state.map(lambda s: s.tensor(anc))
    out = _oam_bell_circuit(
        state, (in_path, ancilla_paths[0]), QND_OUT, QND_DETECTORS, ancilla_paths[0], overlap, TAG_BS1, efficiency
    )
    return {k: _normalized_or_zero(v) for k, v in _outcome_split(out, QND_DETECTORS).items()}


def qnd_teleport(
    state,
    in_path: int = INPUT,
    ancilla_paths: tuple[int, int] = (ANC_NEAR, ANC_FAR),
    out_path: int = ANC_FAR,
    overlap: float = 1.0,
) -> tuple[float, MixedState]:
    """Herald probability and the heralded state; the OAM qubit now rides on ``out_path``.

    An omega- herald leaves sigma_z^o on the output photon; :func:`qnd_correction`
    gives the fix per outcome.
    """
    if out_path != ancilla_paths[1]:
        raise ValueError("the teleported photon leaves on the far ancilla path")
    results = qnd_outcomes(state, in_path, ancilla_paths, overlap)
    heralded = [(p, m) for k, (p, m) in results.items() if k is not None and p > 0]
    total = sum(p for p, _ in heralded)
    if total == 0:
        return 0.0, MixedState(((1.0, PureState.zero()),))
    mixed = MixedState(tuple((p * w, s) for p, m in heralded for w, s in m))
    return total, mixed.normalized()


def qnd_correction(outcome: str) -> PauliOp:
    return oam("I") if outcome == "omega+" else oam("Z")


def oam_bsm_outcomes(
    state,
    paths: tuple[int, int] = (PAIR_NEAR, ANC_FAR),
    overlap: float = 1.0,
    efficiency: float = 1.0,
) -> dict[str | None, tuple[float, MixedState]]:
    out = _oam_bell_circuit(as_mixed(state), paths, BSM_OUT, BSM_DETECTORS, paths[1], overlap, TAG_BS2, efficiency)
    return {k: _normalized_or_zero(v) for k, v in _outcome_split(out, BSM_DETECTORS).items()}


def oam_bsm_stage(
    state, paths: tuple[int, int] = (PAIR_NEAR, ANC_FAR), overlap: float = 1.0
) -> tuple[str | None, float, MixedState]:
    """Most likely readout class (omega+, omega- or None), its probability and conditional."""
    results = oam_bsm_outcomes(state, paths, overlap)
    order = {"omega+": 0, "omega-": 1, None: 2}
    best = max(results, key=lambda k: (results[k][0], -order[k]))
    p, cond = results[best]
    return best, p, cond


def sam_bsm_transforms(paths: tuple[int, int] = (INPUT, PAIR_NEAR), reset: bool = True) -> list[ModeTransform]:
    a, b = paths
    stages = [polarizer(a, math.pi / 4), polarizer(b, math.pi / 4)]
    if reset:
        # D -> H so both photons match the H-polarized ancilla downstream
        stages += [wave_plate(a, "HWP", math.pi / 8), wave_plate(b, "HWP", math.pi / 8)]
    return stages


def sam_bsm_apply(state, paths=(INPUT, PAIR_NEAR), overlap: float = 1.0, reset: bool = True) -> MixedState:
    """PBS and diagonal polarizers, without post-selection."""
    pbs = polarizing_beam_splitter(paths[0], paths[1], paths[0], paths[1])
    state = interfere(state, pbs, paths[0], overlap, TAG_PBS)
    return apply_transform(state, sam_bsm_transforms(paths, reset))


def sam_bsm_stage(
    state, paths: tuple[int, int] = (INPUT, PAIR_NEAR), overlap: float = 1.0, reset: bool = True
) -> tuple[float, MixedState]:
    """Probability that exactly one photon leaves each PBS output through its polarizer."""
    out = sam_bsm_apply(state, paths, overlap, reset)
    kept = []
    for w, s in out:
        terms = {c: a for c, a in s.terms.items() if _counts(c, paths) == (1, 1)}
        kept.append((w, PureState._from_canonical(terms, s.prune_eps, s.number_superposition)))
    return _normalized_or_zero(MixedState(tuple(kept)))


# ---------------------------------------------------------------------------
# full pipeline


def identify(qnd: str | None, bsm: str | None) -> HyperBellLabel | None:
    """Hyper-Bell label heralded by a (QND, OAM BSM) readout pair.

    An omega- QND herald flips the OAM Bell outcome seen downstream, so
    agreeing readouts mean omega+ between photons 1 and 2.
    """
    if qnd is None or bsm is None:
        return None
    return PHI_MINUS_OMEGA_PLUS if qnd == bsm else PHI_PLUS_OMEGA_MINUS


def classify_configuration(cfg) -> HyperBellLabel | None:
    if _counts(cfg, (INPUT, PAIR_NEAR, ANC_NEAR, ANC_FAR) + QND_OUT + BSM_OUT) != (0,) * 8:
        return None
    return identify(
        classify_oam_pair(_counts(cfg, QND_DETECTORS)), classify_oam_pair(_counts(cfg, BSM_DETECTORS))
    )


@dataclass(frozen=True)
class CircuitSettings:
    overlap_pbs: float = 1.0
    overlap_bs1: float = 1.0
    overlap_bs2: float = 1.0
    readout_efficiency: float = 1.0


def hbsm_circuit(state, settings: CircuitSettings = CircuitSettings()) -> MixedState:
    """Run the three h-BSM steps on photons 1 and 2 with the ancilla on 4, 5 (no post-selection)."""
    state = as_mixed(state)
    state = sam_bsm_apply(state, (INPUT, PAIR_NEAR), settings.overlap_pbs)
    state = _oam_bell_circuit(
        state, (INPUT, ANC_NEAR), QND_OUT, QND_DETECTORS, ANC_NEAR,
        settings.overlap_bs1, TAG_BS1, settings.readout_efficiency,
    )
    return _oam_bell_circuit(
        state, (PAIR_NEAR, ANC_FAR), BSM_OUT, BSM_DETECTORS, ANC_FAR,
        settings.overlap_bs2, TAG_BS2, settings.readout_efficiency,
    )


def split_by_label(state: MixedState) -> dict[HyperBellLabel, MixedState]:
    """Unnormalized component of each identified label; unidentified events are dropped."""
    groups: dict[HyperBellLabel, list] = defaultdict(list)
    for w, s in state:
        parts: dict = defaultdict(dict)
        for cfg, amp in s.terms.items():
            label = classify_configuration(cfg)
            if label is not None:
                parts[label][cfg] = amp
        for label, terms in parts.items():
            groups[label].append((w, PureState._from_canonical(terms, s.prune_eps, s.number_superposition)))
    return {k: MixedState(tuple(v)) for k, v in groups.items()}


@dataclass(frozen=True)
class HbsmResult:
    identified: HyperBellLabel | None
    success_probability: float
    conditional_state: MixedState
    outcome_probabilities: Mapping = field(default_factory=dict)

    @property
    def identified_name(self) -> str:
        return "none" if self.identified is None else str(self.identified)


def full_hbsm(state, settings: CircuitSettings = CircuitSettings()) -> HbsmResult:
    """Run the cascade on photons 1, 2 (and whatever else ``state`` holds).

    Adds the |omega+> ancilla on paths 4, 5 when it is absent.
    """
    state = as_mixed(state)
    if not any(ANC_NEAR in s.paths() for _, s in state):
        anc = oam_entangled_pair((ANC_NEAR, ANC_FAR))
        state = state.map(lambda s: s.tensor(anc))
    total_in = state.total_probability()
    parts = split_by_label(hbsm_circuit(state, settings))
    probs = {label: m.total_probability() / total_in for label, m in parts.items()}
    if not probs or max(probs.values()) <= 1e-24:
        return HbsmResult(None, 0.0, MixedState(((1.0, PureState.zero()),)), probs)
    best = max(sorted(probs), key=lambda k: probs[k])
    return HbsmResult(best, probs[best], parts[best].normalized(), probs)


def photon3_density(component: MixedState, correct_for: HyperBellLabel | None = None) -> QubitPairDensity:
    """Reduced state of photon 3, optionally after the Pauli correction for ``correct_for``."""
    if correct_for is not None:
        component = apply_transform(component, correction_for_outcome(correct_for).transform(OUTPUT))
    return extract_qubit_pair_density(component, OUTPUT)
