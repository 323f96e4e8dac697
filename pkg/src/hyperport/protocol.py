"""End-to-end scenarios: teleportation runs, HOM scans, error budgets and feed-forward."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .elements import (
    SORTER_EFFICIENCY,
    SPP_EFFICIENCY,
    beam_splitter,
    cnot_oam_to_sam,
    cnot_sam_to_oam,
    localize,
    polarization_unitary,
    polarizer,
    polarizing_beam_splitter,
)
from .errors import ZeroState
from .measurement import (
    ANC_FAR,
    ANC_NEAR,
    INPUT,
    OUTPUT,
    PAIR_NEAR,
    CircuitSettings,
    correction_for_outcome,
    hbsm_circuit,
    split_by_label,
)
from .optical_state import (
    MixedState,
    ModeLabel,
    ModeTransform,
    PauliOp,
    PureState,
    QubitPairDensity,
    apply_transform,
    compose,
    extract_qubit_pair_density,
    fidelity,
    interfere,
    oam,
    pauli_expectation,
    photon_from_vector,
    sam,
)
from .sources import (
    INPUT_IDS,
    HyperBellLabel,
    hyper_entangled_pair,
    input_vector,
    oam_pair_basis,
    prepare_input_state,
    sagnac_entangler,
    single_photon_basis,
    white_noise_weight,
    oam_entangled_pair,
)

COHERENCE_TIME_FS = 448.0
MEASURED_MU = (0.1, 0.01, 0.05)


@dataclass(frozen=True)
class NoiseParams:
    """Imperfections of one run. Defaults describe the ideal experiment.

    ``background`` is the white-noise weight mixed into the detected state
    (double-pair emission); ``oam_leakage`` depolarizes the OAM qubit only.
    """

    mu_per_source: tuple = (0.0, 0.0, 0.0)
    overlap_pbs: float = 1.0
    overlap_bs1: float = 1.0
    overlap_bs2: float = 1.0
    pair23_fidelity: float = 1.0
    pair45_fidelity: float = 1.0
    input_state_fidelity: float = 1.0
    oam_leakage: float = 0.0
    background: float = 0.0
    lossy_elements: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mu_per_source", tuple(float(m) for m in self.mu_per_source))
        if len(self.mu_per_source) != 3 or any(m < 0 for m in self.mu_per_source):
            raise ValueError("mu_per_source needs three non-negative values")
        for name in (
            "overlap_pbs", "overlap_bs1", "overlap_bs2", "pair23_fidelity", "pair45_fidelity",
            "input_state_fidelity", "oam_leakage", "background",
        ):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        white_noise_weight(self.pair23_fidelity, 16)
        white_noise_weight(self.pair45_fidelity, 4)
        white_noise_weight(self.input_state_fidelity, 4)

    @classmethod
    def ideal(cls) -> NoiseParams:
        return cls()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mu_per_source"] = list(self.mu_per_source)
        return d


# ---------------------------------------------------------------------------
# teleportation


@dataclass(frozen=True)
class TeleportReport:
    input_id: str
    outcome: HyperBellLabel | None  # None: both heralded outcomes combined
    success_probability: float
    fidelity: float
    pauli_expectations: tuple | None = None
    rho: QubitPairDensity | None = field(default=None, compare=False, repr=False)

    def to_dict(self) -> dict:
        return {
            "input": self.input_id,
            "outcome": "all" if self.outcome is None else self.outcome.key,
            "success_probability": self.success_probability,
            "fidelity": self.fidelity,
            "pauli_expectations": None if self.pauli_expectations is None else list(self.pauli_expectations),
        }


def _input_ensemble(input_id: str, noise: NoiseParams) -> list[tuple[float, PureState]]:
    state = prepare_input_state(input_id, INPUT)
    if input_id == "E" and noise.lossy_elements:
        # both counter-propagating halves cross the SPP once
        state = state.scaled(math.sqrt(SPP_EFFICIENCY))
    if input_id != "E" or noise.input_state_fidelity >= 1:
        return [(1.0, state)]
    p = white_noise_weight(noise.input_state_fidelity, 4)
    scale = state.norm_squared()
    return [(p, state)] + [((1 - p) / 4 * scale, b) for b in single_photon_basis(INPUT)]


def _ancilla_ensemble(noise: NoiseParams) -> list[tuple[float, PureState]]:
    pair = oam_entangled_pair((ANC_NEAR, ANC_FAR))
    if noise.pair45_fidelity >= 1:
        return [(1.0, pair)]
    p = white_noise_weight(noise.pair45_fidelity, 4)
    return [(p, pair)] + [((1 - p) / 4, b) for b in oam_pair_basis((ANC_NEAR, ANC_FAR))]


def _settings(noise: NoiseParams) -> CircuitSettings:
    return CircuitSettings(
        overlap_pbs=noise.overlap_pbs,
        overlap_bs1=noise.overlap_bs1,
        overlap_bs2=noise.overlap_bs2,
        readout_efficiency=SORTER_EFFICIENCY if noise.lossy_elements else 1.0,
    )


def _label_components(state: MixedState, noise: NoiseParams) -> dict[HyperBellLabel, MixedState]:
    return split_by_label(hbsm_circuit(state, _settings(noise)))


def _unnormalized_rho(component: MixedState, label: HyperBellLabel) -> np.ndarray:
    corrected = apply_transform(component, correction_for_outcome(label).transform(OUTPUT))
    rho = extract_qubit_pair_density(corrected, OUTPUT).rho
    return rho * component.total_probability()


def teleport_outcomes(input_id: str, noise: NoiseParams = NoiseParams()) -> dict[HyperBellLabel, tuple[float, np.ndarray]]:
    """Probability and unnormalized, corrected photon-3 density for every heralded label.

    The background and OAM leakage channels are not applied here.
    """
    p23 = white_noise_weight(noise.pair23_fidelity, 16)
    pair = hyper_entangled_pair((PAIR_NEAR, OUTPUT))
    acc: dict[HyperBellLabel, list] = {}

    def add(label, prob, rho):
        slot = acc.setdefault(label, [0.0, np.zeros((4, 4), dtype=complex)])
        slot[0] += prob
        slot[1] = slot[1] + rho

    for w1, photon1 in _input_ensemble(input_id, noise):
        for w45, anc in _ancilla_ensemble(noise):
            base = photon1.tensor(anc)
            if p23 > 0:
                full = MixedState(((w1 * w45 * p23, base.tensor(pair)),))
                for label, comp in _label_components(full, noise).items():
                    add(label, comp.total_probability(), _unnormalized_rho(comp, label))
            if p23 < 1:
                # maximally mixed pair: photon 3 is uncorrelated and stays I/4,
                # so only photon 2 needs to run through the circuit
                branches = tuple(
                    (w1 * w45 * (1 - p23) / 4, base.tensor(b)) for b in single_photon_basis(PAIR_NEAR)
                )
                for label, comp in _label_components(MixedState(branches), noise).items():
                    prob = comp.total_probability()
                    add(label, prob, prob * np.eye(4) / 4)
    return {label: (p, rho) for label, (p, rho) in acc.items()}


def apply_readout_noise(rho: np.ndarray, noise: NoiseParams) -> np.ndarray:
    """Double-pair background and OAM leakage acting on a normalized density matrix."""
    if noise.oam_leakage > 0:
        r = rho.reshape(2, 2, 2, 2)
        sam_part = np.einsum("aibi->ab", r)
        rho = (1 - noise.oam_leakage) * rho + noise.oam_leakage * np.kron(sam_part, np.eye(2) / 2)
    if noise.background > 0:
        rho = (1 - noise.background) * rho + noise.background * np.eye(4) / 4
    return rho


def _report(input_id, outcome, prob, rho, noise) -> TeleportReport:
    rho = QubitPairDensity(apply_readout_noise(rho / np.trace(rho).real, noise))
    target = input_vector(input_id)
    expectations = tuple(pauli_expectation(rho, sam(a), oam(a)) for a in "XYZ")
    return TeleportReport(input_id, outcome, prob, fidelity(rho, target), expectations, rho)


def run_teleportation(
    input_id: str, noise: NoiseParams = NoiseParams(), outcome: HyperBellLabel | None = None
) -> TeleportReport:
    """Teleport one of the five test states through the full six-photon circuit.

    With ``outcome`` unset the two heralded outcomes are combined after their
    individual corrections.
    """
    if input_id not in INPUT_IDS:
        raise ValueError(f"unknown input state {input_id!r}")
    results = teleport_outcomes(input_id, noise)
    if outcome is not None:
        results = {k: v for k, v in results.items() if k == outcome}
    prob = sum(p for p, _ in results.values())
    if prob <= 1e-24:
        raise ZeroState(f"no heralded events for input {input_id}")
    rho = sum(r for _, r in results.values())
    return _report(input_id, outcome, prob, rho, noise)


def run_teleportation_per_outcome(input_id: str, noise: NoiseParams = NoiseParams()) -> list[TeleportReport]:
    results = teleport_outcomes(input_id, noise)
    return [_report(input_id, label, p, rho, noise) for label, (p, rho) in sorted(results.items())]


def error_budget_eval(noise: NoiseParams) -> dict[str, TeleportReport]:
    return {sid: run_teleportation(sid, noise) for sid in INPUT_IDS}


# ---------------------------------------------------------------------------
# HOM interference

INTERFEROMETERS = ("PBS", "BS1", "BS2")
_HOM_TAG = 200


def overlap_at(delay_fs: float, tau_fs: float = COHERENCE_TIME_FS, max_overlap: float = 1.0) -> float:
    if tau_fs <= 0:
        raise ValueError("coherence time must be positive")
    return max_overlap * math.exp(-(delay_fs**2) / (2 * tau_fs**2))


def _coincidence(state: MixedState) -> float:
    total = 0.0
    for w, s in state:
        for cfg, amp in s.terms.items():
            if sorted(m.path for m in cfg) == [1, 2]:
                total += w * abs(amp) ** 2
    return total


def _hom_inputs(interferometer: str) -> list[tuple[PureState, list[ModeTransform]]]:
    """(input, element + analysis) pairs; the PBS scan has the orthogonal and parallel inputs."""
    if interferometer in ("BS1", "BS2"):
        state = PureState({(ModeLabel(1, 0, 1), ModeLabel(2, 0, -1)): 1.0})
        return [(state, [beam_splitter(1, 2, 1, 2)])]
    if interferometer != "PBS":
        raise ValueError(f"interferometer must be one of {INTERFEROMETERS}")
    s = 1 / math.sqrt(2)
    analysis = [polarizer(1, math.pi / 4), polarizer(2, math.pi / 4)]
    out = []
    for second in (-s, s):  # D r x A l, then D r x D l
        photons = {}
        for p1, a1 in ((0, s), (1, s)):
            for p2, a2 in ((0, s), (1, second)):
                photons[(ModeLabel(1, p1, 1), ModeLabel(2, p2, -1))] = a1 * a2
        out.append((PureState(photons), [polarizing_beam_splitter(1, 2, 1, 2)] + analysis))
    return out


def hom_coincidences(interferometer: str, overlap: float) -> list[float]:
    """Coincidence probability for each scan input at the given wavepacket overlap."""
    values = []
    for state, (element, *analysis) in _hom_inputs(interferometer):
        mixed = interfere(state, element, 2, overlap, _HOM_TAG)
        values.append(_coincidence(apply_transform(mixed, analysis)))
    return values


def visibility_from(interferometer: str, coincidences: Sequence[float], reference: Sequence[float] = ()) -> float:
    if interferometer == "PBS":
        c_plus, c_par = coincidences[0], coincidences[1]
        return (c_plus - c_par) / (c_plus + c_par)
    c0, c_inf = coincidences[0], reference[0]
    return 1 - c0 / c_inf


def visibility_at_overlap(interferometer: str, overlap: float) -> float:
    if interferometer == "PBS":
        return visibility_from("PBS", hom_coincidences("PBS", overlap))
    return visibility_from(interferometer, hom_coincidences(interferometer, overlap), hom_coincidences(interferometer, 0.0))


def overlap_for_visibility(interferometer: str, target: float) -> float:
    """Invert V(x). Coincidences are affine in x, so V is a ratio of affine functions."""
    lo, hi = hom_coincidences(interferometer, 0.0), hom_coincidences(interferometer, 1.0)
    if interferometer == "PBS":
        (p0, q0), (p1, q1) = lo, hi
        # V = (a x + b) / (c x + d)
        a, b = (p1 - q1) - (p0 - q0), p0 - q0
        c, d = (p1 + q1) - (p0 + q0), p0 + q0
        x = (b - target * d) / (target * c - a)
    else:
        # V = 1 - C(x)/C(0) with C affine
        x = (lo[0] - (1 - target) * lo[0]) / (lo[0] - hi[0])
    if not -1e-12 <= x <= 1 + 1e-12:
        raise ValueError(f"visibility {target} is not reachable on {interferometer}")
    return min(max(x, 0.0), 1.0)


@dataclass(frozen=True)
class HomScanResult:
    interferometer: str
    delays: tuple
    coincidences: tuple
    visibility: float
    formula: str
    reference: tuple = ()  # parallel-input curve for the PBS, distinguishable level for a BS

    def to_dict(self) -> dict:
        return {
            "interferometer": self.interferometer,
            "delays_fs": list(self.delays),
            "coincidences": list(self.coincidences),
            "reference": list(self.reference),
            "visibility": self.visibility,
            "formula": self.formula,
        }


def hom_scan(
    interferometer: str,
    delays: Sequence[float],
    tau_fs: float = COHERENCE_TIME_FS,
    max_overlap: float = 1.0,
) -> HomScanResult:
    """Coincidence versus delay; the visibility is evaluated at zero delay."""
    interferometer = interferometer.upper()
    delays = tuple(float(d) for d in delays)
    curves = [hom_coincidences(interferometer, overlap_at(d, tau_fs, max_overlap)) for d in delays]
    if interferometer == "PBS":
        coinc = tuple(c[0] for c in curves)
        ref = tuple(c[1] for c in curves)
        v = visibility_from("PBS", hom_coincidences("PBS", max_overlap))
        formula = "dip_peak"
    else:
        coinc = tuple(c[0] for c in curves)
        c_inf = hom_coincidences(interferometer, 0.0)
        ref = tuple(c_inf[0] for _ in delays)
        v = visibility_from(interferometer, hom_coincidences(interferometer, max_overlap), c_inf)
        formula = "dip"
    return HomScanResult(interferometer, delays, coinc, v, formula, ref)


# ---------------------------------------------------------------------------
# calibration

MEASURED_VISIBILITIES = {"PBS": 0.75, "BS1": 0.73, "BS2": 0.69}


def calibrated_noise(overlaps: str = "budget") -> NoiseParams:
    """Preset built from the reported error budget.

    ``overlaps="budget"`` uses the ~5% distinguishability figures;
    ``overlaps="hom"`` inverts the measured HOM visibilities instead.
    """
    if overlaps == "hom":
        x = {k: overlap_for_visibility(k, v) for k, v in MEASURED_VISIBILITIES.items()}
    elif overlaps == "budget":
        x = {"PBS": 0.95, "BS1": 0.95, "BS2": 0.95}
    else:
        raise ValueError("overlaps must be 'budget' or 'hom'")
    return NoiseParams(
        mu_per_source=MEASURED_MU,
        overlap_pbs=x["PBS"],
        overlap_bs1=x["BS1"],
        overlap_bs2=x["BS2"],
        pair23_fidelity=0.95,
        pair45_fidelity=0.91,
        input_state_fidelity=0.92,
        oam_leakage=0.02,
        background=0.15,
    )


# ---------------------------------------------------------------------------
# feed-forward


def swap_gate(path: int) -> ModeTransform:
    """SAM <-> OAM swap from three CNOTs (SAM->OAM, OAM->SAM, SAM->OAM)."""
    core = compose(cnot_sam_to_oam(path), cnot_oam_to_sam(path), cnot_sam_to_oam(path))
    return localize(core, path, name=f"SWAP({path})")


def modulator(path: int, op: PauliOp | str) -> ModeTransform:
    """Polarization modulator applying a Pauli operator to the SAM qubit."""
    axis = op.axis if isinstance(op, PauliOp) else op
    return polarization_unitary(path, sam(axis).matrix, name=f"EOM({path},{axis})")


@dataclass(frozen=True)
class FeedForwardStep:
    kind: str  # "modulator" or "swap"
    setting: str
    transform: ModeTransform = field(compare=False, repr=False)


def feed_forward_plan(outcome: HyperBellLabel, path: int = OUTPUT) -> list[FeedForwardStep]:
    """Modulator, SWAP, modulator, SWAP: the second modulator acts on the swapped-in OAM qubit."""
    entry = correction_for_outcome(outcome)
    return [
        FeedForwardStep("modulator", entry.sam_op.axis, modulator(path, entry.sam_op)),
        FeedForwardStep("swap", "SWAP", swap_gate(path)),
        FeedForwardStep("modulator", entry.oam_op.axis, modulator(path, entry.oam_op.axis)),
        FeedForwardStep("swap", "SWAP", swap_gate(path)),
    ]


def run_feed_forward(state: PureState | MixedState, outcome: HyperBellLabel, path: int = OUTPUT):
    return apply_transform(state, [step.transform for step in feed_forward_plan(outcome, path)])
