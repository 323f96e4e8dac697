import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperport.errors import ZeroState
from hyperport.measurement import OUTPUT
from hyperport.optical_state import apply_transform, overlap_modulus, photon_from_vector, vector_from_photon
from hyperport.protocol import (
    COHERENCE_TIME_FS,
    INTERFEROMETERS,
    NoiseParams,
    apply_readout_noise,
    calibrated_noise,
    feed_forward_plan,
    hom_coincidences,
    hom_scan,
    modulator,
    overlap_at,
    overlap_for_visibility,
    run_teleportation,
    run_teleportation_per_outcome,
    swap_gate,
    teleport_outcomes,
    visibility_at_overlap,
)
from hyperport.sources import INPUT_IDS, HyperBellLabel, PHI_MINUS_OMEGA_PLUS, PHI_PLUS_OMEGA_MINUS, input_vector

DEGRADATIONS = {
    "overlap_pbs": (1.0, 0.9, 0.7),
    "overlap_bs1": (1.0, 0.9, 0.7),
    "overlap_bs2": (1.0, 0.9, 0.7),
    "pair23_fidelity": (1.0, 0.95, 0.85),
    "pair45_fidelity": (1.0, 0.95, 0.85),
    "input_state_fidelity": (1.0, 0.95, 0.85),
    "oam_leakage": (0.0, 0.05, 0.2),
    "background": (0.0, 0.05, 0.2),
}


def test_noise_params_validation():
    with pytest.raises(ValueError):
        NoiseParams(overlap_pbs=1.2)
    with pytest.raises(ValueError):
        NoiseParams(mu_per_source=(0.1, -0.1, 0.0))
    with pytest.raises(ValueError):
        NoiseParams(pair45_fidelity=0.1)
    assert NoiseParams.ideal() == NoiseParams()
    assert NoiseParams().to_dict()["mu_per_source"] == [0.0, 0.0, 0.0]


@pytest.mark.parametrize("sid", INPUT_IDS)
def test_ideal_run_per_outcome(sid):
    reports = run_teleportation_per_outcome(sid)
    assert [r.outcome for r in reports] == sorted([PHI_MINUS_OMEGA_PLUS, PHI_PLUS_OMEGA_MINUS])
    for r in reports:
        assert r.fidelity == pytest.approx(1.0, abs=1e-9)
        assert r.success_probability == pytest.approx(1 / 64, abs=1e-9)


def test_single_outcome_selection():
    r = run_teleportation("C", outcome=PHI_PLUS_OMEGA_MINUS)
    assert r.outcome == PHI_PLUS_OMEGA_MINUS
    assert r.success_probability == pytest.approx(1 / 64)
    assert r.to_dict()["outcome"] == "phi+,omega-"


def test_unknown_input_rejected():
    with pytest.raises(ValueError):
        run_teleportation("Q")


@pytest.mark.parametrize("name", sorted(DEGRADATIONS))
def test_fidelity_monotone_in_each_degradation(name):
    values = DEGRADATIONS[name]
    curves = {sid: [run_teleportation(sid, NoiseParams(**{name: v})).fidelity for v in values] for sid in INPUT_IDS}
    for sid, fs in curves.items():
        assert all(b <= a + 1e-12 for a, b in zip(fs, fs[1:])), (sid, fs)
    # every parameter hurts at least one of the five states
    assert any(fs[-1] < fs[0] - 1e-6 for fs in curves.values())


def test_pbs_distinguishability_spares_a_and_b():
    noise = NoiseParams(overlap_pbs=0.6)
    for sid in "AB":
        assert run_teleportation(sid, noise).fidelity == pytest.approx(1.0, abs=1e-9)
    for sid in "CDE":
        assert run_teleportation(sid, noise).fidelity < 1 - 1e-3


def test_bs_distinguishability_acts_as_correlated_phase_flip():
    # the two heralded labels get confused; their corrections differ by Z x Z
    noise = NoiseParams(overlap_bs1=0.0)
    rho = run_teleportation("C", noise).rho.rho
    c = input_vector("C")
    zz = np.diag([1, -1, -1, 1])
    expected = 0.5 * np.outer(c, c.conj()) + 0.5 * np.outer(zz @ c, (zz @ c).conj())
    assert np.allclose(rho, expected, atol=1e-9)


@settings(max_examples=15, deadline=None)
@given(b=st.floats(0.0, 1.0), sid=st.sampled_from(INPUT_IDS))
def test_background_mixing_law(b, sid):
    base = NoiseParams(overlap_pbs=0.85)
    f0 = run_teleportation(sid, base).fidelity
    f = run_teleportation(sid, replace(base, background=b)).fidelity
    assert f == pytest.approx((1 - b) * f0 + b / 4, abs=1e-12)


def test_readout_noise_channels():
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1
    leaked = apply_readout_noise(rho, NoiseParams(oam_leakage=0.2))
    assert np.allclose(np.diag(leaked).real, [0.9, 0.1, 0, 0])
    mixed = apply_readout_noise(rho, NoiseParams(background=1.0))
    assert np.allclose(mixed, np.eye(4) / 4)


def test_lossy_elements_keep_fidelity_and_cut_rate():
    ideal = run_teleportation("E")
    lossy = run_teleportation("E", NoiseParams(lossy_elements=True))
    assert lossy.fidelity == pytest.approx(1.0, abs=1e-9)
    assert lossy.success_probability < ideal.success_probability


def test_teleport_outcomes_unnormalized_trace():
    for label, (p, rho) in teleport_outcomes("D").items():
        assert np.trace(rho).real == pytest.approx(p)


def test_zero_overlap_everywhere_still_heralds():
    noise = NoiseParams(overlap_pbs=0.0, overlap_bs1=0.0, overlap_bs2=0.0)
    r = run_teleportation("A", noise)
    assert r.success_probability > 0
    assert 0 <= r.fidelity <= 1 + 1e-9


# HOM


def test_overlap_profile():
    assert overlap_at(0.0) == pytest.approx(1.0)
    assert overlap_at(COHERENCE_TIME_FS) == pytest.approx(math.exp(-0.5))
    assert overlap_at(0.0, max_overlap=0.8) == pytest.approx(0.8)


@pytest.mark.parametrize("name", INTERFEROMETERS)
def test_visibility_equals_overlap(name):
    for x in (0.0, 0.3, 0.75, 1.0):
        assert visibility_at_overlap(name, x) == pytest.approx(x, abs=1e-9)


def test_bs_coincidence_levels():
    assert hom_coincidences("BS1", 1.0)[0] == pytest.approx(0.0, abs=1e-12)
    assert hom_coincidences("BS1", 0.0)[0] == pytest.approx(0.5)


def test_pbs_coincidence_levels():
    c_plus, c_par = hom_coincidences("PBS", 1.0)
    assert (c_plus, c_par) == pytest.approx((0.25, 0.0), abs=1e-12)
    c_plus0, c_par0 = hom_coincidences("PBS", 0.0)
    assert c_plus0 == pytest.approx(c_par0)


@pytest.mark.parametrize("name", INTERFEROMETERS)
@pytest.mark.parametrize("target", [0.75, 0.73, 0.69, 0.2])
def test_visibility_inversion_roundtrip(name, target):
    assert visibility_at_overlap(name, overlap_for_visibility(name, target)) == pytest.approx(target, abs=1e-9)


def test_unreachable_visibility():
    with pytest.raises(ValueError):
        overlap_for_visibility("BS2", 1.5)


def test_scan_shape():
    scan = hom_scan("bs2", [-900, 0, 900], max_overlap=0.69)
    assert scan.interferometer == "BS2"
    assert scan.formula == "dip"
    assert scan.visibility == pytest.approx(0.69)
    assert scan.coincidences[0] == pytest.approx(scan.coincidences[2])
    assert scan.coincidences[1] < scan.coincidences[0]
    pbs = hom_scan("PBS", [0.0])
    assert pbs.formula == "dip_peak"
    assert pbs.to_dict()["visibility"] == pytest.approx(1.0)


# calibration


def test_calibrated_presets():
    hom = calibrated_noise("hom")
    assert hom.overlap_pbs == pytest.approx(0.75)
    assert calibrated_noise("budget").background == 0.15
    with pytest.raises(ValueError):
        calibrated_noise("guess")


# feed-forward


def test_swap_truth_table_exact():
    gate = swap_gate(OUTPUT)
    perm = {0: 0, 1: 2, 2: 1, 3: 3}
    for j, k in perm.items():
        out = apply_transform(photon_from_vector(np.eye(4)[j], OUTPUT), gate)
        assert np.allclose(vector_from_photon(out, OUTPUT), np.eye(4)[k])


def test_modulator_is_sam_pauli():
    out = apply_transform(photon_from_vector(np.eye(4)[0], 3), modulator(3, "X"))
    assert np.allclose(vector_from_photon(out, 3), np.eye(4)[2])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_swap_is_an_involution(seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    s = photon_from_vector(v / np.linalg.norm(v), OUTPUT)
    gate = swap_gate(OUTPUT)
    assert overlap_modulus(apply_transform(s, [gate, gate]), s) >= 1 - 1e-9


def test_feed_forward_plan_settings():
    plan = feed_forward_plan(PHI_PLUS_OMEGA_MINUS)
    assert [(s.kind, s.setting) for s in plan] == [("modulator", "Z"), ("swap", "SWAP"), ("modulator", "Z"), ("swap", "SWAP")]


def test_zero_state_when_nothing_heralds():
    # (psi-, chi-) never carries a signature
    with pytest.raises(ZeroState):
        run_teleportation("A", outcome=HyperBellLabel("psi-", "chi-"))
