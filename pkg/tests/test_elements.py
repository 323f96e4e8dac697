import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperport.elements import (
    ElementSpec,
    beam_splitter,
    binary_phase_plate,
    cnot_oam_to_sam,
    cnot_sam_to_oam,
    dove_prism,
    dual_channel_readout,
    jones_matrix,
    mirror,
    oam_sagnac_sorter,
    phase_shift,
    polarizer,
    polarizing_beam_splitter,
    spiral_phase_plate,
    wave_plate,
)
from hyperport.optical_state import H, V, ModeLabel, PureState, apply_transform, photon_from_vector, vector_from_photon

S = 1 / math.sqrt(2)


def one(path, pol=H, oam=0):
    return PureState({(ModeLabel(path, pol, oam),): 1.0})


def qubit_matrix(t, path=1):
    cols = []
    for j in range(4):
        cols.append(vector_from_photon(apply_transform(photon_from_vector(np.eye(4)[j], path), t), path))
    return np.array(cols).T


# oracle matrices on the basis index 2*sam + oam_bit (bit 0 is l = +1)
CNOT_SAM_CONTROL = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
CNOT_OAM_CONTROL = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]])


@pytest.mark.parametrize("l", [-1, 0, 1, 2])
def test_beam_splitter_single_photon(l):
    out = apply_transform(one(1, V, l), beam_splitter(1, 2, 3, 4))
    assert out.amplitude([ModeLabel(3, V, l)]) == pytest.approx(S)
    assert out.amplitude([ModeLabel(4, V, -l)]) == pytest.approx(1j * S)
    assert len(out) == 2


def test_pbs_routes_by_polarization():
    pbs = polarizing_beam_splitter(1, 2, 3, 4)
    assert apply_transform(one(1, H, 1), pbs).amplitude([ModeLabel(3, H, 1)]) == pytest.approx(1)
    assert apply_transform(one(1, V, 1), pbs).amplitude([ModeLabel(4, V, -1)]) == pytest.approx(1j)
    assert apply_transform(one(2, V, -1), pbs).amplitude([ModeLabel(3, V, 1)]) == pytest.approx(1j)


def test_beam_splitter_needs_distinct_paths():
    with pytest.raises(ValueError):
        beam_splitter(1, 1, 2, 3)


@settings(max_examples=25, deadline=None)
@given(theta=st.floats(-math.pi, math.pi))
def test_polarizer_malus_law(theta):
    out = apply_transform(one(1, H), polarizer(1, theta))
    assert out.norm_squared() == pytest.approx(math.cos(theta) ** 2, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(theta=st.floats(-math.pi, math.pi), kind=st.sampled_from(["HWP", "QWP"]))
def test_wave_plates_are_unitary(theta, kind):
    j = jones_matrix(kind, theta)
    assert np.allclose(j.conj().T @ j, np.eye(2))


def test_hwp_at_22_5_makes_diagonal():
    assert np.allclose(jones_matrix("HWP", math.pi / 8) @ [1, 0], [S, S])
    assert np.allclose(jones_matrix("HWP", math.pi / 4) @ [1, 0], [0, 1])


def test_qwp_at_45_makes_circular():
    out = jones_matrix("QWP", math.pi / 4) @ [1, 0]
    assert abs(out[1] / out[0]) == pytest.approx(1)
    assert cmath.phase(out[1] / out[0]) == pytest.approx(-math.pi / 2)


def test_unknown_wave_plate():
    with pytest.raises(ValueError):
        jones_matrix("FWP", 0)


def test_phase_shift_selective():
    t = phase_shift(1, 0.3, pol=V)
    assert apply_transform(one(1, H), t).amplitude([ModeLabel(1, H)]) == pytest.approx(1)
    assert apply_transform(one(1, V), t).amplitude([ModeLabel(1, V)]) == pytest.approx(cmath.exp(0.3j))


def test_mirror_flips_oam():
    assert apply_transform(one(1, H, 1), mirror(1)).amplitude([ModeLabel(1, H, -1)]) == pytest.approx(1)


def test_spiral_phase_plate_and_efficiency():
    out = apply_transform(one(1, H, 0), spiral_phase_plate(1, 1, "forward", 0.81))
    assert out.amplitude([ModeLabel(1, H, 1)]) == pytest.approx(0.9)
    back = apply_transform(one(1, H, 1), spiral_phase_plate(1, 1, "backward"))
    assert back.amplitude([ModeLabel(1, H, 0)]) == pytest.approx(1)
    with pytest.raises(ValueError):
        spiral_phase_plate(1, 0)


@pytest.mark.parametrize("target,vec", [("+", [S, S]), ("-", [S, -S]), ("+i", [S, 1j * S]), ("-i", [S, -1j * S])])
def test_binary_phase_plate_selects_target(target, vec):
    state = PureState({(ModeLabel(1, H, 1),): vec[0], (ModeLabel(1, H, -1),): vec[1]})
    assert apply_transform(state, binary_phase_plate(1, target)).norm_squared() == pytest.approx(1)
    orth = PureState({(ModeLabel(1, H, 1),): np.conj(vec[1]), (ModeLabel(1, H, -1),): -np.conj(vec[0])})
    assert apply_transform(orth, binary_phase_plate(1, target)).norm_squared() == pytest.approx(0, abs=1e-20)
    assert apply_transform(one(1, H, 2), binary_phase_plate(1, target)).is_zero


def test_dove_prism_phase_and_inversion():
    assert apply_transform(one(1, H, 2), dove_prism(1, 0.1)).amplitude([ModeLabel(1, H, 2)]) == pytest.approx(
        cmath.exp(-0.4j)
    )
    assert apply_transform(one(1, H, 1), dove_prism(1, 0, True)).amplitude([ModeLabel(1, H, -1)]) == pytest.approx(1)


def test_sorter_matrix():
    # |s, o> -> e^{i pi/4 (-1)^o} |s xor o, o>
    expected = np.zeros((4, 4), dtype=complex)
    for s in (0, 1):
        for o in (0, 1):
            expected[2 * (s ^ o) + o, 2 * s + o] = cmath.exp(1j * math.pi / 4 * (-1) ** o)
    assert np.allclose(qubit_matrix(oam_sagnac_sorter(1)), expected)


def test_cnot_gates_exact():
    assert np.allclose(qubit_matrix(cnot_sam_to_oam(1)), CNOT_SAM_CONTROL)
    assert np.allclose(qubit_matrix(cnot_oam_to_sam(1)), CNOT_OAM_CONTROL)


@pytest.mark.parametrize("bit,l", [(0, 1), (1, -1)])
def test_dual_channel_readout_routes_oam(bit, l):
    out = apply_transform(one(1, H, l), dual_channel_readout(1, 10, 11))
    paths = {m.path for c in out.terms for m in c}
    assert paths == {10 if bit == 0 else 11}
    assert out.norm_squared() == pytest.approx(1)
    lossy = apply_transform(one(1, H, l), dual_channel_readout(1, 10, 11, efficiency=0.9))
    assert lossy.norm_squared() == pytest.approx(0.9)


def test_element_spec_from_dict():
    spec = ElementSpec.from_dict({"kind": "HWP", "in": 2, "angle": math.pi / 8})
    assert spec.out_paths == (2,)
    assert not spec.lossy
    assert ElementSpec.from_dict({"kind": "Polarizer", "in": 1}).lossy
    out = apply_transform(one(2, H), spec.build())
    assert np.allclose([out.amplitude([ModeLabel(2, p)]) for p in (H, V)], [S, S])
    bs = ElementSpec.from_dict({"kind": "BS", "in": [1, 2], "out": [3, 4]}).build()
    assert apply_transform(one(1), bs).norm_squared() == pytest.approx(1)


def test_element_spec_validation():
    with pytest.raises(ValueError):
        ElementSpec("Laser", {}, (1,))
    with pytest.raises(ValueError):
        ElementSpec("BS", {}, (1,))
    with pytest.raises(ValueError):
        ElementSpec.from_dict({"in": 1})
    with pytest.raises(ValueError):
        ElementSpec("HWP", {}, (1,), (2,)).build()
