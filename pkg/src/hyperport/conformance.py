"""Reference output tables for two-photon interference on a PBS and a BS.

Each expected state is written as a sum of two-photon creation monomials,
``coeff * (pol matrix) x (oam matrix)`` on a pair of output paths, and
compared with the simulated output up to a global phase.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass

import numpy as np

from .elements import beam_splitter, polarizing_beam_splitter
from .optical_state import (
    PureState,
    _factorial_weight,
    apply_transform,
    overlap_modulus,
    qubit_mode,
    TOL,
)
from .sources import HyperBellLabel, OAM_LABELS, bell_vector, hyper_bell_state, two_photon_state

SQ2 = 1 / math.sqrt(2)
_D = np.array([1, 1]) * SQ2
_A = np.array([1, -1]) * SQ2
_R = np.array([1, 0])
_L = np.array([0, 1])


def _pair(u, v) -> np.ndarray:
    return np.outer(u, v)


def _bell(label: str) -> np.ndarray:
    return bell_vector(label).reshape(2, 2)


def monomial_state(terms) -> PureState:
    """Sum of ``coeff * sum_{ab,cd} P[a,b] O[c,d] a+(p1,a,c) a+(p2,b,d)`` terms.

    ``terms`` holds (coeff, p1, p2, P, O) tuples; p1 may equal p2.
    """
    poly: dict = {}
    for coeff, p1, p2, pol, oam in terms:
        for a, b, c, d in itertools.product((0, 1), repeat=4):
            w = coeff * pol[a, b] * oam[c, d]
            if w == 0:
                continue
            cfg = tuple(sorted((qubit_mode(p1, a, c), qubit_mode(p2, b, d))))
            poly[cfg] = poly.get(cfg, 0) + w
    return PureState({cfg: c * math.sqrt(_factorial_weight(cfg)) for cfg, c in poly.items()})


def _same_output(coeff, sign, pol, oam):
    return [(coeff, 1, 1, pol, oam), (sign * coeff, 2, 2, pol, oam)]


def pbs_expected() -> dict[HyperBellLabel, PureState]:
    """Published output of the PBS for the 16 hyper-Bell inputs (paths 1, 2 in and out)."""
    par = (_pair(_D, _D) + _pair(_A, _A)) * SQ2
    cross = (_pair(_D, _A) + _pair(_A, _D)) * SQ2
    dd_aa = _pair(_D, _D) - _pair(_A, _A)
    da_ad = _pair(_D, _A) - _pair(_A, _D)
    rl = _pair(_R, _L)
    rr_ll_p = _pair(_R, _R) + _pair(_L, _L)
    rr_ll_m = _pair(_R, _R) - _pair(_L, _L)
    L = HyperBellLabel
    table = {
        L("phi-", "omega+"): [(1, 1, 2, par, _bell("omega+"))],
        L("phi+", "omega-"): [(1, 1, 2, par, _bell("omega-"))],
        L("phi-", "chi+"): [(1, 1, 2, par, _bell("chi+"))],
        L("phi-", "chi-"): [(1, 1, 2, par, _bell("chi-"))],
        L("phi+", "omega+"): [(1, 1, 2, cross, _bell("omega+"))],
        L("phi-", "omega-"): [(1, 1, 2, cross, _bell("omega-"))],
        L("phi+", "chi+"): [(1, 1, 2, cross, _bell("chi+"))],
        L("phi+", "chi-"): [(1, 1, 2, cross, _bell("chi-"))],
        L("psi+", "omega+"): _same_output(0.5j, +1, dd_aa, rl),
        L("psi-", "omega+"): _same_output(0.5j, -1, dd_aa, rl),
        L("psi+", "omega-"): _same_output(0.5j, +1, da_ad, rl),
        L("psi-", "omega-"): _same_output(0.5j, -1, da_ad, rl),
        L("psi+", "chi+"): _same_output(0.25j, +1, dd_aa, rr_ll_p),
        L("psi-", "chi+"): _same_output(0.25j, -1, dd_aa, rr_ll_p),
        L("psi+", "chi-"): _same_output(0.25j, -1, dd_aa, rr_ll_m),
        L("psi-", "chi-"): _same_output(0.25j, +1, dd_aa, rr_ll_m),
    }
    return {label: monomial_state(terms) for label, terms in table.items()}


def bs_expected() -> dict[str, PureState]:
    """Output of a 50:50 BS for the four OAM Bell states of two H photons.

    The omega+ row has both photons leaving the same port with orthogonal
    OAM, which is what makes it distinguishable from omega-.
    """
    h = _pair(np.array([1, 0]), np.array([1, 0]))
    rl = _pair(_R, _L)
    rr_ll_p = _pair(_R, _R) + _pair(_L, _L)
    rr_ll_m = _pair(_R, _R) - _pair(_L, _L)
    table = {
        "omega+": _same_output(1j * SQ2, +1, h, rl),
        "omega-": [(1, 1, 2, h, _bell("omega-"))],
        "chi+": _same_output(0.5j * SQ2, +1, h, rr_ll_p),
        "chi-": _same_output(0.5j * SQ2, -1, h, rr_ll_m),
    }
    return {label: monomial_state(terms) for label, terms in table.items()}


def oam_bell_pair(label: str, paths=(1, 2)) -> PureState:
    """Two H photons in an OAM Bell state."""
    full = np.zeros(16, dtype=complex)
    vec = bell_vector(label)
    for o1, o2 in itertools.product((0, 1), repeat=2):
        full[4 * o1 + o2] = vec[2 * o1 + o2]
    return two_photon_state(full, paths)


@dataclass(frozen=True)
class ConformanceRow:
    label: str
    overlap: float
    coincidence_probability: float
    relative_phase: complex  # <expected|actual>, a unit number when matched

    @property
    def match(self) -> bool:
        return self.overlap >= 1 - TOL

    @property
    def status(self) -> str:
        return "MATCH" if self.match else "MISMATCH"


def _coincidence(state: PureState) -> float:
    return sum(
        abs(a) ** 2 for cfg, a in state.terms.items() if sorted(m.path for m in cfg) == [1, 2]
    )


def _row(label: str, actual: PureState, expected: PureState) -> ConformanceRow:
    ov = overlap_modulus(actual, expected)
    phase = expected.inner(actual) / (expected.norm() * actual.norm())
    return ConformanceRow(label, ov, _coincidence(actual), complex(phase))


def pbs_conformance() -> list[ConformanceRow]:
    pbs = polarizing_beam_splitter(1, 2, 1, 2)
    expected = pbs_expected()
    return [
        _row(str(label), apply_transform(hyper_bell_state(label, (1, 2)), pbs), expected[label])
        for label in HyperBellLabel.all()
    ]


def bs_conformance() -> list[ConformanceRow]:
    bs = beam_splitter(1, 2, 1, 2)
    expected = bs_expected()
    return [_row(label, apply_transform(oam_bell_pair(label), bs), expected[label]) for label in OAM_LABELS]


def timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start
