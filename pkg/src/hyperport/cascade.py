"""Symbolic N-DoF hyper-Bell cascade and its amplitude-level cross-check."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .elements import beam_splitter, polarizer, wave_plate
from .errors import MismatchError
from .optical_state import H, V, ModeLabel, PureState, apply_transform

BELL = ("phi+", "phi-", "psi+", "psi-")
MAX_DOFS = 8

BellLabelVector = tuple  # tuple[str, ...]


def all_vectors(n: int) -> list[BellLabelVector]:
    if n < 1:
        raise ValueError("need at least one degree of freedom")
    return list(itertools.product(BELL, repeat=n))


def exchange_parity(v: BellLabelVector, erased: frozenset = frozenset()) -> str:
    """psi- is the only antisymmetric Bell state, so parity is the count of psi- mod 2.

    DoFs in ``erased`` have been filtered and flipped into a symmetric product
    state and no longer contribute.
    """
    odd = sum(1 for i, lab in enumerate(v) if lab == "psi-" and i not in erased) % 2
    return "antisymmetric" if odd else "symmetric"


def bs_filter(survivors, erased: frozenset = frozenset()) -> list[BellLabelVector]:
    return [v for v in survivors if exchange_parity(v, erased) == "antisymmetric"]


def dof_filter_and_flip(survivors, dof: int, erased: frozenset = frozenset()) -> tuple[list, frozenset]:
    """Keep psi+/psi- on ``dof``, then erase it."""
    kept = [v for v in survivors if v[dof] in ("psi+", "psi-")]
    return kept, erased | {dof}


@dataclass(frozen=True)
class CascadeStage:
    kind: str  # "source", "BS_filter", "DoF_filter", "QND"
    dof: int | None
    survivors_in: tuple
    survivors_out: tuple
    preserved: tuple = ()  # DoFs carried by a QND marker

    @property
    def filtering(self) -> bool:
        return self.kind in ("source", "BS_filter", "DoF_filter")


def run_cascade(n: int) -> list[CascadeStage]:
    if not 1 <= n <= MAX_DOFS:
        raise ValueError(f"cascade too large: N must lie in [1, {MAX_DOFS}]")
    current = tuple(all_vectors(n))
    erased: frozenset = frozenset()
    stages = [CascadeStage("source", None, (), current)]
    for k in range(n):
        if k > 0:
            stages.append(CascadeStage("QND", None, current, current, tuple(range(k, n))))
        nxt = tuple(bs_filter(current, erased))
        stages.append(CascadeStage("BS_filter", None, current, nxt))
        current = nxt
        if k < n - 1:
            kept, erased = dof_filter_and_flip(current, k, erased)
            stages.append(CascadeStage("DoF_filter", k, current, tuple(kept)))
            current = tuple(kept)
    return stages


def stage_counts(stages) -> list[int]:
    return [len(s.survivors_out) for s in stages if s.filtering]


def final_survivors(stages) -> tuple:
    return stages[-1].survivors_out


def antisymmetric_count(n: int) -> int:
    """Closed form for the first BS: (4^n - 2^n) / 2."""
    return (4**n - 2**n) // 2


# ---------------------------------------------------------------------------
# amplitude level, N <= 2: X is polarization, Y is a two-valued time-bin tag

_BELL_AMPS = {
    "phi+": {(0, 0): 1, (1, 1): 1},
    "phi-": {(0, 0): 1, (1, 1): -1},
    "psi+": {(0, 1): 1, (1, 0): 1},
    "psi-": {(0, 1): 1, (1, 0): -1},
}


def _mode(path: int, bits: tuple) -> ModeLabel:
    x = bits[0]
    y = bits[1] if len(bits) > 1 else 0
    return ModeLabel(path, pol=x, oam=0, wp=y)


def label_state(v: BellLabelVector) -> PureState:
    """Two photons on paths 1 and 2 in the hyper-Bell state ``v``."""
    terms = {}
    per_dof = [list(_BELL_AMPS[lab].items()) for lab in v]
    norm = 1 / math.sqrt(2) ** len(v)
    for combo in itertools.product(*per_dof):
        a_bits = tuple(pair[0] for pair, _ in combo)
        b_bits = tuple(pair[1] for pair, _ in combo)
        amp = norm * math.prod(c for _, c in combo)
        cfg = tuple(sorted((_mode(1, a_bits), _mode(2, b_bits))))
        terms[cfg] = terms.get(cfg, 0) + amp
    return PureState(terms)


def _coincident(state: PureState) -> PureState:
    terms = {c: a for c, a in state.terms.items() if sorted(m.path for m in c) == [1, 2]}
    return PureState._from_canonical(terms)


def _amplitude_stages(v: BellLabelVector) -> list[float]:
    """Surviving probability of ``v`` after each filtering stage."""
    state = label_state(v)
    bs = beam_splitter(1, 2, 1, 2)
    probs = []
    for k in range(len(v)):
        state = _coincident(apply_transform(state, bs))
        probs.append(state.norm_squared())
        if k < len(v) - 1:
            if k != 0:
                raise ValueError("amplitude check supports at most two DoFs")
            state = apply_transform(state, [polarizer(1, math.pi / 2), polarizer(2, 0.0)])
            state = apply_transform(state, wave_plate(1, "HWP", math.pi / 4))
            probs.append(state.norm_squared())
    return probs


@dataclass(frozen=True)
class AmplitudeCheckReport:
    n: int
    symbolic_counts: list
    amplitude_counts: list
    final: tuple = field(default=())


def amplitude_check(n: int, eps: float = 1e-12) -> AmplitudeCheckReport:
    if n not in (1, 2):
        raise ValueError("amplitude check is available for N = 1 or 2")
    stages = [s for s in run_cascade(n) if s.filtering]
    survivors = {v: _amplitude_stages(v) for v in all_vectors(n)}
    amp_counts = [4**n]
    for i, stage in enumerate(stages[1:]):
        amp_set = {v for v, probs in survivors.items() if all(p > eps for p in probs[: i + 1])}
        sym_set = set(stage.survivors_out)
        if amp_set != sym_set:
            raise MismatchError(
                f"stage {i + 1} ({stage.kind}) disagrees", sorted(amp_set ^ sym_set)
            )
        amp_counts.append(len(amp_set))
    return AmplitudeCheckReport(n, stage_counts(run_cascade(n)), amp_counts, tuple(stages[-1].survivors_out))
