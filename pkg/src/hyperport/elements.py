"""Linear-optical elements as creation-operator substitution rules.

Conventions: transmission keeps (pol, oam); reflection at a BS or PBS
multiplies by ``i`` and flips the OAM sign. Angles are in radians.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .optical_state import H, V, ModeLabel, ModeTransform, PRUNE_EPS, compose

SQ2 = 1 / math.sqrt(2)

SPP_EFFICIENCY = 0.97
BPP_EFFICIENCY = 0.80
SORTER_EFFICIENCY = 0.97

# internal scratch paths for interferometers that need a second arm
_SCRATCH_BASE = 1_000_000


def _scratch(path: int, k: int) -> int:
    return _SCRATCH_BASE + 16 * path + k


def _distinct(*paths: int) -> None:
    if len(set(paths)) != len(paths):
        raise ValueError(f"paths must be distinct, got {paths}")


def localize(t: ModeTransform, in_path: int, out_path: int | None = None, name: str = "") -> ModeTransform:
    """Restrict a multi-path composite to photons entering on ``in_path``.

    Scratch paths used inside the composite disappear from the domain, so
    the result is cheap to apply and to check.
    """
    out_path = in_path if out_path is None else out_path

    def rule(mode):
        img = t.image(mode)
        if img is None:
            img = ((mode, 1.0),)
        for m, c in img:
            if m.path != out_path:
                if abs(c) > PRUNE_EPS:
                    raise ValueError(f"{name or t.name}: amplitude escaped to path {m.path}")
                continue
            yield m, c

    return ModeTransform(frozenset([in_path]), rule, lossy=t.lossy, name=name or t.name)


def beam_splitter(in1: int, in2: int, out1: int, out2: int) -> ModeTransform:
    """50:50 beam splitter. ``in1`` transmits to ``out1`` and reflects to ``out2``."""
    _distinct(in1, in2)
    _distinct(out1, out2)

    def rule(m: ModeLabel):
        through, across = (out1, out2) if m.path == in1 else (out2, out1)
        return (
            (ModeLabel(through, m.pol, m.oam, m.wp), SQ2),
            (ModeLabel(across, m.pol, -m.oam, m.wp), 1j * SQ2),
        )

    return ModeTransform(frozenset([in1, in2]), rule, name=f"BS({in1},{in2})")


def polarizing_beam_splitter(in1: int, in2: int, out1: int, out2: int) -> ModeTransform:
    """H is transmitted (in1 -> out1), V is reflected with factor i and l -> -l."""
    _distinct(in1, in2)
    _distinct(out1, out2)

    def rule(m: ModeLabel):
        through, across = (out1, out2) if m.path == in1 else (out2, out1)
        if m.pol == H:
            return ((ModeLabel(through, m.pol, m.oam, m.wp), 1.0),)
        return ((ModeLabel(across, m.pol, -m.oam, m.wp), 1j),)

    return ModeTransform(frozenset([in1, in2]), rule, name=f"PBS({in1},{in2})")


def polarizer(path: int, angle: float) -> ModeTransform:
    """Projects polarization onto cos(angle) H + sin(angle) V; the rest is absorbed."""
    c, s = math.cos(angle), math.sin(angle)

    def rule(m: ModeLabel):
        amp = c if m.pol == H else s
        return (
            (ModeLabel(path, H, m.oam, m.wp), amp * c),
            (ModeLabel(path, V, m.oam, m.wp), amp * s),
        )

    return ModeTransform(frozenset([path]), rule, lossy=True, name=f"POL({path},{angle:.4g})")


def jones_matrix(kind: str, angle: float) -> np.ndarray:
    """Jones matrix of a half- or quarter-wave plate with fast axis at ``angle``."""
    c, s = math.cos(angle), math.sin(angle)
    kind = kind.upper()
    if kind == "HWP":
        c2, s2 = math.cos(2 * angle), math.sin(2 * angle)
        return np.array([[c2, s2], [s2, -c2]], dtype=complex)
    if kind == "QWP":
        return cmath.exp(-1j * math.pi / 4) * np.array(
            [[c * c + 1j * s * s, (1 - 1j) * s * c], [(1 - 1j) * s * c, s * s + 1j * c * c]]
        )
    raise ValueError(f"unknown wave plate kind {kind!r}")


def polarization_unitary(path: int, u: np.ndarray, name: str = "jones", lossy: bool = False) -> ModeTransform:
    u = np.asarray(u, dtype=complex)

    def rule(m: ModeLabel):
        return tuple(
            (ModeLabel(path, p, m.oam, m.wp), u[p, m.pol]) for p in (H, V) if abs(u[p, m.pol]) > PRUNE_EPS
        )

    return ModeTransform(frozenset([path]), rule, lossy=lossy, name=name)


def wave_plate(path: int, kind: str, angle: float) -> ModeTransform:
    return polarization_unitary(path, jones_matrix(kind, angle), name=f"{kind.upper()}({path},{angle:.4g})")


def phase_shift(path: int, phase: float, pol: int | None = None, oam: int | None = None) -> ModeTransform:
    """Phase ``e^{i phase}`` on the modes of ``path`` matching the optional pol/OAM filter."""
    factor = cmath.exp(1j * phase)

    def rule(m: ModeLabel):
        hit = (pol is None or m.pol == pol) and (oam is None or m.oam == oam)
        return ((m, factor if hit else 1.0),)

    return ModeTransform(frozenset([path]), rule, name=f"PS({path},{phase:.4g})")


def mirror(path: int) -> ModeTransform:
    """A reflection off a plain mirror: l -> -l."""
    return ModeTransform(
        frozenset([path]), lambda m: ((m._replace(oam=-m.oam), 1.0),), name=f"MIRROR({path})"
    )


def spiral_phase_plate(
    path: int, l: int = 1, direction: str = "forward", efficiency: float = 1.0
) -> ModeTransform:
    """Adds ``l`` units of OAM on a forward pass, removes them on a backward pass."""
    if l < 1 or int(l) != l:
        raise ValueError("topological charge must be a positive integer")
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be 'forward' or 'backward'")
    step = l if direction == "forward" else -l
    amp = math.sqrt(efficiency)
    return ModeTransform(
        frozenset([path]),
        lambda m: ((m._replace(oam=m.oam + step), amp),),
        lossy=efficiency < 1,
        name=f"SPP({path},{step:+d})",
    )


BPP_TARGETS = {
    "+": (SQ2, SQ2),
    "-": (SQ2, -SQ2),
    "+i": (SQ2, 1j * SQ2),
    "-i": (SQ2, -1j * SQ2),
}


def binary_phase_plate(path: int, target: str = "+", efficiency: float = 1.0) -> ModeTransform:
    """BPP followed by a single-mode fiber.

    The target superposition of l = +1 and l = -1 is converted to l = 0 and
    kept; anything orthogonal to it, and any other l, is filtered out.
    """
    try:
        a0, a1 = BPP_TARGETS[target]
    except KeyError:
        raise ValueError(f"BPP target must be one of {sorted(BPP_TARGETS)}") from None
    amp = math.sqrt(efficiency)
    weights = {1: np.conj(a0), -1: np.conj(a1)}

    def rule(m: ModeLabel):
        w = weights.get(m.oam)
        if w is None:
            return ()
        return ((m._replace(oam=0), amp * w),)

    return ModeTransform(frozenset([path]), rule, lossy=True, name=f"BPP({path},{target})")


def dove_prism(path: int, angle: float = 0.0, invert: bool = False) -> ModeTransform:
    """OAM-dependent phase e^{-2i l angle}; with ``invert`` also flips l -> -l."""

    def rule(m: ModeLabel):
        phase = cmath.exp(-2j * m.oam * angle)
        return ((m._replace(oam=-m.oam if invert else m.oam), phase),)

    return ModeTransform(frozenset([path]), rule, name=f"DOVE({path},{angle:.4g}{',inv' if invert else ''})")


def _pbs_loop(
    path: int,
    h_arm: Callable[[int], Sequence[ModeTransform]],
    v_arm: Callable[[int], Sequence[ModeTransform]],
    tag: int,
) -> ModeTransform:
    """Split on a PBS, run each arm, recombine on a PBS back onto ``path``.

    The arm callables receive the scratch path of their arm.
    """
    aux, arm_h, arm_v, dump = (_scratch(path, tag + k) for k in range(4))
    return compose(
        polarizing_beam_splitter(path, aux, arm_h, arm_v),
        *h_arm(arm_h),
        *v_arm(arm_v),
        polarizing_beam_splitter(arm_h, arm_v, path, dump),
    )


def oam_sagnac_sorter(in_path: int, out_path: int | None = None, efficiency: float = 1.0) -> ModeTransform:
    """OAM-controlled NOT on the SAM qubit.

    HWP(22.5 deg), a Sagnac loop with a Dove prism at -pi/8, QWP(45 deg) and
    a pi/2 phase on V. On the qubit subspace:
    |s, o> -> e^{i pi/4 (-1)^o} |s xor o, o>.
    """
    out_path = in_path if out_path is None else out_path
    p = in_path
    stages = [
        wave_plate(p, "HWP", math.pi / 8),
        _pbs_loop(p, lambda a: [dove_prism(a, -math.pi / 8)], lambda a: [dove_prism(a, -math.pi / 8)], 0),
        wave_plate(p, "QWP", math.pi / 4),
        phase_shift(p, math.pi / 2, pol=V),
    ]
    core = compose(*stages)
    local = localize(core, p, p, name=f"SORTER({p})")
    amp = math.sqrt(efficiency)

    def rule(m: ModeLabel):
        return tuple((x._replace(path=out_path), c * amp) for x, c in local.image(m))

    return ModeTransform(frozenset([in_path]), rule, lossy=efficiency < 1, name=f"SORTER({in_path})")


def cnot_sam_to_oam(path: int) -> ModeTransform:
    """SAM-controlled OAM flip: PBS loop with an inverting Dove prism in the V arm."""
    core = compose(
        wave_plate(path, "HWP", 0.0),
        _pbs_loop(path, lambda a: [], lambda a: [dove_prism(a, 0.0, invert=True)], 4),
    )
    return localize(core, path, name=f"CNOT_SO({path})")


def cnot_oam_to_sam(path: int) -> ModeTransform:
    """OAM-controlled SAM flip: the Sagnac sorter plus a Dove prism undoing its phases."""
    core = compose(oam_sagnac_sorter(path), dove_prism(path, math.pi / 8))
    return localize(core, path, name=f"CNOT_OS({path})")


def dual_channel_readout(path: int, plus_path: int, minus_path: int, efficiency: float = 1.0) -> ModeTransform:
    """Sorter then PBS: l = +1 lands on ``plus_path``, l = -1 on ``minus_path``.

    The photon's SAM must be H on entry.
    """
    _distinct(path, plus_path, minus_path)
    aux = _scratch(path, 12)
    return compose(
        oam_sagnac_sorter(path, efficiency=efficiency),
        polarizing_beam_splitter(path, aux, plus_path, minus_path),
    )


@dataclass(frozen=True)
class ElementSpec:
    """Declarative element description, as used in circuit files."""

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)
    in_paths: tuple = ()
    out_paths: tuple = ()

    KINDS = (
        "BS", "PBS", "Polarizer", "HWP", "QWP", "SPP", "BPP",
        "DovePrism", "PhaseShift", "OamSagnacSorter", "Mirror",
    )

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown element kind {self.kind!r}")
        object.__setattr__(self, "in_paths", tuple(self.in_paths))
        object.__setattr__(self, "out_paths", tuple(self.out_paths or self.in_paths))
        need = 2 if self.kind in ("BS", "PBS") else 1
        if len(self.in_paths) != need or len(self.out_paths) != need:
            raise ValueError(f"{self.kind} needs {need} input and output path(s)")

    @property
    def lossy(self) -> bool:
        return self.build().lossy

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> ElementSpec:
        data = dict(data)
        try:
            kind = data.pop("kind")
        except KeyError:
            raise ValueError("element entry is missing 'kind'") from None
        in_paths = data.pop("in", data.pop("in_paths", ()))
        out_paths = data.pop("out", data.pop("out_paths", ()))
        if isinstance(in_paths, int):
            in_paths = (in_paths,)
        if isinstance(out_paths, int):
            out_paths = (out_paths,)
        return cls(kind, data, tuple(in_paths), tuple(out_paths))

    def build(self) -> ModeTransform:
        k, p = self.kind, self.params
        i, o = self.in_paths, self.out_paths
        angle = float(p.get("angle", 0.0))
        eff = float(p.get("efficiency", 1.0))
        if k == "BS":
            return beam_splitter(i[0], i[1], o[0], o[1])
        if k == "PBS":
            return polarizing_beam_splitter(i[0], i[1], o[0], o[1])
        if i[0] != o[0] and k != "OamSagnacSorter":
            raise ValueError(f"{k} acts in place; in and out path must agree")
        if k == "Polarizer":
            return polarizer(i[0], angle)
        if k in ("HWP", "QWP"):
            return wave_plate(i[0], k, angle)
        if k == "SPP":
            return spiral_phase_plate(i[0], int(p.get("l", 1)), p.get("direction", "forward"), eff)
        if k == "BPP":
            return binary_phase_plate(i[0], p.get("target", "+"), float(p.get("efficiency", 1.0)))
        if k == "DovePrism":
            return dove_prism(i[0], angle, bool(p.get("invert", False)))
        if k == "PhaseShift":
            return phase_shift(i[0], float(p.get("phase", 0.0)), p.get("pol"), p.get("oam"))
        if k == "Mirror":
            return mirror(i[0])
        return oam_sagnac_sorter(i[0], o[0], eff)
