"""Sparse second-quantized states over labeled optical modes.

A state is a map from occupation configurations (sorted tuples of
:class:`ModeLabel`) to complex amplitudes in the normalized Fock basis.
Linear optics acts by substituting every creation operator with a linear
combination of output creation operators, so bosonic symmetrization is
handled by the representation itself.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Callable, Iterable, Iterator, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import LeakageOutsideQubitSpace, NonUnitaryTransform, ZeroState

PRUNE_EPS = 1e-12
TOL = 1e-9

H, V = 0, 1
# qubit bit -> OAM quantum number: |0>o is l=+1 (right-handed), |1>o is l=-1
OAM_OF_BIT = (1, -1)
BIT_OF_OAM = {1: 0, -1: 1}


class ModeLabel(NamedTuple):
    """One optical mode. Tuple ordering gives the canonical configuration order."""

    path: int
    pol: int = H
    oam: int = 0
    wp: int = 0


Configuration = tuple  # tuple[ModeLabel, ...], always sorted


def configuration(modes: Iterable[ModeLabel]) -> Configuration:
    return tuple(sorted(modes))


def _factorial_weight(cfg: Configuration) -> int:
    """Product of n! over the occupation numbers of ``cfg``."""
    if len(set(cfg)) == len(cfg):
        return 1
    weight = 1
    for _, group in itertools.groupby(cfg):
        weight *= math.factorial(sum(1 for _ in group))
    return weight


class PureState:
    """Immutable sparse Fock-basis state.

    Amplitudes below ``prune_eps`` are dropped on construction. A state may be
    unnormalized: lossy elements and post-selection shrink the norm, and the
    squared norm is then the probability of the branch.
    """

    __slots__ = ("_terms", "prune_eps", "number_superposition")

    def __init__(
        self,
        terms: Mapping[Configuration, complex] | None = None,
        prune_eps: float = PRUNE_EPS,
        number_superposition: bool = False,
    ):
        merged: dict[Configuration, complex] = defaultdict(complex)
        for cfg, amp in (terms or {}).items():
            merged[configuration(cfg)] += complex(amp)
        cleaned = {cfg: amp for cfg, amp in merged.items() if abs(amp) >= prune_eps}
        if not number_superposition and len({len(cfg) for cfg in cleaned}) > 1:
            raise ValueError(
                "configurations with different photon numbers; "
                "pass number_superposition=True for source states"
            )
        self._terms = MappingProxyType(cleaned)
        self.prune_eps = prune_eps
        self.number_superposition = number_superposition

    @classmethod
    def _from_canonical(cls, terms, prune_eps=PRUNE_EPS, number_superposition=False):
        # skips re-sorting; callers guarantee sorted keys
        obj = cls.__new__(cls)
        obj._terms = MappingProxyType(
            {cfg: amp for cfg, amp in terms.items() if abs(amp) >= prune_eps}
        )
        obj.prune_eps = prune_eps
        obj.number_superposition = number_superposition or (
            len({len(cfg) for cfg in obj._terms}) > 1
        )
        return obj

    @classmethod
    def vacuum(cls) -> PureState:
        return cls({(): 1.0})

    @classmethod
    def zero(cls) -> PureState:
        """The annihilated state, used as the sentinel for probability-zero outcomes."""
        return cls({})

    @property
    def terms(self) -> Mapping[Configuration, complex]:
        return self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[tuple[Configuration, complex]]:
        return iter(self._terms.items())

    def __repr__(self) -> str:
        shown = ", ".join(f"{cfg}: {amp:.4g}" for cfg, amp in list(self._terms.items())[:4])
        more = "" if len(self) <= 4 else f", ... ({len(self)} terms)"
        return f"PureState({{{shown}{more}}})"

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def amplitude(self, cfg: Iterable[ModeLabel]) -> complex:
        return self._terms.get(configuration(cfg), 0j)

    @property
    def photon_number(self) -> int:
        counts = {len(cfg) for cfg in self._terms}
        if len(counts) != 1:
            raise ValueError("state has no definite photon number")
        return counts.pop()

    def paths(self) -> set[int]:
        return {m.path for cfg in self._terms for m in cfg}

    def norm_squared(self) -> float:
        return float(sum(abs(a) ** 2 for a in self._terms.values()))

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def scaled(self, factor: complex) -> PureState:
        return PureState._from_canonical(
            {c: a * factor for c, a in self._terms.items()},
            self.prune_eps,
            self.number_superposition,
        )

    def __mul__(self, factor: complex) -> PureState:
        return self.scaled(factor)

    __rmul__ = __mul__

    def __add__(self, other: PureState) -> PureState:
        terms = defaultdict(complex, self._terms)
        for cfg, amp in other._terms.items():
            terms[cfg] += amp
        return PureState._from_canonical(
            terms, self.prune_eps, self.number_superposition or other.number_superposition
        )

    def __sub__(self, other: PureState) -> PureState:
        return self + other.scaled(-1)

    def inner(self, other: PureState) -> complex:
        """<self|other>."""
        small, large = (self, other) if len(self) <= len(other) else (other, self)
        total = 0j
        for cfg in small._terms:
            if cfg in large._terms:
                total += self._terms[cfg].conjugate() * other._terms[cfg]
        return total

    def tensor(self, other: PureState) -> PureState:
        """Product state: apply the creation operators of ``other`` on top of ``self``."""
        out: dict[Configuration, complex] = defaultdict(complex)
        for c1, a1 in self._terms.items():
            w1 = _factorial_weight(c1)
            for c2, a2 in other._terms.items():
                cfg = tuple(sorted(c1 + c2))
                w = _factorial_weight(cfg)
                scale = 1.0 if w == 1 else math.sqrt(w / (w1 * _factorial_weight(c2)))
                out[cfg] += a1 * a2 * scale
        return PureState._from_canonical(
            out, self.prune_eps, self.number_superposition or other.number_superposition
        )

    def map_modes(self, fn: Callable[[ModeLabel], ModeLabel]) -> PureState:
        """Relabel modes with an injective map."""
        out: dict[Configuration, complex] = defaultdict(complex)
        for cfg, amp in self._terms.items():
            out[configuration(fn(m) for m in cfg)] += amp
        return PureState._from_canonical(out, self.prune_eps, self.number_superposition)


def overlap_modulus(a: PureState, b: PureState) -> float:
    """|<a|b>| / (|a| |b|): equals 1 iff the states agree up to global phase."""
    na, nb = a.norm(), b.norm()
    if na == 0 or nb == 0:
        return 0.0
    return abs(a.inner(b)) / (na * nb)


def normalize(state: PureState) -> PureState:
    n = state.norm()
    if n < state.prune_eps:
        raise ZeroState("state has no amplitude left to normalize")
    return state.scaled(1.0 / n)


def create(*photons: Mapping[ModeLabel, complex]) -> PureState:
    """Apply one creation operator per photon to the vacuum.

    Each photon is a single-photon superposition ``{mode: coefficient}``.
    The result is not normalized when photons share modes.
    """
    poly: dict[Configuration, complex] = defaultdict(complex)
    for combo in itertools.product(*(list(p.items()) for p in photons)):
        coeff = 1 + 0j
        for _, c in combo:
            coeff *= c
        poly[tuple(sorted(m for m, _ in combo))] += coeff
    return PureState._from_canonical(
        {cfg: c * math.sqrt(_factorial_weight(cfg)) for cfg, c in poly.items()}
    )


@dataclass(frozen=True)
class MixedState:
    """Weighted ensemble of pure states.

    Branch probability is ``weight * |state|^2``; :meth:`normalized` rescales
    so that weights sum to one and each state has unit norm.
    """

    branches: tuple = ()

    @classmethod
    def from_pure(cls, state: PureState, weight: float = 1.0) -> MixedState:
        return cls(((weight, state),))

    def __iter__(self):
        return iter(self.branches)

    def __len__(self) -> int:
        return len(self.branches)

    def total_probability(self) -> float:
        return float(sum(w * s.norm_squared() for w, s in self.branches))

    def normalized(self) -> MixedState:
        total = self.total_probability()
        if total <= 0:
            raise ZeroState("mixed state has zero total probability")
        out = []
        for w, s in self.branches:
            p = w * s.norm_squared()
            if p > 0:
                out.append((p / total, normalize(s)))
        return MixedState(tuple(out))

    def map(self, fn: Callable[[PureState], PureState]) -> MixedState:
        return MixedState(tuple((w, fn(s)) for w, s in self.branches))

    def __add__(self, other: MixedState) -> MixedState:
        return MixedState(self.branches + other.branches)


def as_mixed(state: PureState | MixedState) -> MixedState:
    return state if isinstance(state, MixedState) else MixedState.from_pure(state)


Image = tuple  # tuple[tuple[ModeLabel, complex], ...]


@dataclass(frozen=True, eq=False)
class ModeTransform:
    """Creation-operator substitution rule acting on the modes of ``domain_paths``.

    ``rule(mode)`` returns the output linear combination for an input mode whose
    path lies in the domain. Modes on other paths pass through unchanged.
    Lossy transforms map onto a subspace; the missing amplitude is the
    absorbed branch.
    """

    domain_paths: frozenset
    rule: Callable[[ModeLabel], Sequence[tuple[ModeLabel, complex]]]
    lossy: bool = False
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def image(self, mode: ModeLabel) -> Image | None:
        if mode.path not in self.domain_paths:
            return None
        try:
            return self._cache[mode]
        except KeyError:
            acc: dict[ModeLabel, complex] = defaultdict(complex)
            for out, c in self.rule(mode):
                acc[out] += c
            img = tuple((m, c) for m, c in sorted(acc.items()) if abs(c) >= PRUNE_EPS)
            self._cache[mode] = img
            return img

    def then(self, other: ModeTransform) -> ModeTransform:
        """Composite transform: ``self`` first, then ``other``."""
        first, second = self, other

        def rule(mode):
            img = first.image(mode)
            if img is None:
                img = ((mode, 1.0),)
            for m1, c1 in img:
                img2 = second.image(m1)
                if img2 is None:
                    yield m1, c1
                else:
                    for m2, c2 in img2:
                        yield m2, c1 * c2

        return ModeTransform(
            first.domain_paths | second.domain_paths,
            rule,
            lossy=first.lossy or second.lossy,
            name=f"{first.name}>{second.name}",
        )

    def gram(self, modes: Sequence[ModeLabel]) -> np.ndarray:
        modes = [m for m in modes if m.path in self.domain_paths]
        outputs: dict[ModeLabel, int] = {}
        for m in modes:
            for out, _ in self.image(m):
                outputs.setdefault(out, len(outputs))
        mat = np.zeros((len(outputs), len(modes)), dtype=complex)
        for j, m in enumerate(modes):
            for out, c in self.image(m):
                mat[outputs[out], j] = c
        return mat.conj().T @ mat

    def check(self, modes: Iterable[ModeLabel], tol: float = TOL) -> None:
        """Isometry check on the given input modes (sub-isometry if lossy)."""
        modes = sorted({m for m in modes if m.path in self.domain_paths})
        if not modes:
            return
        g = self.gram(modes)
        if self.lossy:
            worst = float(np.max(np.linalg.eigvalsh((g + g.conj().T) / 2)))
            if worst > 1 + tol:
                raise NonUnitaryTransform(
                    f"{self.name or 'transform'} amplifies: max singular value^2 {worst}"
                )
        else:
            err = float(np.max(np.abs(g - np.eye(len(modes)))))
            if err > tol:
                raise NonUnitaryTransform(
                    f"{self.name or 'transform'} is not an isometry (deviation {err:.3g}) "
                    "and was not declared lossy"
                )


def identity_transform() -> ModeTransform:
    return ModeTransform(frozenset(), lambda m: ((m, 1.0),), name="identity")


def compose(*transforms: ModeTransform) -> ModeTransform:
    """Sequential composition, first argument applied first."""
    if not transforms:
        return identity_transform()
    out = transforms[0]
    for t in transforms[1:]:
        out = out.then(t)
    return out


def apply_transform(
    state: PureState | MixedState, t: ModeTransform | Sequence[ModeTransform], check: bool = True
) -> PureState | MixedState:
    """Substitute every occupied creation operator with its image under ``t``.

    Mixed states are evolved branch by branch.
    """
    if isinstance(state, MixedState):
        return state.map(lambda s: apply_transform(s, t, check))
    if not isinstance(t, ModeTransform):
        for step in t:
            state = apply_transform(state, step, check)
        return state
    images: dict[ModeLabel, Image] = {}
    for cfg in state.terms:
        for m in cfg:
            if m not in images and m.path in t.domain_paths:
                images[m] = t.image(m)
    if check:
        t.check(images)
    poly: dict[Configuration, complex] = defaultdict(complex)
    for cfg, amp in state.terms.items():
        fixed = []
        factors = []
        for m in cfg:
            img = images.get(m)
            if img is None:
                fixed.append(m)
            else:
                factors.append(img)
        w = _factorial_weight(cfg)
        c0 = amp if w == 1 else amp / math.sqrt(w)
        if not factors:
            poly[cfg] += c0
            continue
        for combo in itertools.product(*factors):
            coeff = c0
            modes = list(fixed)
            for m, c in combo:
                coeff *= c
                modes.append(m)
            modes.sort()
            poly[tuple(modes)] += coeff
    out = {}
    for cfg, c in poly.items():
        w = _factorial_weight(cfg)
        out[cfg] = c if w == 1 else c * math.sqrt(w)
    return PureState._from_canonical(out, state.prune_eps, state.number_superposition)


def interfere(
    state: PureState | MixedState,
    t: ModeTransform,
    tag_path: int,
    overlap: float,
    tag: int,
) -> MixedState:
    """Apply ``t`` when the photons entering on ``tag_path`` only partly overlap the others.

    With weight ``overlap`` the element acts coherently. Otherwise the
    photons from ``tag_path`` carry a distinguishing wavepacket tag; the output
    is split by which path the tagged photon took, and the tag is cleared
    wherever the tagged photon ended up alone on its path so that later
    elements see an ordinary photon.
    """
    if not 0 <= overlap <= 1:
        raise ValueError("overlap must lie in [0, 1]")
    branches = []
    for w, s in as_mixed(state):
        if overlap > 0:
            branches.append((w * overlap, apply_transform(s, t)))
        if overlap >= 1:
            continue
        marked = s.map_modes(lambda m: m._replace(wp=tag) if m.path == tag_path else m)
        out = apply_transform(marked, t)
        groups: dict[tuple, dict] = defaultdict(dict)
        for cfg, amp in out.terms.items():
            where = tuple(sorted(m.path for m in cfg if m.wp == tag))
            groups[where][cfg] = amp
        for where, terms in sorted(groups.items()):
            cleared: dict[Configuration, complex] = defaultdict(complex)
            for cfg, amp in terms.items():
                alone = all(sum(1 for m in cfg if m.path == p) == 1 for p in where)
                if alone:
                    cfg = configuration(m._replace(wp=0) if m.wp == tag else m for m in cfg)
                cleared[cfg] += amp
            branches.append(
                (w * (1 - overlap), PureState._from_canonical(cleared, s.prune_eps, s.number_superposition))
            )
    return MixedState(tuple(branches))


@dataclass(frozen=True)
class PathConstraint:
    """Exact photon count on one path, optionally restricted to one pol/OAM value."""

    path: int
    count: int
    pol: int | None = None
    oam: int | None = None

    def selects(self, mode: ModeLabel) -> bool:
        return (
            mode.path == self.path
            and (self.pol is None or mode.pol == self.pol)
            and (self.oam is None or mode.oam == self.oam)
        )


@dataclass(frozen=True)
class DetectionPattern:
    constraints: tuple = ()

    def __post_init__(self):
        keys = [(c.path, c.pol, c.oam) for c in self.constraints]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate constraint in detection pattern")
        if any(c.count < 0 for c in self.constraints):
            raise ValueError("photon counts must be non-negative")

    @classmethod
    def counts(cls, counts: Mapping[int, int]) -> DetectionPattern:
        return cls(tuple(PathConstraint(p, n) for p, n in sorted(counts.items())))

    @classmethod
    def coincidence(cls, *paths: int) -> DetectionPattern:
        return cls.counts({p: 1 for p in paths})

    def matches(self, cfg: Configuration) -> bool:
        for c in self.constraints:
            if sum(1 for m in cfg if c.selects(m)) != c.count:
                return False
        return True


def project(state: PureState, pattern: DetectionPattern) -> tuple[float, PureState]:
    """Post-select on ``pattern``.

    Returns the squared norm of the matching component and that component
    normalized. Detected photons stay in the conditional state; reduced-state
    extraction traces them out. A zero-probability outcome returns
    ``PureState.zero()``.
    """
    kept = {cfg: amp for cfg, amp in state.terms.items() if pattern.matches(cfg)}
    part = PureState._from_canonical(kept, state.prune_eps, state.number_superposition)
    p = part.norm_squared()
    if p < state.prune_eps**2:
        return 0.0, PureState.zero()
    return p, part.scaled(1 / math.sqrt(p))


def filter_state(state: PureState, pattern: DetectionPattern) -> PureState:
    """Unnormalized matching component of ``state``."""
    kept = {cfg: amp for cfg, amp in state.terms.items() if pattern.matches(cfg)}
    return PureState._from_canonical(kept, state.prune_eps, state.number_superposition)


def measure(
    state: PureState, paths: Iterable[int]
) -> dict[Configuration, PureState]:
    """Mode-resolving photon-number measurement of every mode on ``paths``.

    Returns a map from the detected sub-configuration to the unnormalized
    post-measurement state of the remaining photons; its squared norm is the
    outcome probability.
    """
    paths = set(paths)
    groups: dict[Configuration, dict] = defaultdict(lambda: defaultdict(complex))
    for cfg, amp in state.terms.items():
        seen = tuple(m for m in cfg if m.path in paths)
        rest = tuple(m for m in cfg if m.path not in paths)
        # measured and unmeasured modes are disjoint, so the Fock factors split
        groups[seen][rest] += amp
    return {
        seen: PureState._from_canonical(dict(rest), state.prune_eps, True)
        for seen, rest in groups.items()
    }


def contract(state: PureState, bra: PureState, paths: Iterable[int]) -> PureState:
    """Partial inner product <bra| on ``paths``; remaining photons form the result."""
    paths = set(paths)
    out: dict[Configuration, complex] = defaultdict(complex)
    for cfg, amp in state.terms.items():
        sub = tuple(m for m in cfg if m.path in paths)
        b = bra.terms.get(sub)
        if b is None:
            continue
        rest = tuple(m for m in cfg if m.path not in paths)
        out[rest] += b.conjugate() * amp
    return PureState._from_canonical(out, state.prune_eps, state.number_superposition)


# ---------------------------------------------------------------------------
# SAM x OAM qubit pair of a single photon


def qubit_mode(path: int, sam: int, oam_bit: int, wp: int = 0) -> ModeLabel:
    return ModeLabel(path, sam, OAM_OF_BIT[oam_bit], wp)


def qubit_index(mode: ModeLabel) -> int | None:
    """Index in the basis |0s0o>, |0s1o>, |1s0o>, |1s1o>; None outside the qubit space."""
    b = BIT_OF_OAM.get(mode.oam)
    if b is None:
        return None
    return 2 * mode.pol + b


def photon_from_vector(vec: Sequence[complex], path: int, wp: int = 0) -> PureState:
    """Single photon on ``path`` whose SAM x OAM qubit pair holds ``vec``."""
    vec = np.asarray(vec, dtype=complex)
    if vec.shape != (4,):
        raise ValueError("expected a 4-component qubit-pair vector")
    terms = {}
    for idx, amp in enumerate(vec):
        terms[(qubit_mode(path, idx // 2, idx % 2, wp),)] = amp
    return PureState(terms)


def vector_from_photon(state: PureState, path: int) -> np.ndarray:
    """Inverse of :func:`photon_from_vector` for a lone photon on ``path``."""
    vec = np.zeros(4, dtype=complex)
    for cfg, amp in state.terms.items():
        if len(cfg) != 1 or cfg[0].path != path:
            raise ValueError("state is not a single photon on the given path")
        idx = qubit_index(cfg[0])
        if idx is None:
            raise LeakageOutsideQubitSpace("photon outside qubit space", abs(amp) ** 2)
        vec[idx] += amp
    return vec


@dataclass(frozen=True, eq=False)
class QubitPairDensity:
    """4x4 density matrix of one photon's SAM x OAM qubits.

    ``leakage`` is the weight discarded outside the qubit space before
    renormalization (zero unless leakage was explicitly allowed).
    """

    rho: np.ndarray
    leakage: float = 0.0

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if rho.shape != (4, 4):
            raise ValueError("density matrix must be 4x4")
        if np.max(np.abs(rho - rho.conj().T)) > TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1) > TOL:
            raise ValueError(f"density matrix trace {np.trace(rho).real} != 1")
        if np.min(np.linalg.eigvalsh(rho)) < -TOL:
            raise ValueError("density matrix is not positive semidefinite")
        object.__setattr__(self, "rho", rho)

    @classmethod
    def pure(cls, vec: Sequence[complex]) -> QubitPairDensity:
        v = np.asarray(vec, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls) -> QubitPairDensity:
        return cls(np.eye(4) / 4)

    def mix(self, other: QubitPairDensity, weight: float) -> QubitPairDensity:
        """(1 - weight) * self + weight * other."""
        return QubitPairDensity((1 - weight) * self.rho + weight * other.rho, self.leakage)


def extract_qubit_pair_density(
    state: PureState | MixedState, path: int, allow_leakage: bool = False
) -> QubitPairDensity:
    """Reduced SAM x OAM density matrix of the single photon on ``path``.

    Every other photon, and the photon's own wavepacket tag, is traced out.
    """
    rho = np.zeros((4, 4), dtype=complex)
    leaked = 0.0
    for weight, branch in as_mixed(state):
        env: dict[tuple, np.ndarray] = {}
        for cfg, amp in branch.terms.items():
            on_path = [m for m in cfg if m.path == path]
            if len(on_path) != 1:
                raise ValueError(f"expected exactly one photon on path {path}, found {len(on_path)}")
            m = on_path[0]
            rest = tuple(x for x in cfg if x.path != path)
            idx = qubit_index(m)
            if idx is None:
                leaked += weight * abs(amp) ** 2
                continue
            key = (rest, m.wp)
            vec = env.get(key)
            if vec is None:
                vec = env[key] = np.zeros(4, dtype=complex)
            vec[idx] += amp
        for vec in env.values():
            rho += weight * np.outer(vec, vec.conj())
    kept = float(np.trace(rho).real)
    total = kept + leaked
    if total <= 0:
        raise ZeroState("no photon weight on the requested path")
    if leaked / total > TOL and not allow_leakage:
        raise LeakageOutsideQubitSpace(
            f"{leaked / total:.3g} of the weight on path {path} is outside l = +/-1",
            leaked / total,
        )
    if kept <= 0:
        raise ZeroState("all weight leaked outside the qubit space")
    rho = rho / kept
    rho = (rho + rho.conj().T) / 2
    return QubitPairDensity(rho, leakage=leaked / total)


def fidelity(rho: QubitPairDensity, target: Sequence[complex] | PureState, path: int | None = None) -> float:
    """Tr(rho |target><target|) for a normalized target."""
    if isinstance(target, PureState):
        if path is None:
            paths = target.paths()
            if len(paths) != 1:
                raise ValueError("target photon path is ambiguous")
            path = paths.pop()
        target = vector_from_photon(target, path)
    v = np.asarray(target, dtype=complex)
    if abs(np.linalg.norm(v) - 1) > TOL:
        raise ValueError("target must be normalized")
    return float(np.real(v.conj() @ rho.rho @ v))


# ---------------------------------------------------------------------------
# Pauli operators

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
# (a, b) -> (phase, c) with sigma_a sigma_b = phase * sigma_c
_PAULI_PRODUCT = {}
for _a, _b in itertools.product("IXYZ", repeat=2):
    _m = _PAULI[_a] @ _PAULI[_b]
    for _c in "IXYZ":
        _ph = np.trace(_PAULI[_c].conj().T @ _m) / 2
        if abs(_ph) > 0.5:
            _PAULI_PRODUCT[_a, _b] = (complex(np.round(_ph)), _c)


@dataclass(frozen=True)
class PauliOp:
    dof: str  # "SAM" or "OAM"
    axis: str  # "I", "X", "Y", "Z"

    def __post_init__(self):
        if self.dof not in ("SAM", "OAM"):
            raise ValueError(f"unknown degree of freedom {self.dof!r}")
        if self.axis not in _PAULI:
            raise ValueError(f"unknown Pauli axis {self.axis!r}")

    @property
    def matrix(self) -> np.ndarray:
        return _PAULI[self.axis]

    def compose(self, other: PauliOp) -> tuple[complex, PauliOp]:
        """self * other = phase * result."""
        if self.dof != other.dof:
            raise ValueError("Pauli operators act on different degrees of freedom")
        phase, axis = _PAULI_PRODUCT[self.axis, other.axis]
        return phase, PauliOp(self.dof, axis)

    def __str__(self) -> str:
        return "I" if self.axis == "I" else f"sigma_{self.axis.lower()}^{self.dof[0].lower()}"


def sam(axis: str) -> PauliOp:
    return PauliOp("SAM", axis)


def oam(axis: str) -> PauliOp:
    return PauliOp("OAM", axis)


def pauli_pair_matrix(a: PauliOp, b: PauliOp) -> np.ndarray:
    if a.dof != "SAM" or b.dof != "OAM":
        raise ValueError("expected (SAM, OAM) operator pair")
    return np.kron(a.matrix, b.matrix)


def pauli_expectation(rho: QubitPairDensity, a: PauliOp, b: PauliOp) -> float:
    return float(np.real(np.trace(rho.rho @ pauli_pair_matrix(a, b))))


def local_unitary(path: int, u: np.ndarray, name: str = "local") -> ModeTransform:
    """Act with a 4x4 matrix on the SAM x OAM qubits of photons on ``path``.

    Modes outside the qubit space pass through unchanged.
    """
    u = np.asarray(u, dtype=complex)

    def rule(mode):
        idx = qubit_index(mode)
        if idx is None:
            return ((mode, 1.0),)
        return tuple(
            (qubit_mode(path, j // 2, j % 2, mode.wp), u[j, idx])
            for j in range(4)
            if abs(u[j, idx]) > PRUNE_EPS
        )

    return ModeTransform(frozenset([path]), rule, name=name)


def pauli_transform(path: int, sam_op: PauliOp | str = "I", oam_op: PauliOp | str = "I") -> ModeTransform:
    if isinstance(sam_op, str):
        sam_op = sam(sam_op)
    if isinstance(oam_op, str):
        oam_op = oam(oam_op)
    return local_unitary(path, pauli_pair_matrix(sam_op, oam_op), name=f"pauli({sam_op},{oam_op})")
