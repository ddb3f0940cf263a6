"""Dense statevector simulation of quantum examples and the binary-to-multiclass
reduction circuit.

Qubit ordering is register-major in layout order and most-significant bit
first inside a register, so qubit 0 is the leading bit of the basis index and
a basis index is just the concatenation of the register values. Labels are
encoded big-endian in ``max(1, ceil(log2 k))`` bits; the x register likewise
uses ``max(1, ceil(log2 n))`` bits so that ``n = 1`` still has a register.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import Distribution
from .errors import CircuitFaultError, PreconditionError, SizeLimitError

MAX_QUBITS = 22
NORM_TOL = 1e-10
AMP_TOL = 1e-12


def bits_for(count: int) -> int:
    return max(1, math.ceil(math.log2(count))) if count > 1 else 1


@dataclass(frozen=True)
class RegisterLayout:
    """Named qubit registers plus the domain size ``n`` and label count ``k`` they encode."""

    registers: tuple[tuple[str, int], ...]
    n: int
    k: int

    def __post_init__(self):
        if self.num_qubits > MAX_QUBITS:
            raise SizeLimitError(f"layout needs {self.num_qubits} qubits, cap is {MAX_QUBITS}")
        names = [r for r, _ in self.registers]
        if len(set(names)) != len(names):
            raise PreconditionError("register names must be unique")

    @classmethod
    def example(cls, n: int, k: int) -> RegisterLayout:
        """``x`` and ``y`` registers for a (multiclass) quantum example."""
        return cls((("x", bits_for(n)), ("y", bits_for(k))), n, k)

    @classmethod
    def reduction(cls, n: int, k: int) -> RegisterLayout:
        """Registers used by the reduction circuit: x, y, notY, f0, f1, fy."""
        w = bits_for(k)
        return cls(
            (("x", bits_for(n)), ("y", 1), ("notY", 1), ("f0", w), ("f1", w), ("fy", w)),
            n,
            k,
        )

    @property
    def num_qubits(self) -> int:
        return sum(w for _, w in self.registers)

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    def width(self, name: str) -> int:
        return dict(self.registers)[name]

    def qubits(self, name: str) -> list[int]:
        start = 0
        for r, w in self.registers:
            if r == name:
                return list(range(start, start + w))
            start += w
        raise KeyError(name)

    def index(self, **values: int) -> int:
        """Basis index with the given register values (missing registers are 0)."""
        idx = 0
        for r, w in self.registers:
            v = values.get(r, 0)
            if not 0 <= v < 1 << w:
                raise PreconditionError(f"value {v} does not fit register {r} of width {w}")
            idx = (idx << w) | v
        return idx

    def decode(self, idx) -> dict[str, np.ndarray | int]:
        """Register values of one basis index (or an array of them)."""
        out = {}
        shift = self.num_qubits
        for r, w in self.registers:
            shift -= w
            out[r] = (idx >> shift) & ((1 << w) - 1)
        return out


class StateVector:
    """Normalised complex amplitude vector over a :class:`RegisterLayout`."""

    def __init__(self, amplitudes, layout: RegisterLayout, check: bool = True):
        amps = np.asarray(amplitudes, dtype=complex)
        if amps.shape != (layout.dim,):
            raise PreconditionError(f"expected {layout.dim} amplitudes, got {amps.shape}")
        if check:
            norm = np.linalg.norm(amps)
            if abs(norm - 1.0) > NORM_TOL:
                raise PreconditionError(f"state norm {norm} differs from 1 by more than {NORM_TOL}")
        self.amplitudes = amps
        self.layout = layout

    @classmethod
    def basis(cls, layout: RegisterLayout, **values: int) -> StateVector:
        amps = np.zeros(layout.dim, dtype=complex)
        amps[layout.index(**values)] = 1.0
        return cls(amps, layout)

    @property
    def num_qubits(self) -> int:
        return self.layout.num_qubits

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy(self) -> StateVector:
        return StateVector(self.amplitudes.copy(), self.layout, check=False)

    def _tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits)


def _check_qubits(state: StateVector, *qs: int) -> None:
    if len(set(qs)) != len(qs):
        raise PreconditionError(f"qubit indices collide: {qs}")
    for q in qs:
        if not 0 <= q < state.num_qubits:
            raise PreconditionError(f"qubit {q} out of range for {state.num_qubits} qubits")


def _controlled_flip(state: StateVector, controls: Sequence[int], target: int) -> StateVector:
    t = state._tensor().copy()
    sel = [slice(None)] * state.num_qubits
    for c in controls:
        sel[c] = 1
    sel = tuple(sel)
    axis = target - sum(1 for c in controls if c < target)
    t[sel] = np.flip(t[sel], axis=axis)
    return StateVector(t.reshape(-1), state.layout, check=False)


def apply_x(state: StateVector, qubit: int) -> StateVector:
    _check_qubits(state, qubit)
    return _controlled_flip(state, (), qubit)


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    _check_qubits(state, control, target)
    return _controlled_flip(state, (control,), target)


def apply_toffoli(state: StateVector, c1: int, c2: int, target: int) -> StateVector:
    _check_qubits(state, c1, c2, target)
    return _controlled_flip(state, (c1, c2), target)


@dataclass(frozen=True)
class TruthTable:
    """Total map from ``in_width``-bit inputs to ``out_width``-bit outputs."""

    in_width: int
    out_width: int
    table: tuple[int, ...]

    def __post_init__(self):
        if len(self.table) != 1 << self.in_width:
            raise PreconditionError(f"truth table needs {1 << self.in_width} rows, got {len(self.table)}")
        if any(not 0 <= v < 1 << self.out_width for v in self.table):
            raise PreconditionError(f"truth table output exceeds {self.out_width} bits")

    @classmethod
    def from_labels(cls, labels: Sequence[int], in_width: int, out_width: int) -> TruthTable:
        """``labels[a]`` for ``a < len(labels)``, 0 on the unused input patterns."""
        rows = [int(v) for v in labels] + [0] * ((1 << in_width) - len(labels))
        return cls(in_width, out_width, tuple(rows))

    def __call__(self, a: int) -> int:
        return self.table[a]


def _register_values(idx: np.ndarray, nq: int, qubits: Sequence[int]) -> np.ndarray:
    v = np.zeros_like(idx)
    for q in qubits:
        v = (v << 1) | ((idx >> (nq - 1 - q)) & 1)
    return v


def apply_xor_oracle(state: StateVector, f: TruthTable, in_register: Sequence[int], out_register: Sequence[int]) -> StateVector:
    """Basis action ``|a, b> -> |a, b xor f(a)>`` on the given qubit lists."""
    in_register, out_register = list(in_register), list(out_register)
    if len(in_register) != f.in_width or len(out_register) != f.out_width:
        raise PreconditionError(
            f"oracle is {f.in_width}->{f.out_width} bits but registers have "
            f"{len(in_register)} and {len(out_register)} qubits"
        )
    _check_qubits(state, *in_register, *out_register)
    nq = state.num_qubits
    idx = np.arange(state.layout.dim)
    fa = np.asarray(f.table)[_register_values(idx, nq, in_register)]
    flip = np.zeros_like(idx)
    for pos, q in enumerate(out_register):
        bit = (fa >> (len(out_register) - 1 - pos)) & 1
        flip |= bit << (nq - 1 - q)
    out = np.empty_like(state.amplitudes)
    out[idx ^ flip] = state.amplitudes
    return StateVector(out, state.layout, check=False)


def permute_register(state: StateVector, name: str, mapping: Sequence[int]) -> StateVector:
    """Relabel basis values of one register by a permutation of ``range(2**width)``."""
    w = state.layout.width(name)
    if sorted(mapping) != list(range(1 << w)):
        raise PreconditionError("register relabelling must be a permutation")
    idx = np.arange(state.layout.dim)
    vals = state.layout.decode(idx)[name]
    shift = state.num_qubits - state.layout.qubits(name)[-1] - 1
    new_idx = idx ^ ((vals ^ np.asarray(mapping)[vals]) << shift)
    out = np.empty_like(state.amplitudes)
    out[new_idx] = state.amplitudes
    return StateVector(out, state.layout, check=False)


def _check_fits(layout: RegisterLayout, n: int, labels: Sequence[int] = ()) -> None:
    if n > 1 << layout.width("x"):
        raise PreconditionError(f"x register of width {layout.width('x')} cannot hold {n} points")
    if labels and max(labels) >= 1 << layout.width("y"):
        raise PreconditionError(f"y register of width {layout.width('y')} cannot hold label {max(labels)}")


def prepare_realizable_example(D: Distribution, target: Sequence[int], layout: RegisterLayout) -> StateVector:
    """``sum_x sqrt(D(x)) |x, target(x)>`` with every other register at 0."""
    n = D.support_size
    if len(target) != n:
        raise PreconditionError(f"target has {len(target)} points, distribution {n}")
    _check_fits(layout, n, target)
    amps = np.zeros(layout.dim, dtype=complex)
    for x in range(n):
        amps[layout.index(x=x, y=int(target[x]))] = math.sqrt(D.probs[x])
    return StateVector(amps, layout)


def prepare_agnostic_example(D: Distribution, layout: RegisterLayout) -> StateVector:
    """``sum_{x,y} sqrt(D(x, y)) |x, y>`` for a joint ``D`` stored x-major over ``layout.n * layout.k``."""
    if D.support_size != layout.n * layout.k:
        raise PreconditionError(f"joint distribution must have {layout.n * layout.k} entries")
    _check_fits(layout, layout.n, [layout.k - 1])
    J = D.joint(layout.k)
    amps = np.zeros(layout.dim, dtype=complex)
    for x in range(layout.n):
        for y in range(layout.k):
            if J[x, y]:
                amps[layout.index(x=x, y=y)] = math.sqrt(J[x, y])
    return StateVector(amps, layout)


def _check_norm(state: StateVector) -> np.ndarray:
    p = state.probabilities()
    total = p.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise PreconditionError(f"cannot measure: state norm^2 is {total}")
    return np.cumsum(p / total)


def measure_computational(state: StateVector, rng: np.random.Generator) -> tuple[int, StateVector]:
    """Projective measurement of all qubits; returns the basis index and collapsed state."""
    cdf = _check_norm(state)
    m = int(min(np.searchsorted(cdf, rng.random(), side="right"), cdf.size - 1))
    return m, StateVector.basis(state.layout, **{r: int(v) for r, v in state.layout.decode(m).items()})


def sample_outcomes(state: StateVector, rng: np.random.Generator, shots: int) -> np.ndarray:
    """Basis indices from ``shots`` independent measurements of fresh copies."""
    cdf = _check_norm(state)
    return np.minimum(np.searchsorted(cdf, rng.random(shots), side="right"), cdf.size - 1)


def decode_example(layout: RegisterLayout, m: int) -> tuple[int, int]:
    """``(x, y)`` of a measured example; invalid patterns are a circuit fault."""
    vals = layout.decode(m)
    x, y = int(vals["x"]), int(vals["y"])
    others = [r for r, _ in layout.registers if r not in ("x", "y") and vals[r]]
    if x >= layout.n or y >= layout.k or others:
        raise CircuitFaultError(f"measured pattern {vals} is not a valid example")
    return x, y


def build_h_truth_table(f0: Sequence[int], f1: Sequence[int], k: int) -> TruthTable:
    """Boolean ``h(a, b, c)`` recovering ``y`` from ``(f0(x), f1(x), f_y(x))``.

    Realised triples ``(a, b, b)`` map to 1 and ``(a, b, a)`` to 0; every
    other input maps to 0. Input bits are the concatenation ``a | b | c``.
    """
    if len(f0) != len(f1):
        raise PreconditionError("witness maps differ in length")
    w = bits_for(k)
    rows = [0] * (1 << (3 * w))
    for a, b in zip(f0, f1):
        if a == b:
            raise PreconditionError(f"witnesses must disagree everywhere, both give {a}")
        rows[(a << 2 * w) | (b << w) | b] = 1
    return TruthTable(3 * w, 1, tuple(rows))


def _register_mass(state: StateVector, names: Sequence[str]) -> float:
    """Probability mass on basis states with any of ``names`` non-zero."""
    vals = state.layout.decode(np.arange(state.layout.dim))
    bad = np.zeros(state.layout.dim, dtype=bool)
    for r in names:
        bad |= vals[r] != 0
    return float(np.sqrt(np.sum(state.probabilities()[bad])))


def reduction_circuit(state: StateVector, f0: Sequence[int], f1: Sequence[int]) -> StateVector:
    """The bare gate sequence of the reduction circuit, applied without any checks.

    Being a product of permutation gates it is linear on arbitrary (even
    unnormalised) vectors, which is what the unitarity tests feed it.
    """
    layout = state.layout
    k = layout.k
    wx, w = layout.width("x"), layout.width("fy")
    X, Y, NY = layout.qubits("x"), layout.qubits("y")[0], layout.qubits("notY")[0]
    F0, F1, FY = layout.qubits("f0"), layout.qubits("f1"), layout.qubits("fy")
    U0 = TruthTable.from_labels(f0, wx, w)
    U1 = TruthTable.from_labels(f1, wx, w)
    Uh = build_h_truth_table(f0, f1, k)

    s = apply_x(state, NY)
    s = apply_cnot(s, Y, NY)
    s = apply_xor_oracle(s, U0, X, F0)
    s = apply_xor_oracle(s, U1, X, F1)
    for b1, by in zip(F1, FY):
        s = apply_toffoli(s, Y, b1, by)
    for b0, by in zip(F0, FY):
        s = apply_toffoli(s, NY, b0, by)
    s = apply_cnot(s, Y, NY)
    s = apply_x(s, NY)
    s = apply_xor_oracle(s, Uh, F0 + F1 + FY, [Y])
    # XOR oracles are self-inverse, so re-applying them uncomputes f0 and f1
    s = apply_xor_oracle(s, U0, X, F0)
    s = apply_xor_oracle(s, U1, X, F1)
    return s


def binary_to_multiclass_transform(state: StateVector, f0: Sequence[int], f1: Sequence[int], layout: RegisterLayout | None = None) -> StateVector:
    """Map ``sum_x sqrt(D(x)) |x, c(x)>`` to ``sum_x sqrt(D(x)) |x, f_{c(x)}(x)>``.

    The input lives in a :meth:`RegisterLayout.reduction` layout with all
    ancilla registers at 0. On return y, notY, f0 and f1 are back at 0 and the
    answer sits in the fy register.
    """
    layout = layout or state.layout
    if state.layout != layout or [r for r, _ in layout.registers] != ["x", "y", "notY", "f0", "f1", "fy"]:
        raise PreconditionError("state must use the reduction register layout")
    n, k = layout.n, layout.k
    if len(f0) != n or len(f1) != n:
        raise PreconditionError(f"witness maps must cover all {n} points")
    if any(a == b for a, b in zip(f0, f1)):
        raise PreconditionError("witnesses f0, f1 must disagree on every point")
    if max(max(f0), max(f1)) >= k or min(min(f0), min(f1)) < 0:
        raise PreconditionError(f"witness labels must lie in range({k})")
    if _register_mass(state, ("notY", "f0", "f1", "fy")) > AMP_TOL:
        raise PreconditionError("ancilla registers must start in |0>")
    x_vals = layout.decode(np.arange(layout.dim))["x"]
    if np.sqrt(np.sum(state.probabilities()[x_vals >= n])) > AMP_TOL:
        raise PreconditionError("input has amplitude on x values outside the domain")

    s = reduction_circuit(state, f0, f1)

    residual = _register_mass(s, ("y", "notY", "f0", "f1"))
    if residual > AMP_TOL:
        raise CircuitFaultError(f"ancilla residual amplitude {residual:.3e} after uncomputation")
    return s


def ancilla_residual(state: StateVector) -> float:
    """Amplitude norm outside the all-zero ancilla subspace of a reduction layout."""
    return _register_mass(state, ("y", "notY", "f0", "f1"))


def drop_ancillas(state: StateVector) -> StateVector:
    """Project a cleared reduction-layout state onto an example layout ``(x, y := fy)``."""
    layout = state.layout
    out_layout = RegisterLayout.example(layout.n, layout.k)
    if out_layout.width("x") != layout.width("x") or out_layout.width("y") != layout.width("fy"):
        raise PreconditionError("layouts are not compatible")
    residual = ancilla_residual(state)
    if residual > AMP_TOL:
        raise CircuitFaultError(f"cannot drop ancillas carrying amplitude {residual:.3e}")
    amps = np.zeros(out_layout.dim, dtype=complex)
    for x in range(1 << out_layout.width("x")):
        for c in range(1 << out_layout.width("y")):
            amps[out_layout.index(x=x, y=c)] = state.amplitudes[layout.index(x=x, fy=c)]
    return StateVector(amps, out_layout)


def embed(state: StateVector, layout: RegisterLayout) -> StateVector:
    """Append zeroed registers: ``state`` must use a prefix of ``layout``'s registers."""
    head = layout.registers[: len(state.layout.registers)]
    if head != state.layout.registers:
        raise PreconditionError("source registers must be a prefix of the target layout")
    extra = layout.num_qubits - state.num_qubits
    amps = np.zeros(layout.dim, dtype=complex)
    amps[np.arange(state.layout.dim) << extra] = state.amplitudes
    return StateVector(amps, layout, check=False)


QuantumLearner = Callable[[list, np.random.Generator], Sequence[int]]


def reduction_wrap_learner(A: QuantumLearner, f0: Sequence[int], f1: Sequence[int], S: Sequence[int], n: int, k: int) -> QuantumLearner:
    """Turn a multiclass quantum learner into a learner for all binary maps on ``range(len(S))``.

    ``A`` takes example states over ``range(n)`` with ``k`` labels and returns a
    hypothesis on ``range(n)``. ``S`` lists the N-shattered points and
    ``f0, f1`` the witness labels on them (``f0[i] = f0(S[i])``). The wrapped
    learner converts each binary example with the reduction circuit, moves
    index ``i`` to point ``S[i]``, runs ``A`` and answers
    ``f(i) = 1 iff g(S[i]) == f1[i]``.
    """
    d = len(S)
    if len(f0) != d or len(f1) != d or len(set(S)) != d:
        raise PreconditionError("S must be distinct points with one witness label each")
    if any(not 0 <= s < n for s in S):
        raise PreconditionError("S must lie in the learner's domain")
    red_layout = RegisterLayout.reduction(d, k)
    target_layout = RegisterLayout.example(n, k)
    wx = target_layout.width("x")
    if red_layout.width("x") > wx:
        raise PreconditionError("shattered set is larger than the learner's domain register")
    mapping = _complete_permutation(list(S), wx)

    def convert(binary_state: StateVector) -> StateVector:
        out = drop_ancillas(binary_to_multiclass_transform(embed(binary_state, red_layout), f0, f1))
        amps = np.zeros(target_layout.dim, dtype=complex)
        for x in range(d):
            for c in range(k):
                amps[target_layout.index(x=x, y=c)] = out.amplitudes[out.layout.index(x=x, y=c)]
        return permute_register(StateVector(amps, target_layout), "x", mapping)

    def learner(states: list, rng: np.random.Generator) -> tuple[int, ...]:
        g = A([convert(s) for s in states], rng)
        return tuple(int(g[S[i]] == f1[i]) for i in range(d))

    learner.convert = convert
    return learner


def _complete_permutation(prefix: list[int], width: int) -> list[int]:
    """Permutation of ``range(2**width)`` whose first entries are ``prefix``."""
    size = 1 << width
    taken = set(prefix)
    return prefix + [v for v in range(size) if v not in taken]
