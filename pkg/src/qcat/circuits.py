"""Gate sequences for the map algorithm: modular adders, full iterations, state prep, QFT.

Register layout on 3*n_q - 1 qubits (qubit 0 is the least significant bit of x):

    x reg:     qubits 0 .. n_q-1
    y reg:     qubits n_q .. 2*n_q-1
    carries:   qubits 2*n_q .. 3*n_q-2   (c_1 .. c_{n_q-1}, workspace)

Basis index = x + n*y + n^2*c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import LatticeSpec

NOT = "NOT"
HADAMARD = "HADAMARD"
CNOT = "CNOT"
TOFFOLI = "TOFFOLI"
PHASE = "PHASE"
CPHASE = "CPHASE"

GATE_KINDS = (NOT, HADAMARD, CNOT, TOFFOLI, PHASE, CPHASE)
_ARITY = {NOT: 1, HADAMARD: 1, CNOT: 2, TOFFOLI: 3, PHASE: 1, CPHASE: 2}
_HAS_THETA = (PHASE, CPHASE)
# Kinds whose action on a computational basis state is another basis state.
BASIS_KINDS = (NOT, CNOT, TOFFOLI)


@dataclass(frozen=True)
class Gate:
    """One gate: controls first, target last in `qubits`."""

    kind: str
    qubits: tuple[int, ...]
    theta: float = 0.0

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.qubits) != _ARITY[self.kind]:
            raise ValueError(f"{self.kind} takes {_ARITY[self.kind]} qubits, got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"duplicate qubits in {self.kind} gate: {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ValueError(f"negative qubit id in {self.qubits}")

    @property
    def target(self) -> int:
        return self.qubits[-1]

    @property
    def controls(self) -> tuple[int, ...]:
        return self.qubits[:-1]

    def inverse(self) -> "Gate":
        if self.kind in _HAS_THETA:
            return Gate(self.kind, self.qubits, -self.theta)
        return self  # NOT/HADAMARD/CNOT/TOFFOLI are self-inverse


def gate_not(target: int) -> Gate:
    return Gate(NOT, (target,))


def hadamard(target: int) -> Gate:
    return Gate(HADAMARD, (target,))


def cnot(control: int, target: int) -> Gate:
    return Gate(CNOT, (control, target))


def toffoli(control1: int, control2: int, target: int) -> Gate:
    return Gate(TOFFOLI, (control1, control2, target))


def phase(theta: float, target: int) -> Gate:
    return Gate(PHASE, (target,), theta)


def cphase(theta: float, control: int, target: int) -> Gate:
    return Gate(CPHASE, (control, target), theta)


@dataclass(frozen=True)
class Circuit:
    qubit_count: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        for g in self.gates:
            if max(g.qubits) >= self.qubit_count:
                raise ValueError(f"gate {g} references qubit >= {self.qubit_count}")

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        if self.qubit_count != other.qubit_count:
            raise ValueError("cannot concatenate circuits with different qubit counts")
        return Circuit(self.qubit_count, self.gates + other.gates)

    def inverse(self) -> "Circuit":
        return Circuit(self.qubit_count, tuple(g.inverse() for g in reversed(self.gates)))

    def pretty(self) -> str:
        """One gate per line: `KIND q_a [q_b [q_c]] [theta]`, stable ordering."""
        lines = []
        for g in self.gates:
            parts = [g.kind] + [str(q) for q in g.qubits]
            if g.kind in _HAS_THETA:
                parts.append(f"{g.theta:.12g}")
            lines.append(" ".join(parts))
        return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class GateCount:
    counts: dict[str, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __getitem__(self, kind: str) -> int:
        return self.counts.get(kind, 0)

    @property
    def toffoli(self) -> int:
        return self[TOFFOLI]

    @property
    def cnot(self) -> int:
        return self[CNOT]


def count_gates(circuit: Circuit) -> GateCount:
    counts: dict[str, int] = {}
    for g in circuit.gates:
        counts[g.kind] = counts.get(g.kind, 0) + 1
    return GateCount(counts)


def registers(spec: LatticeSpec):
    """(x, y, carry) qubit-id tuples for the fixed layout."""
    n_q = spec.n_q
    x = tuple(range(n_q))
    y = tuple(range(n_q, 2 * n_q))
    carry = tuple(range(2 * n_q, 3 * n_q - 1))
    return x, y, carry


def mod_adder(src, dst, carry, qubit_count: int) -> Circuit:
    """Ripple-carry adder computing dst := (dst + src) mod 2**n.

    Carries ripple forward through the workspace; the top sum bit absorbs
    the final carry, which realizes the modulus; the backward sweep
    uncomputes the workspace and writes the remaining sum bits.  src and
    carry come back bit-identical on every basis input.

    Gate cost for n >= 2: 4n-6 TOFFOLI and 4n-5 CNOT; n == 1 degenerates
    to a single CNOT.
    """
    a, b = tuple(src), tuple(dst)
    n = len(a)
    if len(b) != n:
        raise ValueError(f"register widths differ: {len(a)} vs {len(b)}")
    expected_carry = 0 if n == 1 else n - 1
    if len(carry) != expected_carry:
        raise ValueError(f"need {expected_carry} carry qubits for width {n}, got {len(carry)}")
    used = a + b + tuple(carry)
    if len(set(used)) != len(used):
        raise ValueError("src, dst and carry registers must be disjoint")

    if n == 1:
        return Circuit(qubit_count, (cnot(a[0], b[0]),))

    c = (None,) + tuple(carry)  # c[k] holds carry into bit k, 1-indexed
    g: list[Gate] = []
    g.append(toffoli(a[0], b[0], c[1]))
    for i in range(1, n - 1):
        g.append(toffoli(a[i], b[i], c[i + 1]))
        g.append(cnot(a[i], b[i]))
        g.append(toffoli(c[i], b[i], c[i + 1]))
    g.append(cnot(a[n - 1], b[n - 1]))
    g.append(cnot(c[n - 1], b[n - 1]))
    for i in range(n - 2, 0, -1):
        g.append(toffoli(c[i], b[i], c[i + 1]))
        g.append(cnot(a[i], b[i]))
        g.append(toffoli(a[i], b[i], c[i + 1]))
        g.append(cnot(a[i], b[i]))
        g.append(cnot(c[i], b[i]))
    g.append(toffoli(a[0], b[0], c[1]))
    g.append(cnot(a[0], b[0]))
    return Circuit(qubit_count, tuple(g))


def cat_iteration(spec: LatticeSpec) -> Circuit:
    """One forward map iteration: add x into y (kick), then y into x (rotation)."""
    x, y, carry = registers(spec)
    m = spec.qubits
    return mod_adder(x, y, carry, m) + mod_adder(y, x, carry, m)


def cat_iteration_reversed(spec: LatticeSpec) -> Circuit:
    """Factor-swapped iteration (rotation first); same adders, same gate counts."""
    x, y, carry = registers(spec)
    m = spec.qubits
    return mod_adder(y, x, carry, m) + mod_adder(x, y, carry, m)


def line_prep(spec: LatticeSpec) -> Circuit:
    """Prepare the x = 1/2 line state from |0..0>: n_q + 1 single-qubit gates.

    NOT on the top x bit sets x = n/2; Hadamards spread y uniformly.
    """
    x, y, _ = registers(spec)
    gates = (gate_not(x[spec.n_q - 1]),) + tuple(hadamard(q) for q in y)
    return Circuit(spec.qubits, gates)


def qft(register, qubit_count: int) -> Circuit:
    """Fourier transform on `register` (LSB first); output bits come out reversed.

    Frequency w ends up at the bit-reversed index, saving the swap network;
    consumers relabel via bit_reverse.
    """
    reg = tuple(register)
    gates: list[Gate] = []
    for k in range(len(reg) - 1, -1, -1):
        gates.append(hadamard(reg[k]))
        for m in range(1, k + 1):
            gates.append(cphase(math.pi / (1 << m), reg[k - m], reg[k]))
    return Circuit(qubit_count, tuple(gates))


def bit_reverse(values, bits: int):
    """Reverse the low `bits` bits of an integer or integer array."""
    v = np.asarray(values)
    out = np.zeros_like(v)
    for b in range(bits):
        out |= ((v >> b) & 1) << (bits - 1 - b)
    if np.isscalar(values) or np.ndim(values) == 0:
        return int(out)
    return out


def apply_to_basis(circuit: Circuit, indices):
    """Propagate computational-basis indices through NOT/CNOT/TOFFOLI gates.

    Exact integer semantics of the reversible circuit; raises on gates that
    do not map basis states to basis states.
    """
    idx = np.asarray(indices, dtype=np.int64).copy()
    for g in circuit.gates:
        if g.kind == NOT:
            idx ^= 1 << g.qubits[0]
        elif g.kind == CNOT:
            c, t = g.qubits
            idx ^= ((idx >> c) & 1) << t
        elif g.kind == TOFFOLI:
            c1, c2, t = g.qubits
            idx ^= ((idx >> c1) & (idx >> c2) & 1) << t
        else:
            raise ValueError(f"{g.kind} gate is not basis-preserving")
    if np.ndim(indices) == 0:
        return int(idx)
    return idx
