"""Dense state-vector simulation over the x/y/carry registers.

Amplitudes are a flat complex128 array indexed by x + n*y + n^2*c.  Gates act
through compiled kernels that enumerate exactly the index pairs of the gate's
active subspace (all controls set), so inactive control subspaces are never
touched.  Optional noise multiplies the eigenvalues of the gate's 2x2 block by
random phases exp(i*eta), eta uniform on (-epsilon, +epsilon), two fresh draws
per gate application, drawn before the amplitude update.  The perturbed gate
stays unitary, so the norm is preserved exactly.
"""

from __future__ import annotations

import cmath
import math
import struct
from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .circuits import CPHASE, HADAMARD, PHASE, Circuit, Gate
from .lattice import DensityGrid, LatticeSpec, step_indices

_INV_SQRT2 = 1.0 / math.sqrt(2.0)

# Exact 2x2 blocks of the bit-flip family and of Hadamard, as flat entries.
_U_X_FLAT = (0.0j, 1.0 + 0.0j, 1.0 + 0.0j, 0.0j)
_U_H_FLAT = (
    complex(_INV_SQRT2), complex(_INV_SQRT2), complex(_INV_SQRT2), complex(-_INV_SQRT2)
)


class NoiseModel:
    """Seeded stream of eigenphase kicks; epsilon == 0 reproduces exact gates."""

    def __init__(self, epsilon: float, seed: int):
        if epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        self.epsilon = float(epsilon)
        self.seed = int(seed)
        self._rng = np.random.default_rng(self.seed)
        self.draws = 0

    def next_pair(self) -> np.ndarray:
        self.draws += 2
        return self._rng.uniform(-self.epsilon, self.epsilon, size=2)

    def __repr__(self):
        return f"NoiseModel(epsilon={self.epsilon}, seed={self.seed}, draws={self.draws})"


@dataclass(eq=False)
class StateVector:
    spec: LatticeSpec
    amps: np.ndarray

    def __post_init__(self):
        expected = 1 << self.spec.qubits
        if self.amps.shape != (expected,):
            raise ValueError(f"expected {expected} amplitudes, got {self.amps.shape}")
        if self.amps.dtype != np.complex128:
            raise ValueError("amplitudes must be complex128")

    @classmethod
    def basis(cls, spec: LatticeSpec, x: int, y: int) -> "StateVector":
        n = spec.n
        if not (0 <= x < n and 0 <= y < n):
            raise ValueError(f"basis cell ({x}, {y}) outside {n}x{n} lattice")
        amps = np.zeros(1 << spec.qubits, dtype=np.complex128)
        amps[x + n * y] = 1.0
        return cls(spec, amps)

    @classmethod
    def zero(cls, spec: LatticeSpec) -> "StateVector":
        return cls.basis(spec, 0, 0)

    @classmethod
    def from_density(cls, grid: DensityGrid) -> "StateVector":
        """Amplitude sqrt(rho_ij) with zero phase on the carry=0 slice."""
        total = float(grid.weights.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError("density grid is not normalized")
        spec = grid.spec
        amps = np.zeros(1 << spec.qubits, dtype=np.complex128)
        # weights[i, j] -> flat cell index i + n*j: transpose to (j, i) then ravel
        amps[: spec.cells] = np.sqrt(grid.weights.T.ravel())
        return cls(spec, amps)

    def copy(self) -> "StateVector":
        return StateVector(self.spec, self.amps.copy())

    def norm2(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)


def _check_gate(state: StateVector, gate: Gate) -> None:
    if max(gate.qubits) >= state.spec.qubits:
        raise ValueError(f"gate {gate} does not fit a {state.spec.qubits}-qubit register")


_COS8 = math.cos(math.pi / 8)
_SIN8 = math.sin(math.pi / 8)
_HAS_THETA_KINDS = (PHASE, CPHASE)


def _noisy_block(gate: Gate, eta: np.ndarray):
    """Entries of the gate's 2x2 block with eigenvalues kicked by exp(i*eta_k)."""
    p0 = cmath.exp(1j * eta[0])
    p1 = cmath.exp(1j * eta[1])
    kind = gate.kind
    if kind == HADAMARD:
        # V diag(p0, -p1) V^T in the (cos pi/8, sin pi/8) eigenbasis
        cc, ss, cs = _COS8 * _COS8, _SIN8 * _SIN8, _COS8 * _SIN8
        return cc * p0 - ss * p1, cs * (p0 + p1), cs * (p0 + p1), ss * p0 - cc * p1
    if kind in _HAS_THETA_KINDS:  # diagonal already; kick both eigenvalues
        return p0, 0.0j, 0.0j, cmath.exp(1j * gate.theta) * p1
    # bit-flip family: eigenvectors (|0> +- |1>)/sqrt(2), eigenvalues (+1, -1)
    return 0.5 * (p0 - p1), 0.5 * (p0 + p1), 0.5 * (p0 + p1), 0.5 * (p0 - p1)


# kernel-argument cache keyed by the gate's kind and qubits
_GATE_ARGS: dict = {}


def _kernel_args(gate: Gate):
    key = (gate.kind, gate.qubits)
    args = _GATE_ARGS.get(key)
    if args is None:
        tb = 1 << gate.target
        controls = gate.controls
        if not controls:
            args = (0, tb)
        elif len(controls) == 1:
            cb = 1 << controls[0]
            b0, b1 = sorted((tb, cb))
            args = (1, tb, b0, b1, cb)
        else:
            c1, c2 = (1 << controls[0], 1 << controls[1])
            b0, b1, b2 = sorted((tb, c1, c2))
            args = (2, tb, b0, b1, b2, c1 | c2)
        _GATE_ARGS[key] = args
    return args


def _apply_block(amps: np.ndarray, gate: Gate, u00, u01, u10, u11) -> None:
    args = _kernel_args(gate)
    if args[0] == 0:
        _k.pairs0(amps, args[1], u00, u01, u10, u11)
    elif args[0] == 1:
        _k.pairs1(amps, args[1], args[2], args[3], args[4], u00, u01, u10, u11)
    else:
        _k.pairs2(amps, args[1], args[2], args[3], args[4], args[5], u00, u01, u10, u11)


def _apply_diag(amps: np.ndarray, gate: Gate, d0: complex, d1: complex) -> None:
    args = _kernel_args(gate)
    if args[0] == 0:
        _k.diag0(amps, args[1], d0, d1)
    else:
        _k.diag1(amps, args[1], args[2], args[3], args[4], d0, d1)


def apply_gate(state: StateVector, gate: Gate, noise: NoiseModel | None = None) -> StateVector:
    """Apply one gate in place; with noise, two eigenphase draws are consumed first."""
    _check_gate(state, gate)
    if noise is not None:
        eta = noise.next_pair()
        if noise.epsilon > 0.0:
            u00, u01, u10, u11 = _noisy_block(gate, eta)
            if gate.kind in _HAS_THETA_KINDS:
                _apply_diag(state.amps, gate, u00, u11)
            else:
                _apply_block(state.amps, gate, u00, u01, u10, u11)
            return state
        # epsilon == 0: draws are all zero; fall through to the exact path so
        # results are bit-identical with noise=None.
    kind = gate.kind
    if kind == HADAMARD:
        _apply_block(state.amps, gate, *_U_H_FLAT)
    elif kind in _HAS_THETA_KINDS:
        _apply_diag(state.amps, gate, 1.0 + 0.0j, cmath.exp(1j * gate.theta))
    else:
        _apply_block(state.amps, gate, *_U_X_FLAT)
    return state


def apply_circuit(state: StateVector, circuit: Circuit, noise: NoiseModel | None = None) -> StateVector:
    """Apply gates in sequence order; noise draws are consumed in the same order."""
    if circuit.qubit_count != state.spec.qubits:
        raise ValueError(
            f"circuit acts on {circuit.qubit_count} qubits, state has {state.spec.qubits}"
        )
    for gate in circuit.gates:
        apply_gate(state, gate, noise)
    return state


def lattice_permutation_map(spec: LatticeSpec, perm) -> np.ndarray:
    """Flat destination map of a lattice permutation.

    `perm(i, j, n)` must map index arrays to index arrays.  Bijectivity is
    verified exhaustively for n_q <= 8; larger lattices trust the caller.
    """
    n = spec.n
    flat = np.arange(spec.cells, dtype=np.int64)
    i, j = flat % n, flat // n
    i2, j2 = perm(i, j, n)
    dest = np.asarray(i2, dtype=np.int64) + n * np.asarray(j2, dtype=np.int64)
    if spec.n_q <= 8:
        if np.bincount(dest, minlength=spec.cells).max() != 1:
            raise ValueError("permutation is not a bijection on the lattice")
    return dest


def apply_lattice_permutation(state: StateVector, perm) -> StateVector:
    """Relocate amplitudes cell-wise: (x, y, c) -> (perm(x, y), c).  Exact."""
    dest = perm if isinstance(perm, np.ndarray) else lattice_permutation_map(state.spec, perm)
    view = state.amps.reshape(-1, state.spec.cells)
    out = np.empty_like(view)
    out[:, dest] = view
    state.amps = out.reshape(-1)
    return state


def map_step_permutation(spec: LatticeSpec, reverse: bool = False) -> np.ndarray:
    """Destination map of one exact map iteration on the (x, y) registers.

    The exact iteration circuit consists only of bit-flip gates, so it moves
    amplitudes without mixing them; applying this permutation is bit-identical
    to running the circuit and is the fast path for exact reference states.
    """
    return lattice_permutation_map(spec, lambda i, j, n: step_indices(i, j, n, reverse))


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2 (pairwise-summed inner product, fixed order)."""
    if a.spec != b.spec:
        raise ValueError("states live on different lattices")
    v = np.vdot(a.amps, b.amps)
    return float(abs(v) ** 2)


def density_xy(state: StateVector) -> DensityGrid:
    """rho_ij = sum_c |amp(x=i, y=j, c)|^2, marginalizing the carry register."""
    spec = state.spec
    probs = np.abs(state.amps) ** 2
    w = probs.reshape(-1, spec.n, spec.n).sum(axis=0).T  # (j, i) -> (i, j)
    return DensityGrid(spec, np.ascontiguousarray(w / w.sum()))


def marginal_x(state: StateVector) -> np.ndarray:
    probs = np.abs(state.amps) ** 2
    return probs.reshape(-1, state.spec.n).sum(axis=0)


def marginal_y(state: StateVector) -> np.ndarray:
    probs = np.abs(state.amps) ** 2
    return probs.reshape(-1, state.spec.n, state.spec.n).sum(axis=(0, 2))


def carry_leakage(state: StateVector) -> float:
    """Probability mass outside the carry = 0 subspace."""
    probs = np.abs(state.amps) ** 2
    return float(probs[state.spec.cells :].sum())


def sample_register(state: StateVector, register: str, shots: int, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. samples of the x or y register's marginal; deterministic given rng."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if register == "x":
        w = marginal_x(state)
    elif register == "y":
        w = marginal_y(state)
    else:
        raise ValueError(f"register must be 'x' or 'y', got {register!r}")
    return rng.choice(state.spec.n, size=shots, p=w / w.sum())


_SNAPSHOT_HEADER = struct.Struct("<IQ")


def save_state(state: StateVector, path) -> None:
    """Debug snapshot: header (n_q, count) then interleaved re/im float64, little-endian."""
    with open(path, "wb") as fh:
        fh.write(_SNAPSHOT_HEADER.pack(state.spec.n_q, state.amps.size))
        fh.write(state.amps.astype("<c16", copy=False).tobytes())


def load_state(path) -> StateVector:
    with open(path, "rb") as fh:
        n_q, count = _SNAPSHOT_HEADER.unpack(fh.read(_SNAPSHOT_HEADER.size))
        spec = LatticeSpec(n_q)
        if count != 1 << spec.qubits:
            raise ValueError(f"snapshot count {count} does not match n_q={n_q}")
        data = fh.read(16 * count)
    amps = np.frombuffer(data, dtype="<c16").astype(np.complex128)
    return StateVector(spec, amps)
