"""Experiment protocols: time-inversion echo, fidelity decay, error scaling, harmonics.

Exact reference evolution uses the one-iteration basis permutation, which is
bit-identical to running the gate sequence (the exact iteration contains only
bit-flip gates); noisy evolution always runs gate by gate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import engine
from .circuits import Circuit, bit_reverse, cat_iteration, cat_iteration_reversed, qft, registers
from .engine import NoiseModel, StateVector
from .lattice import (
    ClassicalError,
    DensityGrid,
    LatticeSpec,
    apply_classical_error,
    bhattacharyya_fidelity,
    evolve_density,
    negate_density,
    negate_indices,
)

# Prefactor of the fidelity half-life law t_f = C / (eps^2 * n_q), measured on
# this noise model by tf_scan over n_q in 4..6, eps in 0.01..0.1.  Used only
# to invert the decay law when estimating an unknown error amplitude.
CALIBRATED_TF_PREFACTOR = 0.96


def derive_seed(*parts: int) -> int:
    """Deterministic child seed from integer parts (documented, stable scheme)."""
    return int(np.random.SeedSequence([int(p) & 0xFFFFFFFF for p in parts]).generate_state(1)[0])


@dataclass(frozen=True, eq=False)
class FidelitySeries:
    t: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        if self.t.shape != self.f.shape or self.t.ndim != 1:
            raise ValueError("t and f must be 1-d arrays of equal length")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("times must be strictly increasing")

    def rows(self):
        return zip(self.t.tolist(), self.f.tolist())

    def crossing(self, level: float = 0.5):
        """Linearly interpolated first crossing below `level`, or None."""
        below = np.nonzero(self.f < level)[0]
        if below.size == 0 or below[0] == 0:
            return None if below.size == 0 else float(self.t[0])
        k = below[0]
        f0, f1 = self.f[k - 1], self.f[k]
        t0, t1 = self.t[k - 1], self.t[k]
        return float(t0 + (t1 - t0) * (f0 - level) / (f0 - f1))


def _negate_perm(spec: LatticeSpec) -> np.ndarray:
    return engine.lattice_permutation_map(spec, negate_indices)


def _error_perm(spec: LatticeSpec, error: ClassicalError) -> np.ndarray:
    n = spec.n
    if error.mode == "shift" and (abs(error.di) >= n or abs(error.dj) >= n):
        raise ValueError(f"shift ({error.di}, {error.dj}) out of range for n={n}")
    return engine.lattice_permutation_map(spec, error.indices)


@dataclass(frozen=True, eq=False)
class EchoConfig:
    initial: DensityGrid
    t_r: int
    epsilon_q: float = 0.0
    classical_error: ClassicalError | None = None
    seed: int = 1
    snapshot_times: tuple[int, ...] = ()
    prep_circuit: Circuit | None = None  # optional noisy preparation from |0..0>

    def __post_init__(self):
        if self.t_r < 0:
            raise ValueError("t_r must be >= 0")
        for t in self.snapshot_times:
            if not (0 <= t <= 2 * self.t_r):
                raise ValueError(f"snapshot time {t} outside [0, {2 * self.t_r}]")


@dataclass(eq=False)
class EchoResult:
    config: EchoConfig
    snapshots: dict[int, DensityGrid]
    post_inversion: DensityGrid | None
    return_fidelity: float
    final_state: StateVector
    norm_error: float
    carry_leakage: float
    gate_applications: int


def run_echo(config: EchoConfig) -> EchoResult:
    """Forward t_r noisy iterations, momentum inversion (exact permutation, with
    the optional classical error), t_r noisy factor-swapped iterations, inversion.

    Without noise and without a classical error the protocol is the identity,
    so the density returns exactly to the initial distribution at 2*t_r.
    """
    spec = config.initial.spec
    noise = NoiseModel(config.epsilon_q, config.seed)
    if config.prep_circuit is not None:
        state = StateVector.zero(spec)
        engine.apply_circuit(state, config.prep_circuit, noise)
    else:
        state = StateVector.from_density(config.initial)
    initial_ref = state.copy()

    forward = cat_iteration(spec)
    backward = cat_iteration_reversed(spec)
    negate = _negate_perm(spec)
    want = set(config.snapshot_times) | {0, config.t_r, 2 * config.t_r}
    snapshots: dict[int, DensityGrid] = {}
    if 0 in want:
        snapshots[0] = engine.density_xy(state)

    for t in range(1, config.t_r + 1):
        engine.apply_circuit(state, forward, noise)
        if t in want:
            snapshots[t] = engine.density_xy(state)

    engine.apply_lattice_permutation(state, negate)
    if config.classical_error is not None:
        engine.apply_lattice_permutation(state, _error_perm(spec, config.classical_error))
    post_inversion = engine.density_xy(state)

    for t in range(1, config.t_r + 1):
        engine.apply_circuit(state, backward, noise)
        if config.t_r + t in want and t < config.t_r:
            snapshots[config.t_r + t] = engine.density_xy(state)
    engine.apply_lattice_permutation(state, negate)
    if 2 * config.t_r in want:
        snapshots[2 * config.t_r] = engine.density_xy(state)

    return EchoResult(
        config=config,
        snapshots=snapshots,
        post_inversion=post_inversion,
        return_fidelity=engine.fidelity(state, initial_ref),
        final_state=state,
        norm_error=abs(state.norm2() - 1.0),
        carry_leakage=engine.carry_leakage(state),
        gate_applications=2 * config.t_r * len(forward),
    )


class _ExactReference:
    """Noise-free reference evolved on its invariant carry = 0 subspace.

    The exact iteration is a permutation of basis cells and never populates
    the workspace, so tracking the n^2 cell amplitudes is bit-identical to
    evolving the full state with the gate sequence.
    """

    def __init__(self, initial: DensityGrid):
        self.spec = initial.spec
        self.cells = np.sqrt(initial.weights.T.ravel()).astype(np.complex128)
        self._step = engine.map_step_permutation(self.spec)

    def step(self) -> None:
        out = np.empty_like(self.cells)
        out[self._step] = self.cells
        self.cells = out

    def fidelity_with(self, state: StateVector) -> float:
        v = np.vdot(state.amps[: self.spec.cells], self.cells)
        return float(abs(v) ** 2)


def fidelity_vs_time(initial: DensityGrid, epsilon_q: float, t_max: int, seed: int) -> FidelitySeries:
    """f(t) = |<psi_eps(t)|psi_0(t)>|^2 with both states evolved in lockstep."""
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    spec = initial.spec
    noisy = StateVector.from_density(initial)
    exact = _ExactReference(initial)
    noise = NoiseModel(epsilon_q, seed)
    circuit = cat_iteration(spec)
    ts = np.arange(t_max + 1)
    fs = np.empty(t_max + 1)
    fs[0] = exact.fidelity_with(noisy)
    for t in range(1, t_max + 1):
        engine.apply_circuit(noisy, circuit, noise)
        exact.step()
        fs[t] = exact.fidelity_with(noisy)
    return FidelitySeries(ts, fs)


def classical_error_fidelity_drop(
    initial: DensityGrid, t_e: int, error: ClassicalError, t_max: int
) -> FidelitySeries:
    """f_c(t): both states evolve exactly; the error permutation hits one at t_e.

    The overlap is untouched by the shared exact evolution, so the series is 1
    before t_e and exactly constant after the drop.
    """
    if not (0 <= t_e < t_max):
        raise ValueError("need 0 <= t_e < t_max")
    spec = initial.spec
    # Both states evolve exactly, so both stay on the carry = 0 subspace and
    # can be tracked as cell vectors (identical to the full-state evolution).
    reference = np.sqrt(initial.weights.T.ravel()).astype(np.complex128)
    perturbed = reference.copy()
    step = engine.map_step_permutation(spec)
    err = _error_perm(spec, error)

    def permute(vec, dest):
        out = np.empty_like(vec)
        out[dest] = vec
        return out

    ts = np.arange(t_max + 1)
    fs = np.empty(t_max + 1)
    fs[0] = float(abs(np.vdot(perturbed, reference)) ** 2)
    for t in range(1, t_max + 1):
        reference = permute(reference, step)
        perturbed = permute(perturbed, step)
        if t == t_e:
            perturbed = permute(perturbed, err)
        fs[t] = float(abs(np.vdot(perturbed, reference)) ** 2)
    return FidelitySeries(ts, fs)


def classical_echo_fidelity(
    initial: DensityGrid,
    t_e: int,
    error: ClassicalError,
    quantum: bool = False,
    epsilon_q: float = 0.0,
    seed: int = 1,
) -> float:
    """Recovered fraction after an echo with the error applied at inversion.

    Pipeline: evolve forward t_e, apply the error, invert momenta, evolve
    t_e in swapped factor order, invert again.  The classical route pushes the
    density grid through the permutations; the quantum route runs the same
    protocol on the state vector, optionally with gate noise.
    """
    if t_e < 1:
        raise ValueError("t_e must be >= 1")
    spec = initial.spec
    if not quantum:
        g = evolve_density(initial, t_e)
        g = apply_classical_error(g, error)
        g = negate_density(g)
        g = evolve_density(g, t_e, reverse=True)
        g = negate_density(g)
        return bhattacharyya_fidelity(g, initial)

    state = StateVector.from_density(initial)
    ref = state.copy()
    noise = NoiseModel(epsilon_q, seed)
    forward = cat_iteration(spec)
    backward = cat_iteration_reversed(spec)
    negate = _negate_perm(spec)
    for _ in range(t_e):
        engine.apply_circuit(state, forward, noise)
    engine.apply_lattice_permutation(state, _error_perm(spec, error))
    engine.apply_lattice_permutation(state, negate)
    for _ in range(t_e):
        engine.apply_circuit(state, backward, noise)
    engine.apply_lattice_permutation(state, negate)
    return engine.fidelity(state, ref)


def classical_echo_series(
    initial: DensityGrid, t_values, error: ClassicalError, quantum: bool = False,
    epsilon_q: float = 0.0, seed: int = 1,
) -> FidelitySeries:
    t = np.asarray(list(t_values), dtype=np.int64)
    f = np.array(
        [classical_echo_fidelity(initial, int(te), error, quantum, epsilon_q, seed) for te in t]
    )
    return FidelitySeries(t, f)


@dataclass(frozen=True)
class TfPoint:
    t_f: float
    saturated: bool
    series: FidelitySeries = field(repr=False, default=None)


def default_tf_horizon(spec: LatticeSpec, epsilon_q: float) -> int:
    """Iteration cap for half-life searches: several expected half-lives."""
    if epsilon_q <= 0:
        return 64
    expected = CALIBRATED_TF_PREFACTOR / (epsilon_q**2 * spec.n_q)
    return int(min(20000, max(64, math.ceil(6 * expected))))


def find_tf(
    spec: LatticeSpec,
    epsilon_q: float,
    initial: DensityGrid,
    seed: int,
    t_max: int | None = None,
) -> TfPoint:
    """First time f(t) crosses 0.5, linearly interpolated; saturates at t_max."""
    if initial.spec != spec:
        raise ValueError("initial density does not match spec")
    if t_max is None:
        t_max = default_tf_horizon(spec, epsilon_q)
    noisy = StateVector.from_density(initial)
    exact = _ExactReference(initial)
    noise = NoiseModel(epsilon_q, seed)
    circuit = cat_iteration(spec)
    ts = [0]
    fs = [exact.fidelity_with(noisy)]
    prev = fs[0]
    for t in range(1, t_max + 1):
        engine.apply_circuit(noisy, circuit, noise)
        exact.step()
        f = exact.fidelity_with(noisy)
        ts.append(t)
        fs.append(f)
        if f < 0.5:
            t_f = (t - 1) + (prev - 0.5) / (prev - f)
            return TfPoint(t_f, False, FidelitySeries(np.array(ts), np.array(fs)))
        prev = f
    return TfPoint(float(t_max), True, FidelitySeries(np.array(ts), np.array(fs)))


@dataclass(frozen=True)
class TfRow:
    n_q: int
    epsilon: float
    seed: int
    t_f: float
    saturated: bool


@dataclass(frozen=True)
class TfScanResult:
    rows: tuple[TfRow, ...]
    prefactor: float
    slope: float
    residual_rms: float

    def collapsed(self) -> FidelitySeries:
        """Median t_f per (n_q, eps) grid point against eps^2 * n_q, sorted."""
        groups: dict[tuple[int, float], list[float]] = {}
        for r in self.rows:
            if not r.saturated:
                groups.setdefault((r.n_q, r.epsilon), []).append(r.t_f)
        xs = sorted((eps**2 * n_q, float(np.median(v))) for (n_q, eps), v in groups.items())
        return FidelitySeries(np.array([x for x, _ in xs]), np.array([y for _, y in xs]))


def tf_scan(
    n_q_values,
    eps_values,
    seeds: int,
    base_seed: int = 1,
    initial_factory=None,
    t_max: int | None = None,
) -> TfScanResult:
    """Half-life scan over a (n_q, eps) grid, fitting log t_f = log C - s*log(eps^2 n_q)."""
    n_q_values = list(n_q_values)
    eps_values = list(eps_values)
    if len(n_q_values) * len(eps_values) < 6:
        raise ValueError("scan needs at least 6 grid points")
    if seeds < 3:
        raise ValueError("scan needs at least 3 seeds per grid point")
    if initial_factory is None:
        from .densities import line_density

        initial_factory = line_density
    rows: list[TfRow] = []
    for n_q in n_q_values:
        spec = LatticeSpec(n_q)
        initial = initial_factory(spec)
        for eps in eps_values:
            for k in range(seeds):
                seed = derive_seed(base_seed, n_q, round(eps * 1e9), k)
                point = find_tf(spec, eps, initial, seed, t_max=t_max)
                rows.append(TfRow(n_q, eps, seed, point.t_f, point.saturated))
    good = [r for r in rows if not r.saturated]
    if len(good) < 6:
        raise ValueError(f"only {len(good)} unsaturated scan points; cannot fit")
    x = np.log([r.epsilon**2 * r.n_q for r in good])
    y = np.log([r.t_f for r in good])
    slope_fit, intercept = np.polyfit(x, y, 1)
    resid = y - (slope_fit * x + intercept)
    return TfScanResult(
        rows=tuple(rows),
        prefactor=float(np.exp(intercept)),
        slope=float(-slope_fit),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
    )


@dataclass(frozen=True)
class NonReturnEstimate:
    p_nr: float
    epsilon_hat: float
    shots: int


def nonreturn_probability(
    state: StateVector,
    support,
    shots: int,
    rng: np.random.Generator,
    iterations: int,
    calibration: float = CALIBRATED_TF_PREFACTOR,
) -> NonReturnEstimate:
    """Estimate the noise amplitude from the non-return rate of the x register.

    Samples x at the return moment; the fraction landing outside the initial
    support estimates 1 - f, and inverting f = exp(-ln2 * t * eps^2 * n_q / C)
    recovers the error amplitude.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    support = np.asarray(sorted(set(int(s) for s in support)))
    outcomes = engine.sample_register(state, "x", shots, rng)
    p_nr = float(np.mean(~np.isin(outcomes, support)))
    f_hat = min(max(1.0 - p_nr, 1e-12), 1.0)
    if f_hat >= 1.0 or iterations == 0:
        eps_hat = 0.0
    else:
        n_q = state.spec.n_q
        eps_hat = math.sqrt(calibration * math.log(1.0 / f_hat) / (math.log(2.0) * iterations * n_q))
    return NonReturnEstimate(p_nr=p_nr, epsilon_hat=eps_hat, shots=shots)


def harmonics(state: StateVector, register: str, k: int) -> list[tuple[int, float]]:
    """Top-k (frequency, weight) of the register after an exact Fourier transform.

    The transform leaves bits reversed; labels are corrected before ranking.
    Ties rank lower frequencies first.
    """
    spec = state.spec
    if k < 1 or k > spec.n:
        raise ValueError(f"k must be in [1, {spec.n}]")
    x, y, _ = registers(spec)
    if register == "x":
        reg = x
    elif register == "y":
        reg = y
    else:
        raise ValueError(f"register must be 'x' or 'y', got {register!r}")
    work = state.copy()
    engine.apply_circuit(work, qft(reg, spec.qubits))
    w = engine.marginal_x(work) if register == "x" else engine.marginal_y(work)
    freqs = bit_reverse(np.arange(spec.n), spec.n_q)
    weights = np.empty(spec.n)
    weights[freqs] = w
    order = np.lexsort((np.arange(spec.n), -weights))
    return [(int(i), float(weights[i])) for i in order[:k]]
