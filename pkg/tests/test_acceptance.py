"""End-to-end acceptance checks.

One test per criterion, each printing a `[PASS]`/`[FAIL]` line (visible with
`pytest -s`).  Tolerances are pinned here and nowhere else.  The heavy cases
(noisy n_q = 7 evolution) dominate the runtime; expect tens of minutes on a
small machine.
"""

import math
import time

import numpy as np

from qcat.circuits import cat_iteration, cat_iteration_reversed, count_gates, qft, registers
from qcat.densities import line_density, smile_density
from qcat.engine import (
    NoiseModel,
    StateVector,
    apply_circuit,
    marginal_x,
)
from qcat.experiments import (
    EchoConfig,
    classical_echo_series,
    classical_error_fidelity_drop,
    derive_seed,
    fidelity_vs_time,
    nonreturn_probability,
    run_echo,
    tf_scan,
)
from qcat.lattice import (
    ClassicalError,
    LatticeSpec,
    apply_classical_error,
    bhattacharyya_fidelity,
    evolve_density,
    step_indices,
)
from qcat.verify import adder_circuit, verify_adder, verify_map


def check(num, label, ok, detail=""):
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {num:>2}: {label}  {detail}")
    return bool(ok)


def test_01_gate_counts():
    t0 = time.perf_counter()
    ok = True
    for n_q in range(3, 11):
        gc = count_gates(cat_iteration(LatticeSpec(n_q)))
        ok &= gc.toffoli == 8 * n_q - 12
        ok &= gc.cnot == 8 * n_q - 10
        ok &= gc.total == 16 * n_q - 22
    c4 = cat_iteration(LatticeSpec(4))
    ok &= c4.qubit_count == 11 and len(c4) == 42
    ok &= LatticeSpec(20).qubits == 59
    ok &= count_gates(cat_iteration(LatticeSpec(20))).total == 16 * 20 - 22
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 1.0
    assert check(1, "gate counts", ok, f"(n_q=4: 11 qubits/42 gates; n_q=20: 59 qubits; {elapsed:.2f}s)")


def test_02_adder_oracle_exhaustive():
    t0 = time.perf_counter()
    ok = True
    for n in range(1, 7):
        ok &= verify_adder(n).passed  # integer circuit semantics, all 4^n inputs
    # amplitude engine cross-check against the same oracle (the standalone
    # adder's register layout coincides with the 3n-1 qubit state layout)
    rng = np.random.default_rng(2)
    for n in range(1, 7):
        circuit = adder_circuit(n)
        spec = LatticeSpec(n)
        mask = (1 << n) - 1
        inputs = (
            np.arange(1 << (2 * n)) if n <= 3 else rng.integers(0, 1 << (2 * n), size=64)
        )
        for inp in inputs:
            a, b = int(inp) & mask, (int(inp) >> n) & mask
            amps = np.zeros(1 << spec.qubits, dtype=np.complex128)
            amps[inp] = 1.0
            state = StateVector(spec, amps)
            apply_circuit(state, circuit)
            out = int(np.argmax(np.abs(state.amps)))
            ok &= abs(state.amps[out] - 1.0) < 1e-12
            ok &= out == (a | (((a + b) & mask) << n))
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30.0
    assert check(2, "adder oracle equivalence", ok, f"(n=1..6 exhaustive + engine cross-check; {elapsed:.1f}s)")


def test_03_map_oracle_exhaustive():
    t0 = time.perf_counter()
    ok = True
    for n_q in range(2, 7):
        ok &= verify_map(n_q).passed
        ok &= verify_map(n_q, reverse=True).passed
    # amplitude engine route: exhaustive for n_q <= 3, sampled above
    rng = np.random.default_rng(3)
    for n_q in range(2, 7):
        spec = LatticeSpec(n_q)
        n = spec.n
        cells = np.arange(spec.cells) if n_q <= 3 else rng.integers(0, spec.cells, size=64)
        for reverse in (False, True):
            circuit = cat_iteration_reversed(spec) if reverse else cat_iteration(spec)
            for cell in cells:
                x, y = int(cell) % n, int(cell) // n
                state = StateVector.basis(spec, x, y)
                apply_circuit(state, circuit)
                out = int(np.argmax(np.abs(state.amps)))
                ok &= abs(state.amps[out] - 1.0) < 1e-12
                x2, y2 = step_indices(x, y, n, reverse)
                ok &= out == x2 + n * y2
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60.0
    assert check(3, "map oracle equivalence", ok, f"(n_q=2..6 both directions; {elapsed:.1f}s)")


def test_04_exact_echo():
    t0 = time.perf_counter()
    spec = LatticeSpec(7)
    smile = smile_density(spec)
    ok = True
    detail = []
    for t_r in (10, 200):
        res = run_echo(EchoConfig(initial=smile, t_r=t_r, epsilon_q=0.0, seed=1))
        ok &= abs(res.return_fidelity - 1.0) < 1e-9
        detail.append(f"t_r={t_r}: f={res.return_fidelity:.12f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 300.0
    assert check(4, "exact echo returns", ok, f"({'; '.join(detail)}; {elapsed:.0f}s)")


def test_05_unitarity_under_noise():
    t0 = time.perf_counter()
    ok = True
    detail = []
    for n_q in (5, 7):
        spec = LatticeSpec(n_q)
        state = StateVector.from_density(line_density(spec))
        noise = NoiseModel(0.03, seed=derive_seed(5, n_q))
        circuit = cat_iteration(spec)
        for _ in range(400):
            apply_circuit(state, circuit, noise)
        drift = abs(state.norm2() - 1.0)
        ok &= drift < 1e-9
        detail.append(f"n_q={n_q}: |norm^2-1|={drift:.2e}")
    assert check(5, "unitarity under noise", ok, f"({'; '.join(detail)}; {time.perf_counter() - t0:.0f}s)")


def test_06_fidelity_decay_ordering():
    t0 = time.perf_counter()
    spec = LatticeSpec(7)
    line = line_density(spec)
    eps_values = (0.003, 0.01, 0.03)
    seeds = 5
    t_max = 400
    means = {}
    for eps in eps_values:
        curves = [
            fidelity_vs_time(line, eps, t_max, seed=derive_seed(6, round(eps * 1e9), k)).f
            for k in range(seeds)
        ]
        means[eps] = np.mean(curves, axis=0)
    tol = 0.02
    ok = bool((means[0.003] >= means[0.01] - tol).all())
    ok &= bool((means[0.01] >= means[0.03] - tol).all())
    f400 = float(means[0.01][t_max])
    ok &= 0.5 <= f400 <= 0.97
    elapsed = time.perf_counter() - t0
    assert check(
        6, "fidelity decay ordering", ok,
        f"(mean f(400): " + ", ".join(f"eps={e}: {means[e][-1]:.3f}" for e in eps_values)
        + f"; {elapsed:.0f}s)",
    )


def test_07_half_life_scaling():
    t0 = time.perf_counter()
    result = tf_scan([4, 5, 6], [0.01, 0.03, 0.1], seeds=5, base_seed=7)
    elapsed = time.perf_counter() - t0
    ok = abs(result.slope - 1.0) <= 0.15
    ok &= 0.2 <= result.prefactor <= 2.0
    ok &= elapsed < 1800.0
    # median t_f decreases monotonically along the collapsed axis
    collapsed = result.collapsed()
    ok &= bool((np.diff(collapsed.f) < 0).all())
    assert check(
        7, "half-life scaling law", ok,
        f"(slope={result.slope:.3f} in 1+-0.15, C={result.prefactor:.3f} in [0.2, 2.0]; {elapsed:.0f}s)",
    )


def test_08_classical_echo_decay():
    t0 = time.perf_counter()
    spec = LatticeSpec(7)
    smile = smile_density(spec)
    error = ClassicalError.from_epsilon(1.0 / 128.0, spec)
    series = classical_echo_series(smile, range(1, 14), error)

    # crossing of 0.5, interpolated
    t_half = series.crossing(0.5)
    ok_tf = t_half is not None and 4.0 <= t_half <= 10.0

    # linearity of ln f_c over t_e in [2, 12]
    mask = (series.t >= 2) & (series.t <= 12)
    x = series.t[mask].astype(float)
    y = np.log(np.maximum(series.f[mask], 1e-300))
    slope, intercept = np.polyfit(x, y, 1)
    ss_res = float(((y - (slope * x + intercept)) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot
    ok_r2 = r2 >= 0.95 and slope < 0

    # quantum pipeline with gate noise reproduces the classical values
    q_series = classical_echo_series(
        smile, range(1, 11), error, quantum=True, epsilon_q=0.01, seed=8
    )
    diff = np.abs(q_series.f - series.f[:10]).max()
    ok_q = diff < 0.1

    elapsed = time.perf_counter() - t0
    ok = ok_tf and ok_r2 and ok_q
    assert check(
        8, "classical echo decay", ok,
        f"(t_half={t_half if t_half is None else round(t_half, 2)} vs [4, 10]: "
        f"{'ok' if ok_tf else 'FAIL'}; R^2={r2:.3f} vs >=0.95: {'ok' if ok_r2 else 'FAIL'}; "
        f"quantum |diff|={diff:.3f} vs <0.1: {'ok' if ok_q else 'FAIL'}; {elapsed:.0f}s)",
    )


def test_09_classical_error_collapse():
    t0 = time.perf_counter()
    spec = LatticeSpec(7)
    smile = smile_density(spec)
    t_e = 200
    series = classical_error_fidelity_drop(smile, t_e, ClassicalError.lsb(), t_e + 10)
    ok = bool(np.allclose(series.f[:t_e], 1.0, atol=1e-12))
    drop = float(series.f[t_e])
    ok &= drop < 0.05
    constancy = float(np.abs(series.f[t_e:] - drop).max())
    ok &= constancy < 1e-12
    # independent oracle: overlap of the evolved density with its flipped copy
    g = evolve_density(smile, t_e)
    oracle = bhattacharyya_fidelity(apply_classical_error(g, ClassicalError.lsb()), g)
    ok &= abs(drop - oracle) < 1e-9
    assert check(
        9, "classical error collapse", ok,
        f"(drop={drop:.4f} < 0.05, constant to {constancy:.1e}, oracle diff "
        f"{abs(drop - oracle):.1e}; {time.perf_counter() - t0:.0f}s)",
    )


def test_10_nonreturn_estimator():
    t0 = time.perf_counter()
    spec = LatticeSpec(7)
    eps = 0.03
    res = run_echo(EchoConfig(initial=line_density(spec), t_r=200, epsilon_q=eps, seed=10))
    wx = marginal_x(res.final_state)
    support_mass = float(wx[spec.n // 2] / wx.sum())
    shots = 10_000
    est = nonreturn_probability(
        res.final_state, {spec.n // 2}, shots, np.random.default_rng(derive_seed(10, 1)),
        iterations=400,
    )
    sigma = math.sqrt(max(support_mass * (1 - support_mass), 1e-12) / shots)
    ok = abs((1.0 - est.p_nr) - support_mass) < 5 * sigma
    ok &= eps / 2 <= est.epsilon_hat <= eps * 2
    assert check(
        10, "non-return estimator", ok,
        f"(P_nr={est.p_nr:.4f}, exact={1 - support_mass:.4f}, eps_hat={est.epsilon_hat:.4f} "
        f"vs true {eps}; {time.perf_counter() - t0:.0f}s)",
    )


def test_11_qft_against_dft_oracle():
    t0 = time.perf_counter()
    spec = LatticeSpec(4)
    n = spec.n
    x_reg = registers(spec)[0]
    w, v = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    dft = np.exp(2j * np.pi * w * v / n) / math.sqrt(n)
    from qcat.circuits import bit_reverse

    rev = bit_reverse(np.arange(n), spec.n_q)
    rng = np.random.default_rng(11)
    ok = True
    for _ in range(20):
        vec = rng.normal(size=n) + 1j * rng.normal(size=n)
        vec /= np.linalg.norm(vec)
        state = StateVector.zero(spec)
        state.amps[:n] = vec
        apply_circuit(state, qft(x_reg, spec.qubits))
        ok &= float(np.abs(state.amps[:n][rev] - dft @ vec).max()) < 1e-10
    # uniform input concentrates on frequency zero
    state = StateVector.zero(spec)
    state.amps[:n] = 1.0 / math.sqrt(n)
    apply_circuit(state, qft(x_reg, spec.qubits))
    probs = np.abs(state.amps[:n]) ** 2
    ok &= probs[0] > 1.0 - 1e-10 and probs[1:].max() < 1e-10
    assert check(11, "Fourier circuit vs dense oracle", ok, f"({time.perf_counter() - t0:.1f}s)")


def test_12_performance_target():
    spec = LatticeSpec(7)
    smile = smile_density(spec)
    circuit = cat_iteration(spec)
    gates_per_iter = len(circuit)

    noisy = StateVector.from_density(smile)
    noise = NoiseModel(0.01, seed=12)
    t0 = time.perf_counter()
    for _ in range(400):
        apply_circuit(noisy, circuit, noise)
    noisy_s = time.perf_counter() - t0

    exact = StateVector.from_density(smile)
    t0 = time.perf_counter()
    for _ in range(400):
        apply_circuit(exact, circuit)
    exact_s = time.perf_counter() - t0

    total = noisy_s + exact_s
    rate = 800 * gates_per_iter / total
    ok = total < 300.0
    assert check(
        12, "performance target", ok,
        f"(400 noisy {noisy_s:.0f}s + 400 exact {exact_s:.0f}s = {total:.0f}s < 300s; "
        f"{rate:,.0f} gate applications/s on 2^20 amplitudes)",
    )
