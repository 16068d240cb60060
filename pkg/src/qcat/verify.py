"""Exhaustive oracle checks for the reversible circuits.

The circuits under test contain only bit-flip-family gates, so their action on
computational basis states has exact integer semantics (circuits.apply_to_basis).
That route is checked here against independent integer arithmetic; the amplitude
engine is tied to the same oracle by sampled cross-checks in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuits import Circuit, apply_to_basis, cat_iteration, cat_iteration_reversed, mod_adder
from .lattice import LatticeSpec, step_indices


@dataclass
class VerificationReport:
    name: str
    checked: int
    failed: int = 0
    failures: list = field(default_factory=list)  # (input, got, expected), truncated

    @property
    def passed(self) -> bool:
        return self.failed == 0

    def summary(self) -> str:
        status = "pass" if self.passed else "FAIL"
        line = f"{self.name}: {status}, {self.checked - self.failed}/{self.checked} inputs"
        if self.failures:
            inp, got, exp = self.failures[0]
            line += f" (first counterexample: input={inp} got={got} expected={exp})"
        return line


def _collect(name, inputs, got, expected) -> VerificationReport:
    bad = np.nonzero(got != expected)[0]
    report = VerificationReport(name, checked=len(inputs), failed=int(bad.size))
    for k in bad[:8]:  # keep a few counterexamples, not the whole list
        report.failures.append((int(inputs[k]), int(got[k]), int(expected[k])))
    return report


def adder_circuit(n: int) -> Circuit:
    """Standalone width-n adder on 3n-1 qubits (src, dst, carry registers)."""
    src = tuple(range(n))
    dst = tuple(range(n, 2 * n))
    carry = tuple(range(2 * n, 3 * n - 1)) if n > 1 else ()
    return mod_adder(src, dst, carry, max(3 * n - 1, 2))


def verify_adder(n: int, circuit: Circuit | None = None) -> VerificationReport:
    """Check |a>|b>|0> -> |a>|(a+b) mod 2^n>|0> on all 4^n basis inputs."""
    if n < 1 or n > 8:
        raise ValueError("exhaustive adder check supports 1 <= n <= 8")
    if circuit is None:
        circuit = adder_circuit(n)
    mask = (1 << n) - 1
    a = np.arange(1 << (2 * n), dtype=np.int64) & mask
    b = np.arange(1 << (2 * n), dtype=np.int64) >> n
    inputs = a | (b << n)
    expected = a | (((a + b) & mask) << n)
    got = apply_to_basis(circuit, inputs)
    return _collect(f"adder n={n}", inputs, got, expected)


def verify_map(n_q: int, reverse: bool = False) -> VerificationReport:
    """Check one iteration circuit against the integer map on all n^2 basis cells."""
    if n_q < 1 or n_q > 8:
        raise ValueError("exhaustive map check supports 1 <= n_q <= 8")
    spec = LatticeSpec(n_q)
    n = spec.n
    circuit = cat_iteration_reversed(spec) if reverse else cat_iteration(spec)
    cells = np.arange(spec.cells, dtype=np.int64)
    x, y = cells % n, cells // n
    x2, y2 = step_indices(x, y, n, reverse)
    expected = x2 + n * y2
    got = apply_to_basis(circuit, cells)
    name = f"map n_q={n_q}" + (" reversed" if reverse else "")
    return _collect(name, cells, got, expected)
