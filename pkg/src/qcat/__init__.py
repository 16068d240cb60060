"""Gate-level quantum simulation of the discretized cat map.

Library layout:

- lattice:     exact integer map, densities, classical errors, time scales
- circuits:    reversible adders, map iterations, state prep, Fourier circuit
- engine:      dense state-vector simulation with eigenphase gate noise
- experiments: echo, fidelity decay, error scaling, non-return, harmonics
- densities:   initial distributions (line, point, smile)
- pgm/reports/plots/cli: file formats, metadata, figures, command line
"""

__version__ = "0.1.0"

from .circuits import (
    Circuit,
    Gate,
    GateCount,
    cat_iteration,
    cat_iteration_reversed,
    count_gates,
    line_prep,
    mod_adder,
    qft,
    registers,
)
from .engine import NoiseModel, StateVector, apply_circuit, apply_gate, fidelity
from .lattice import (
    CellIndex,
    ClassicalError,
    DensityGrid,
    LatticeSpec,
    bhattacharyya_fidelity,
    cat_step,
    cat_step_reversed,
    divergence_time,
    ehrenfest_time,
    evolve_density,
    momentum_negate,
)

__all__ = [
    "__version__",
    "CellIndex",
    "Circuit",
    "ClassicalError",
    "DensityGrid",
    "Gate",
    "GateCount",
    "LatticeSpec",
    "NoiseModel",
    "StateVector",
    "apply_circuit",
    "apply_gate",
    "bhattacharyya_fidelity",
    "cat_iteration",
    "cat_iteration_reversed",
    "cat_step",
    "cat_step_reversed",
    "count_gates",
    "divergence_time",
    "ehrenfest_time",
    "evolve_density",
    "fidelity",
    "line_prep",
    "mod_adder",
    "momentum_negate",
    "qft",
    "registers",
]
