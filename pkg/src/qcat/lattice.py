"""Exact integer dynamics of the discretized cat map on an N x N phase-space lattice.

The torus map (x, y) -> (2x + y, x + y) mod 1 is restricted to the lattice
points (i/N, j/N) with N = 2**n_q.  On the lattice every operation here is a
permutation of cells, so densities evolve by exact reassignment and never lose
mass to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Stretching factor per iteration and the corresponding Kolmogorov-Sinai
# entropy (nats/iteration).  An initial error e reaches scale 1 after about
# ln(1/e)/KS_ENTROPY iterations.
STRETCH_FACTOR = (3.0 + math.sqrt(5.0)) / 2.0
KS_ENTROPY = math.log(STRETCH_FACTOR)


@dataclass(frozen=True)
class LatticeSpec:
    """Lattice geometry: n_q bits per axis, n = 2**n_q cells per axis."""

    n_q: int

    def __post_init__(self):
        if not isinstance(self.n_q, int) or self.n_q < 1:
            raise ValueError(f"n_q must be a positive integer, got {self.n_q!r}")

    @property
    def n(self) -> int:
        return 1 << self.n_q

    @property
    def cells(self) -> int:
        return 1 << (2 * self.n_q)

    @property
    def qubits(self) -> int:
        """Total register width used by the quantum algorithm (x, y and carries)."""
        return 3 * self.n_q - 1


@dataclass(frozen=True)
class CellIndex:
    """Lattice cell: position index i (x = i/n) and momentum index j (y = j/n)."""

    i: int
    j: int


def _check_cell(cell: CellIndex, spec: LatticeSpec) -> None:
    n = spec.n
    if not (0 <= cell.i < n and 0 <= cell.j < n):
        raise ValueError(f"cell {cell} outside {n}x{n} lattice")


def cat_step(cell: CellIndex, spec: LatticeSpec) -> CellIndex:
    """One forward iteration: momentum kick j += i, then rotation i += j (mod n)."""
    _check_cell(cell, spec)
    n = spec.n
    j = (cell.j + cell.i) % n
    i = (cell.i + j) % n
    return CellIndex(i, j)


def cat_step_reversed(cell: CellIndex, spec: LatticeSpec) -> CellIndex:
    """Factor-swapped iteration: rotation i += j first, then kick j += i.

    Conjugating with momentum_negate turns this into the exact inverse of
    cat_step, which is what the echo protocol relies on.
    """
    _check_cell(cell, spec)
    n = spec.n
    i = (cell.i + cell.j) % n
    j = (cell.j + i) % n
    return CellIndex(i, j)


def momentum_negate(cell: CellIndex, spec: LatticeSpec) -> CellIndex:
    """Momentum inversion j -> -j (mod n); an involution."""
    _check_cell(cell, spec)
    return CellIndex(cell.i, (-cell.j) % spec.n)


def step_indices(i, j, n: int, reverse: bool = False):
    """Vectorized map step on integer index arrays; returns new (i, j)."""
    if reverse:
        i = (i + j) % n
        j = (j + i) % n
    else:
        j = (j + i) % n
        i = (i + j) % n
    return i, j


def negate_indices(i, j, n: int):
    """Vectorized momentum inversion on index arrays."""
    return i, (-j) % n


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """Probability density on the lattice; weights[i, j] is the mass of cell (i, j)."""

    spec: LatticeSpec
    weights: np.ndarray

    def __post_init__(self):
        n = self.spec.n
        w = self.weights
        if w.shape != (n, n):
            raise ValueError(f"weights shape {w.shape} does not match {n}x{n} lattice")
        if w.dtype != np.float64:
            raise ValueError("weights must be float64")
        if np.any(w < 0.0):
            raise ValueError("weights must be non-negative")
        if abs(float(w.sum()) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1 (use DensityGrid.normalized)")

    @classmethod
    def normalized(cls, spec: LatticeSpec, weights) -> "DensityGrid":
        w = np.asarray(weights, dtype=np.float64)
        total = float(w.sum())
        if not math.isfinite(total) or total <= 0.0:
            raise ValueError("weights must have positive finite total mass")
        return cls(spec, w / total)

    @classmethod
    def point(cls, spec: LatticeSpec, i: int, j: int) -> "DensityGrid":
        _check_cell(CellIndex(i, j), spec)
        w = np.zeros((spec.n, spec.n))
        w[i, j] = 1.0
        return cls(spec, w)

    @classmethod
    def uniform(cls, spec: LatticeSpec) -> "DensityGrid":
        n = spec.n
        return cls(spec, np.full((n, n), 1.0 / (n * n)))


def _source_grids(n: int):
    i = np.arange(n)[:, None] * np.ones(n, dtype=np.int64)[None, :]
    j = np.ones(n, dtype=np.int64)[:, None] * np.arange(n)[None, :]
    return i, j


def _pushforward(grid: DensityGrid, i_new, j_new) -> DensityGrid:
    out = np.empty_like(grid.weights)
    out[i_new, j_new] = grid.weights
    return DensityGrid(grid.spec, out)


def evolve_density(grid: DensityGrid, steps: int, reverse: bool = False) -> DensityGrid:
    """Push the density through `steps` map iterations.

    Pure permutation pushforward: each cell's weight is reassigned, so total
    mass is conserved exactly.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if steps == 0:
        return DensityGrid(grid.spec, grid.weights.copy())
    n = grid.spec.n
    ii, jj = _source_grids(n)
    for _ in range(steps):
        ii, jj = step_indices(ii, jj, n, reverse)
    return _pushforward(grid, ii, jj)


def negate_density(grid: DensityGrid) -> DensityGrid:
    n = grid.spec.n
    ii, jj = _source_grids(n)
    return _pushforward(grid, *negate_indices(ii, jj, n))


@dataclass(frozen=True)
class ClassicalError:
    """One discrete lattice error: a rigid shift by (di, dj) cells or an LSB flip.

    Both variants are lattice permutations, so the perturbed density keeps
    evolving measure-preservingly afterwards.
    """

    mode: str  # "shift" | "lsb"
    di: int = 0
    dj: int = 0

    def __post_init__(self):
        if self.mode not in ("shift", "lsb"):
            raise ValueError(f"unknown error mode {self.mode!r}")

    @classmethod
    def lsb(cls) -> "ClassicalError":
        return cls("lsb")

    @classmethod
    def shift(cls, di: int, dj: int) -> "ClassicalError":
        return cls("shift", di, dj)

    @classmethod
    def from_epsilon(cls, eps_cl: float, spec: LatticeSpec, axes: str = "both") -> "ClassicalError":
        """Rigid shift of delta = max(1, round(eps_cl * n)) cells on the chosen axes."""
        if eps_cl <= 0:
            raise ValueError("eps_cl must be > 0")
        delta = max(1, round(eps_cl * spec.n))
        if axes == "both":
            return cls("shift", delta, delta)
        if axes == "i":
            return cls("shift", delta, 0)
        if axes == "j":
            return cls("shift", 0, delta)
        raise ValueError(f"axes must be 'both', 'i' or 'j', got {axes!r}")

    def indices(self, i, j, n: int):
        if self.mode == "lsb":
            return i ^ 1, j ^ 1
        return (i + self.di) % n, (j + self.dj) % n


def apply_classical_error(grid: DensityGrid, error: ClassicalError) -> DensityGrid:
    n = grid.spec.n
    if error.mode == "shift" and (abs(error.di) >= n or abs(error.dj) >= n):
        raise ValueError(f"shift ({error.di}, {error.dj}) out of range for n={n}")
    ii, jj = _source_grids(n)
    return _pushforward(grid, *error.indices(ii, jj, n))


def bhattacharyya_fidelity(a: DensityGrid, b: DensityGrid) -> float:
    """(sum_ij sqrt(a_ij * b_ij))**2 -- overlap of the two classical densities.

    For states with real non-negative amplitudes sqrt(rho) this equals the
    squared inner product of the corresponding state vectors.
    """
    if a.spec != b.spec:
        raise ValueError("density grids live on different lattices")
    s = float(np.sqrt(a.weights * b.weights).sum())
    return s * s


def divergence_time(err: float) -> float:
    """Iterations for an initial error `err` to stretch to scale 1."""
    if not (0.0 < err < 1.0):
        raise ValueError(f"err must be in (0, 1), got {err}")
    return math.log(1.0 / err) / KS_ENTROPY


def ehrenfest_time(spec: LatticeSpec) -> float:
    """Time scale ln(n)/h up to which the lattice tracks the continuous map."""
    return math.log(spec.n) / KS_ENTROPY
