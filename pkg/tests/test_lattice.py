import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qcat.lattice import (
    KS_ENTROPY,
    STRETCH_FACTOR,
    CellIndex,
    ClassicalError,
    DensityGrid,
    LatticeSpec,
    apply_classical_error,
    bhattacharyya_fidelity,
    cat_step,
    cat_step_reversed,
    divergence_time,
    ehrenfest_time,
    evolve_density,
    momentum_negate,
    negate_density,
    step_indices,
)


def test_constants():
    assert STRETCH_FACTOR == (3.0 + math.sqrt(5.0)) / 2.0
    assert KS_ENTROPY == math.log(STRETCH_FACTOR)
    assert 0.962 < KS_ENTROPY < 0.963


class TestMapSteps:
    def test_fixed_point(self):
        spec = LatticeSpec(2)
        assert cat_step(CellIndex(0, 0), spec) == CellIndex(0, 0)
        assert cat_step_reversed(CellIndex(0, 0), spec) == CellIndex(0, 0)

    def test_forward_example(self):
        # j' = (2+1) mod 4 = 3, i' = (3+1) mod 4 = 0
        assert cat_step(CellIndex(1, 2), LatticeSpec(2)) == CellIndex(0, 3)

    def test_reversed_example(self):
        # i' = (1+2) mod 4 = 3, j' = (2+3) mod 4 = 1
        assert cat_step_reversed(CellIndex(1, 2), LatticeSpec(2)) == CellIndex(3, 1)

    def test_momentum_negate_examples(self):
        spec = LatticeSpec(3)
        assert momentum_negate(CellIndex(3, 0), spec) == CellIndex(3, 0)
        assert momentum_negate(CellIndex(3, 5), spec) == CellIndex(3, 3)

    def test_momentum_negate_involution(self):
        spec = LatticeSpec(7)
        n = spec.n
        i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        from qcat.lattice import negate_indices

        i2, j2 = negate_indices(*negate_indices(i, j, n), n)
        assert (i2 == i).all() and (j2 == j).all()

    @pytest.mark.parametrize("n_q", range(1, 9))
    def test_bijection_exhaustive(self, n_q):
        n = 1 << n_q
        cells = np.arange(n * n)
        i, j = cells % n, cells // n
        for reverse in (False, True):
            i2, j2 = step_indices(i, j, n, reverse)
            seen = np.bincount(i2 + n * j2, minlength=n * n)
            assert seen.max() == 1  # every cell visited exactly once

    @pytest.mark.parametrize("n_q", range(9, 13))
    def test_bijection_large_sampled(self, n_q):
        # beyond the exhaustive range: inverse composition on random cells
        n = 1 << n_q
        rng = np.random.default_rng(n_q)
        i = rng.integers(0, n, size=2000)
        j = rng.integers(0, n, size=2000)
        fi, fj = step_indices(i, j, n)
        # invert via negate . reversed . negate
        bi, bj = fi, (-fj) % n
        bi, bj = step_indices(bi, bj, n, reverse=True)
        bi, bj = bi, (-bj) % n
        assert (bi == i).all() and (bj == j).all()

    @pytest.mark.parametrize("t", [1, 10, 100])
    @pytest.mark.parametrize("n_q", range(2, 9))
    def test_echo_identity(self, n_q, t):
        n = 1 << n_q
        cells = np.arange(n * n)
        i, j = cells % n, cells // n
        fi, fj = i, j
        for _ in range(t):
            fi, fj = step_indices(fi, fj, n)
        fi, fj = fi, (-fj) % n
        for _ in range(t):
            fi, fj = step_indices(fi, fj, n, reverse=True)
        fi, fj = fi, (-fj) % n
        assert (fi == i).all() and (fj == j).all()

    @given(st.integers(1, 8), st.data())
    @settings(max_examples=60, deadline=None)
    def test_echo_identity_pointwise(self, n_q, data):
        spec = LatticeSpec(n_q)
        cell = CellIndex(
            data.draw(st.integers(0, spec.n - 1)), data.draw(st.integers(0, spec.n - 1))
        )
        out = momentum_negate(
            cat_step_reversed(momentum_negate(cat_step(cell, spec), spec), spec), spec
        )
        assert out == cell


class TestDensity:
    def test_point_mass_follows_map(self):
        spec = LatticeSpec(2)
        grid = DensityGrid.point(spec, 1, 2)
        out = evolve_density(grid, 1)
        assert out.weights[0, 3] == 1.0
        assert out.weights.sum() == 1.0

    def test_zero_steps_identity(self):
        spec = LatticeSpec(4)
        rng = np.random.default_rng(0)
        grid = DensityGrid.normalized(spec, rng.random((16, 16)))
        out = evolve_density(grid, 0)
        assert np.array_equal(out.weights, grid.weights)

    def test_uniform_invariant(self):
        spec = LatticeSpec(5)
        grid = DensityGrid.uniform(spec)
        out = evolve_density(grid, 100)
        assert np.array_equal(out.weights, grid.weights)

    def test_mass_conserved_exactly(self):
        spec = LatticeSpec(6)
        rng = np.random.default_rng(3)
        grid = DensityGrid.normalized(spec, rng.random((64, 64)))
        out = evolve_density(grid, 37, reverse=True)
        # permutation pushforward: same multiset of weights
        assert np.array_equal(np.sort(out.weights.ravel()), np.sort(grid.weights.ravel()))

    def test_validation(self):
        spec = LatticeSpec(2)
        with pytest.raises(ValueError):
            DensityGrid(spec, np.full((4, 4), 1.0))  # unnormalized
        with pytest.raises(ValueError):
            DensityGrid(spec, -np.full((4, 4), 1.0 / 16.0))
        with pytest.raises(ValueError):
            DensityGrid.normalized(spec, np.zeros((4, 4)))


class TestClassicalError:
    def test_shift_point(self):
        spec = LatticeSpec(7)
        grid = DensityGrid.point(spec, 4, 4)
        out = apply_classical_error(grid, ClassicalError.shift(1, 1))
        assert out.weights[5, 5] == 1.0

    def test_lsb_point(self):
        spec = LatticeSpec(7)
        grid = DensityGrid.point(spec, 4, 4)
        out = apply_classical_error(grid, ClassicalError.lsb())
        assert out.weights[5, 5] == 1.0  # 4 XOR 1 = 5

    def test_one_cell_from_epsilon(self):
        err = ClassicalError.from_epsilon(1.0 / 128.0, LatticeSpec(7))
        assert (err.di, err.dj) == (1, 1)
        err = ClassicalError.from_epsilon(1.0 / 128.0, LatticeSpec(7), axes="i")
        assert (err.di, err.dj) == (1, 0)

    def test_rejects_large_shift(self):
        spec = LatticeSpec(3)
        grid = DensityGrid.uniform(spec)
        with pytest.raises(ValueError):
            apply_classical_error(grid, ClassicalError.shift(8, 0))

    def test_lsb_is_involution(self):
        spec = LatticeSpec(5)
        rng = np.random.default_rng(5)
        grid = DensityGrid.normalized(spec, rng.random((32, 32)))
        err = ClassicalError.lsb()
        out = apply_classical_error(apply_classical_error(grid, err), err)
        assert np.array_equal(out.weights, grid.weights)


class TestBhattacharyya:
    def test_identical(self):
        spec = LatticeSpec(4)
        rng = np.random.default_rng(1)
        grid = DensityGrid.normalized(spec, rng.random((16, 16)))
        assert bhattacharyya_fidelity(grid, grid) == pytest.approx(1.0, abs=1e-12)

    def test_disjoint(self):
        spec = LatticeSpec(3)
        a = DensityGrid.point(spec, 0, 0)
        b = DensityGrid.point(spec, 1, 0)
        assert bhattacharyya_fidelity(a, b) == 0.0

    def test_symmetric_and_permutation_invariant(self):
        spec = LatticeSpec(5)
        rng = np.random.default_rng(2)
        a = DensityGrid.normalized(spec, rng.random((32, 32)))
        b = DensityGrid.normalized(spec, rng.random((32, 32)))
        fab = bhattacharyya_fidelity(a, b)
        assert fab == pytest.approx(bhattacharyya_fidelity(b, a), abs=1e-15)
        fab2 = bhattacharyya_fidelity(evolve_density(a, 5), evolve_density(b, 5))
        assert fab2 == pytest.approx(fab, rel=1e-12)

    def test_spec_mismatch(self):
        with pytest.raises(ValueError):
            bhattacharyya_fidelity(
                DensityGrid.uniform(LatticeSpec(2)), DensityGrid.uniform(LatticeSpec(3))
            )

    def test_negate_density_matches_pointwise(self):
        spec = LatticeSpec(4)
        rng = np.random.default_rng(9)
        grid = DensityGrid.normalized(spec, rng.random((16, 16)))
        out = negate_density(grid)
        for i in (0, 3, 7):
            for j in (0, 5, 15):
                assert out.weights[i, (-j) % 16] == grid.weights[i, j]


class TestTimeScales:
    def test_roundoff_divergence(self):
        # a 1e-16 error overturns the trajectory after ~38 iterations
        assert divergence_time(1e-16) == pytest.approx(38.28, abs=0.05)

    def test_one_stretch_time(self):
        assert divergence_time(1.0 / STRETCH_FACTOR) == pytest.approx(1.0, abs=1e-12)

    def test_cell_error_time(self):
        assert divergence_time(1.0 / 128.0) == pytest.approx(math.log(128) / KS_ENTROPY, rel=1e-12)
        assert divergence_time(1.0 / 128.0) == pytest.approx(5.04, abs=0.01)

    def test_domain(self):
        for bad in (0.0, 1.0, -0.5, 2.0):
            with pytest.raises(ValueError):
                divergence_time(bad)

    def test_ehrenfest(self):
        assert ehrenfest_time(LatticeSpec(1)) == pytest.approx(0.72, abs=0.01)
        assert ehrenfest_time(LatticeSpec(7)) == pytest.approx(5.04, abs=0.01)
        assert ehrenfest_time(LatticeSpec(20)) == pytest.approx(14.40, abs=0.01)

    def test_orbit_divergence_empirical(self):
        # two orbits one cell apart at n = 2^16 reach distance n/4 within
        # divergence_time(1/n) +- 3 iterations on average
        n_q = 16
        n = 1 << n_q
        rng = np.random.default_rng(42)
        starts = 128
        i = rng.integers(0, n, size=starts)
        j = rng.integers(0, n, size=starts)
        i2, j2 = (i + 1) % n, (j + 1) % n
        crossing = np.zeros(starts)
        done = np.zeros(starts, dtype=bool)
        for t in range(1, 40):
            i, j = step_indices(i, j, n)
            i2, j2 = step_indices(i2, j2, n)
            di = np.minimum((i - i2) % n, (i2 - i) % n)
            dj = np.minimum((j - j2) % n, (j2 - j) % n)
            dist = np.hypot(di, dj)
            newly = (~done) & (dist >= n / 4)
            crossing[newly] = t
            done |= newly
            if done.all():
                break
        assert done.all()
        expected = divergence_time(1.0 / n)
        assert abs(crossing.mean() - expected) <= 3.0
