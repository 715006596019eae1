"""Acquisition maximizer tests: refinement, determinism, reductions."""

import numpy as np
import pytest

from molbo.optimize import (
    OptBudget,
    OptimizationError,
    maximize_joint,
    maximize_on_grid,
    maximize_pointwise,
    sobol_candidates,
)


def sphere(center):
    return lambda x: -float(np.sum((np.asarray(x) - center) ** 2))


BUDGET = OptBudget(n_restarts=4, n_raw_candidates=64, max_evals_per_restart=300, seed=0)


class TestSobolCandidates:
    def test_single_point(self):
        pts = sobol_candidates(3, 1, seed=0)
        assert pts.shape == (1, 3)

    def test_in_unit_cube(self):
        pts = sobol_candidates(5, 100, seed=1)
        assert np.all(pts >= 0.0) and np.all(pts < 1.0)

    def test_same_seed_identical(self):
        assert np.array_equal(sobol_candidates(4, 33, seed=2), sobol_candidates(4, 33, seed=2))

    def test_zero_dimension_rejected(self):
        with pytest.raises(ValueError):
            sobol_candidates(0, 4, seed=0)


class TestPointwise:
    def test_finds_center(self):
        x, value = maximize_pointwise(sphere(0.5), 3, BUDGET)
        assert np.linalg.norm(x - 0.5) <= 1e-2
        assert value == sphere(0.5)(x)

    def test_never_below_raw_best(self):
        af = sphere(np.array([0.2, 0.9]))
        raw = sobol_candidates(2, BUDGET.n_raw_candidates, BUDGET.seed)
        raw_best = max(af(c) for c in raw)
        _, value = maximize_pointwise(af, 2, BUDGET)
        assert value >= raw_best

    def test_deterministic(self):
        a = maximize_pointwise(sphere(0.3), 4, BUDGET)
        b = maximize_pointwise(sphere(0.3), 4, BUDGET)
        assert np.array_equal(a[0], b[0]) and a[1] == b[1]

    def test_result_in_cube(self):
        x, _ = maximize_pointwise(sphere(1.4), 2, BUDGET)  # optimum outside the cube
        assert np.all(x >= 0.0) and np.all(x <= 1.0)
        assert np.linalg.norm(x - 1.0) <= 1e-2

    def test_all_nonfinite_rejected(self):
        with pytest.raises(OptimizationError):
            maximize_pointwise(lambda x: float("nan"), 2, BUDGET)


class TestJoint:
    def test_horizon_one_matches_pointwise(self):
        af = sphere(0.4)
        joint = maximize_joint(lambda x, xp: af(x), 3, 1, BUDGET)
        point = maximize_pointwise(af, 3, BUDGET)
        assert np.array_equal(joint[0], point[0])
        assert joint[1].shape == (0, 3)
        assert joint[2] == point[1]

    def test_value_is_exact_objective(self):
        def af(x, xp):
            return sphere(0.5)(x) + sum(sphere(0.25)(row) for row in xp)

        x, xp, value = maximize_joint(af, 2, 3, BUDGET)
        assert value == af(x, xp)

    def test_separable_slots_near_own_optima(self):
        centers = [0.2, 0.6, 0.8]

        def af(x, xp):
            slots = [x] + list(xp)
            return sum(sphere(c)(s) for c, s in zip(centers, slots))

        budget = OptBudget(n_restarts=6, n_raw_candidates=256, max_evals_per_restart=600, seed=3)
        x, xp, _ = maximize_joint(af, 2, 3, budget)
        slots = [x] + list(xp)
        for c, s in zip(centers, slots):
            assert np.linalg.norm(s - c) <= 5e-2


class TestGrid:
    def test_single_row(self):
        row = np.array([[0.1, 0.2]])
        x, value = maximize_on_grid(sphere(0.5), row)
        assert np.array_equal(x, row[0])

    def test_center_selected(self):
        grid = np.vstack([np.full(2, 0.5), np.random.default_rng(0).random((20, 2))])
        x, _ = maximize_on_grid(sphere(0.5), grid)
        assert np.array_equal(x, np.full(2, 0.5))

    def test_value_is_max_of_evaluations(self):
        grid = np.random.default_rng(1).random((16, 3))
        af = sphere(0.7)
        _, value = maximize_on_grid(af, grid)
        assert value == max(af(row) for row in grid)

    def test_tie_takes_lowest_index(self):
        grid = np.array([[0.2, 0.2], [0.8, 0.8]])  # symmetric around center
        x, _ = maximize_on_grid(sphere(0.5), grid)
        assert np.array_equal(x, grid[0])

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            maximize_on_grid(sphere(0.5), np.empty((0, 2)))
