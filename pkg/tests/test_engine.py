"""Engine tests: horizon scheduling, determinism, ask/tell composition."""

import numpy as np
import pytest

from molbo.engine import (
    BOState,
    EngineError,
    RunConfig,
    horizon,
    init_state,
    observe,
    run_bo,
    step,
    suggest,
)
from molbo.pareto import ParetoFront, hvi, hypervolume, nondominated

FAST = dict(
    problem="reinforced_concrete_beam",
    init_points=5,
    mc_samples=32,
    fit_restarts=2,
    pointwise_raw=32,
    joint_raw=48,
    opt_restarts=2,
    refine_evals=20,
    grid_size=24,
)


def fast_config(method="ehvi", horizon_cap=1, iterations=3, seed=0, **overrides):
    kwargs = {**FAST, **overrides}
    return RunConfig(method=method, horizon=horizon_cap, iterations=iterations, seed=seed, **kwargs)


class TestHorizon:
    def test_capped_at_start(self):
        assert horizon(1, 65, 4) == 4

    def test_last_iteration_is_one(self):
        assert horizon(65, 65, 8) == 1

    def test_truncated_by_remaining_budget(self):
        assert horizon(63, 65, 8) == 3

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            horizon(66, 65, 4)
        with pytest.raises(ValueError):
            horizon(0, 65, 4)


class TestInitState:
    def test_initial_design_size(self):
        state = init_state(fast_config())
        assert state.n == 5
        assert state.iteration == 0

    def test_front_is_nondominated_outputs(self):
        state = init_state(fast_config())
        expected = nondominated(state.Y)
        assert sorted(map(tuple, state.front.points)) == sorted(map(tuple, expected))

    def test_same_seed_identical_dataset(self):
        a = init_state(fast_config(seed=7))
        b = init_state(fast_config(seed=7))
        assert np.array_equal(a.X, b.X) and np.array_equal(a.Y, b.Y)


class TestStep:
    def test_dataset_grows_by_one(self):
        cfg = fast_config()
        state = init_state(cfg)
        new_state, record = step(state, cfg)
        assert new_state.n == state.n + 1
        assert record.iteration == 1

    def test_hypervolume_never_decreases(self):
        cfg = fast_config(iterations=3)
        state = init_state(cfg)
        hv = hypervolume(state.front)
        for _ in range(3):
            state, record = step(state, cfg)
            assert record.hypervolume >= hv - 1e-12
            hv = record.hypervolume

    @pytest.mark.parametrize("method", ["nmmo_nested", "nmmo_joint", "binom"])
    def test_horizon_one_collapses_to_ehvi(self, method):
        baseline = run_bo(fast_config(method="ehvi", iterations=3, seed=11))
        other = run_bo(fast_config(method=method, horizon_cap=1, iterations=3, seed=11))
        for a, b in zip(baseline.rows, other.rows):
            assert a.x == b.x
            assert a.y == b.y
            assert a.hypervolume == b.hypervolume


class TestAskTell:
    def test_suggest_is_pure(self):
        cfg = fast_config()
        state = init_state(cfg)
        assert np.array_equal(suggest(state, cfg), suggest(state, cfg))

    def test_suggest_observe_reproduces_step(self):
        cfg = fast_config(iterations=2)
        state = init_state(cfg)
        stepped, record = step(state, cfg)

        x = suggest(state, cfg)
        from molbo.benchmarks import evaluate, make_problem

        y = evaluate(make_problem(cfg.problem), x)
        told = observe(state, x, y, fit_restarts=cfg.fit_restarts)
        assert np.array_equal(told.X, stepped.X)
        assert np.array_equal(told.Y, stepped.Y)
        assert tuple(x) == record.x

    def test_observe_updates_front_iff_nondominated(self):
        cfg = fast_config()
        state = init_state(cfg)
        dominated = np.min(state.Y, axis=0) - 1.0
        told = observe(state, np.full(3, 0.5), dominated, fit_restarts=1)
        assert sorted(map(tuple, told.front.points)) == sorted(map(tuple, state.front.points))

    def test_observe_rejects_bad_shapes(self):
        cfg = fast_config()
        state = init_state(cfg)
        with pytest.raises(ValueError):
            observe(state, np.zeros(2), np.zeros(2), fit_restarts=1)
        with pytest.raises(ValueError):
            observe(state, np.zeros(3), np.zeros(3), fit_restarts=1)

    def test_suggest_after_completion_rejected(self):
        cfg = fast_config(iterations=1)
        state = init_state(cfg)
        state, _ = step(state, cfg)
        with pytest.raises(EngineError):
            suggest(state, cfg)


class TestRunBo:
    def test_row_count_and_determinism(self):
        # Wall-clock seconds are the only nondeterministic record field.
        cfg = fast_config(iterations=4, seed=3)
        a = run_bo(cfg)
        b = run_bo(cfg)
        assert len(a.rows) == 4
        for ra, rb in zip(a.rows, b.rows):
            assert (ra.x, ra.y, ra.hypervolume) == (rb.x, rb.y, rb.hypervolume)

    def test_telescoping_identity(self):
        cfg = fast_config(iterations=4, seed=5)
        record = run_bo(cfg)
        state0 = init_state(cfg)
        front = state0.front
        total = 0.0
        for row in record.rows:
            total += hvi(np.asarray(row.y), front)
            front = front.with_point(np.asarray(row.y))
        assert abs((record.rows[-1].hypervolume - hypervolume(state0.front)) - total) <= 1e-9

    def test_final_front_matches_dataset(self):
        cfg = fast_config(iterations=3, seed=6)
        record = run_bo(cfg)
        ys = np.vstack([init_state(cfg).Y] + [np.asarray(r.y)[None, :] for r in record.rows])
        expected = nondominated(ys)
        assert sorted(map(tuple, record.pareto_front.points)) == sorted(map(tuple, expected))

    @pytest.mark.parametrize("method", ["nmmo_nested", "nmmo_joint", "binom"])
    def test_lookahead_methods_run(self, method):
        cfg = fast_config(method=method, horizon_cap=3, iterations=2, seed=1)
        record = run_bo(cfg)
        assert len(record.rows) == 2
        hv = [r.hypervolume for r in record.rows]
        assert hv[1] >= hv[0] - 1e-12

    def test_pareto_inputs_map_to_front(self):
        cfg = fast_config(iterations=3, seed=8)
        record = run_bo(cfg)
        from molbo.benchmarks import evaluate, make_problem

        p = make_problem(cfg.problem)
        for x in record.pareto_inputs:
            y = evaluate(p, x).as_array()
            assert any(np.array_equal(y, row) for row in record.pareto_front.points)


class TestConfigValidation:
    def test_unknown_method(self):
        with pytest.raises(ValueError):
            RunConfig(problem="zdt3", method="entropy")

    def test_bad_counts(self):
        with pytest.raises(ValueError):
            RunConfig(problem="zdt3", method="ehvi", iterations=0)
        with pytest.raises(ValueError):
            RunConfig(problem="zdt3", method="ehvi", init_points=1)
        with pytest.raises(ValueError):
            RunConfig(problem="zdt3", method="ehvi", horizon=0)
