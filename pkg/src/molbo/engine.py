"""Sequential multi-objective BO loop with horizon-aware method dispatch.

One run owns an immutable state (dataset, front, fitted models); every step
selects an input with the configured acquisition method, evaluates it,
refits the per-objective GPs, and updates the front. All randomness is
derived from the run seed and the iteration index, so runs are exactly
reproducible, and seeds are shared across methods so that different methods
coincide whenever their selection problems coincide (horizon one).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import benchmarks
from .acquisition import LookaheadConfig, MCConfig, binom_af, binom_pick, ehvi, joint_af, nested_af
from .gp import GPModel, GPNumericsError, fit_gp
from .optimize import OptBudget, OptimizationError, maximize_joint, maximize_on_grid, maximize_pointwise, sobol_candidates
from .pareto import ParetoFront, hypervolume
from .sampling import sobol_points

__all__ = [
    "METHODS",
    "RunConfig",
    "BOState",
    "IterationRecord",
    "RunRecord",
    "EngineError",
    "horizon",
    "init_state",
    "suggest",
    "observe",
    "step",
    "run_bo",
]

METHODS = ("ehvi", "nmmo_nested", "nmmo_joint", "binom")

# Roles for per-iteration seed derivation.
_ROLE_INIT, _ROLE_FIT, _ROLE_MC, _ROLE_OPT, _ROLE_GRID = range(5)


class EngineError(RuntimeError):
    """A BO step failed; the message carries the iteration index."""


def _derive_seed(seed: int, iteration: int, role: int) -> int:
    h = (seed & 0x7FFFFFFF) or 0x1234567
    for k in (iteration, role):
        h = (h * 2654435761 + k + 0x9E3779B9) % (2**31 - 1)
    return int(h)


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one seeded BO run.

    ``iterations`` counts BO steps after the ``init_points`` initial design;
    the initial evaluations are not part of the iteration budget.
    ``refine_evals`` is the per-restart refinement budget; the joint method
    scales it by the current horizon, matching its higher per-iteration
    complexity.
    """

    problem: str
    method: str
    horizon: int = 4
    iterations: int = 65
    init_points: int = 5
    seed: int = 0
    mc_samples: int = 128
    grid_size: int = 512
    inner_restarts: int = 1
    fit_restarts: int = 8
    pointwise_raw: int = 256
    joint_raw: int = 512
    opt_restarts: int = 8
    refine_evals: int = 150

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.init_points < 2:
            raise ValueError("init_points must be >= 2")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be >= 1")


@dataclass(frozen=True)
class BOState:
    """Dataset, front, and fitted models after ``iteration`` BO steps."""

    X: np.ndarray
    Y: np.ndarray
    front: ParetoFront
    models: tuple[GPModel, ...]
    iteration: int
    seed: int

    @property
    def n(self) -> int:
        return int(self.X.shape[0])


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    x: tuple[float, ...]
    y: tuple[float, ...]
    hypervolume: float
    wall_seconds: float


@dataclass(frozen=True)
class RunRecord:
    """Per-iteration trace of one run plus its final Pareto set and front."""

    config: RunConfig
    rows: tuple[IterationRecord, ...]
    pareto_inputs: np.ndarray
    pareto_front: ParetoFront


def horizon(t: int, total: int, h_cap: int) -> int:
    """Effective lookahead horizon at iteration ``t`` of ``total``.

    Capped both by the configured maximum and by the remaining budget, so
    the final iteration is always a pure immediate-improvement step.
    """
    if t < 1 or t > total:
        raise ValueError(f"iteration {t} outside 1..{total}")
    if h_cap < 1:
        raise ValueError("horizon cap must be >= 1")
    return min(h_cap, total - t + 1)


def _myopic_warm_starts(models, front, mc, d: int, h: int, cfg: RunConfig, opt_seed: int) -> np.ndarray:
    """Joint-search starts whose first slot is a strong myopic candidate.

    The coupled (candidate, lookahead) landscape is high-dimensional; seeding
    it with the best immediate-improvement points from the quasi-random sweep
    keeps the joint method from settling on a weak first slot. Two kinds of
    start per top candidate: a quasi-random lookahead tail, and a "plan" tail
    built from the other top myopic points.
    """
    cands = sobol_candidates(d, cfg.pointwise_raw, opt_seed)
    values = np.array([ehvi(models, c, front, mc) for c in cands])
    order = np.argsort(-values, kind="stable")
    top = cands[order[: max(4, h)]]
    n_starts = min(4, top.shape[0])
    tails = sobol_points((h - 1) * d, n_starts, _derive_seed(opt_seed, h, _ROLE_GRID))
    starts = []
    for i in range(n_starts):
        starts.append(np.concatenate([top[i], tails[i]]))
        others = [top[j] for j in range(top.shape[0]) if j != i]
        plan = (others * h)[: h - 1]
        starts.append(np.concatenate([top[i], *plan]))
    return np.vstack(starts)


def _fit_models(X: np.ndarray, Y: np.ndarray, cfg: RunConfig, fit_seed: int) -> tuple[GPModel, ...]:
    return tuple(
        fit_gp(X, Y[:, k], restarts=cfg.fit_restarts, seed=fit_seed + k)
        for k in range(Y.shape[1])
    )


def init_state(cfg: RunConfig) -> BOState:
    """Evaluate the Sobol initial design and fit the per-objective GPs."""
    problem = benchmarks.make_problem(cfg.problem)
    X = sobol_points(problem.d, cfg.init_points, _derive_seed(cfg.seed, 0, _ROLE_INIT))
    Y = np.vstack([benchmarks.evaluate(problem, x).as_array() for x in X])
    models = _fit_models(X, Y, cfg, _derive_seed(cfg.seed, 0, _ROLE_FIT))
    ref = benchmarks.reference_max(problem).as_array()
    front = ParetoFront.from_points(Y, ref)
    return BOState(X=X, Y=Y, front=front, models=models, iteration=0, seed=cfg.seed)


def _select(state: BOState, cfg: RunConfig) -> np.ndarray:
    t = state.iteration + 1
    h = horizon(t, cfg.iterations, cfg.horizon)
    d = state.X.shape[1]
    mc = MCConfig(n_samples=cfg.mc_samples, seed=_derive_seed(cfg.seed, t, _ROLE_MC))
    opt_seed = _derive_seed(cfg.seed, t, _ROLE_OPT)
    models, front = state.models, state.front

    pointwise_budget = OptBudget(
        n_restarts=cfg.opt_restarts,
        n_raw_candidates=cfg.pointwise_raw,
        max_evals_per_restart=cfg.refine_evals,
        seed=opt_seed,
    )

    try:
        if cfg.method == "ehvi" or h == 1:
            # Every method's selection problem degenerates to maximizing the
            # immediate EHVI at horizon one; use the identical code path so
            # methods coincide exactly under shared seeds.
            x, _ = maximize_pointwise(
                lambda x: ehvi(models, x, front, mc), d, pointwise_budget
            )
            return x
        if cfg.method == "nmmo_nested":
            grid = sobol_points(d, cfg.grid_size, _derive_seed(cfg.seed, t, _ROLE_GRID))
            look = LookaheadConfig(
                horizon_cap=h, grid_size=cfg.grid_size, inner_restarts=cfg.inner_restarts
            )
            x, _ = maximize_on_grid(
                lambda x: nested_af(models, x, front, look, mc, grid=grid), grid
            )
            return x
        if cfg.method == "nmmo_joint":
            budget = OptBudget(
                n_restarts=cfg.opt_restarts,
                n_raw_candidates=cfg.joint_raw,
                max_evals_per_restart=cfg.refine_evals * h,
                seed=opt_seed,
            )
            x, _, _ = maximize_joint(
                lambda x, xp: joint_af(models, x, xp, front, mc),
                d,
                h,
                budget,
                extra_candidates=_myopic_warm_starts(models, front, mc, d, h, cfg, opt_seed),
            )
            return x
        # binom: score the whole horizon as one batch, then take the member
        # with the best immediate EHVI.
        budget = OptBudget(
            n_restarts=cfg.opt_restarts,
            n_raw_candidates=cfg.joint_raw,
            max_evals_per_restart=cfg.refine_evals,
            seed=opt_seed,
        )
        x0, xp, _ = maximize_joint(
            lambda x, xp: binom_af(models, np.vstack([x[None, :], xp]), front, mc),
            d,
            h,
            budget,
            extra_candidates=_myopic_warm_starts(models, front, mc, d, h, cfg, opt_seed),
        )
        batch = np.vstack([x0[None, :], xp])
        return binom_pick(models, batch, front, mc)
    except (OptimizationError, GPNumericsError):
        # A degenerate fit should not kill a campaign; fall back to the raw
        # quasi-random candidate set.
        return sobol_candidates(d, cfg.pointwise_raw, opt_seed)[0]


def suggest(state: BOState, cfg: RunConfig) -> np.ndarray:
    """Next input to evaluate; pure in (state, config)."""
    if state.iteration >= cfg.iterations:
        raise EngineError(f"run already complete after {cfg.iterations} iterations")
    return _select(state, cfg)


def observe(state: BOState, x, y, fit_restarts: int = 8) -> BOState:
    """Fold one observation into the state: append, refit, update the front.

    The refit seed derives from the state's run seed and the iteration
    index, so composing :func:`suggest` and :func:`observe` reproduces
    :func:`step` exactly when ``fit_restarts`` matches the run config.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y_arr = np.asarray(getattr(y, "values", y), dtype=float).ravel()
    if x.size != state.X.shape[1]:
        raise ValueError(f"input has {x.size} dimensions, dataset has {state.X.shape[1]}")
    if y_arr.size != state.Y.shape[1]:
        raise ValueError(f"output has {y_arr.size} objectives, dataset has {state.Y.shape[1]}")
    t = state.iteration + 1
    X = np.vstack([state.X, x[None, :]])
    Y = np.vstack([state.Y, y_arr[None, :]])
    fit_seed = _derive_seed(state.seed, t, _ROLE_FIT)
    models = tuple(
        fit_gp(X, Y[:, k], restarts=fit_restarts, seed=fit_seed + k)
        for k in range(Y.shape[1])
    )
    front = ParetoFront.from_points(Y, state.front.reference)
    return BOState(X=X, Y=Y, front=front, models=models, iteration=t, seed=state.seed)


def step(state: BOState, cfg: RunConfig) -> tuple[BOState, IterationRecord]:
    """One full BO iteration: select, evaluate, refit, and record."""
    t = state.iteration + 1
    problem = benchmarks.make_problem(cfg.problem)
    started = time.perf_counter()
    try:
        x = suggest(state, cfg)
        y = benchmarks.evaluate(problem, x)
        new_state = observe(state, x, y, fit_restarts=cfg.fit_restarts)
    except EngineError:
        raise
    except Exception as exc:
        raise EngineError(f"iteration {t} failed: {exc}") from exc
    wall = time.perf_counter() - started
    hv = hypervolume(new_state.front)
    record = IterationRecord(
        iteration=t,
        x=tuple(float(v) for v in x),
        y=tuple(y.values),
        hypervolume=float(hv),
        wall_seconds=float(wall),
    )
    return new_state, record


def run_bo(cfg: RunConfig) -> RunRecord:
    """Run the full loop: initial design plus ``cfg.iterations`` BO steps."""
    state = init_state(cfg)
    rows: list[IterationRecord] = []
    for _ in range(cfg.iterations):
        state, record = step(state, cfg)
        rows.append(record)
    front = state.front
    member = {row.tobytes() for row in front.points}
    mask = np.array([y.tobytes() in member for y in state.Y], dtype=bool)
    return RunRecord(
        config=cfg,
        rows=tuple(rows),
        pareto_inputs=state.X[mask].copy(),
        pareto_front=front,
    )
