"""Derivative-free maximization of acquisition functions over the unit cube.

Monte Carlo acquisition values with fixed base samples are deterministic but
their gradients are costly and brittle, so refinement uses coordinate pattern
search with shrinking steps on top of a quasi-random candidate sweep. Every
maximizer is deterministic given its budget's seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .sampling import sobol_points

__all__ = [
    "OptBudget",
    "OptimizationError",
    "sobol_candidates",
    "maximize_pointwise",
    "maximize_joint",
    "maximize_on_grid",
]


class OptimizationError(RuntimeError):
    """The objective was unusable on every candidate."""


@dataclass(frozen=True)
class OptBudget:
    """Evaluation budget for one maximization call."""

    n_restarts: int = 8
    n_raw_candidates: int = 256
    max_evals_per_restart: int = 150
    seed: int = 0

    def __post_init__(self):
        for name in ("n_restarts", "n_raw_candidates", "max_evals_per_restart"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")


def sobol_candidates(d: int, n: int, seed: int) -> np.ndarray:
    """Scrambled Sobol candidate set in the unit cube."""
    return sobol_points(d, n, seed)


def _pattern_search(
    af: Callable[[np.ndarray], float],
    x0: np.ndarray,
    f0: float,
    max_evals: int,
    step0: float = 0.1,
    step_min: float = 1e-3,
) -> tuple[np.ndarray, float]:
    """Coordinate pattern search with step halving, clipped to the cube.

    Accepts the first improving move per coordinate; halves the step when a
    full sweep yields no improvement. The running best value always comes
    from an actual objective evaluation.
    """
    x = x0.copy()
    fx = f0
    step = step0
    evals = 0
    d = x.size
    while step >= step_min and evals < max_evals:
        improved = False
        for i in range(d):
            for delta in (step, -step):
                if evals >= max_evals:
                    return x, fx
                cand = x.copy()
                cand[i] = min(max(cand[i] + delta, 0.0), 1.0)
                if cand[i] == x[i]:
                    continue
                fc = af(cand)
                evals += 1
                if np.isfinite(fc) and fc > fx:
                    x, fx = cand, fc
                    improved = True
                    break
        if not improved:
            step *= 0.5
    return x, fx


def _maximize_vector(
    af: Callable[[np.ndarray], float],
    dim: int,
    budget: OptBudget,
    extra_candidates: np.ndarray | None = None,
) -> tuple[np.ndarray, float]:
    cands = sobol_candidates(dim, budget.n_raw_candidates, budget.seed)
    if extra_candidates is not None and len(extra_candidates):
        extras = np.atleast_2d(np.asarray(extra_candidates, dtype=float))
        cands = np.vstack([np.clip(extras, 0.0, 1.0), cands])
    values = np.empty(cands.shape[0])
    for i, c in enumerate(cands):
        v = af(c)
        values[i] = v if np.isfinite(v) else -np.inf
    if not np.any(np.isfinite(values)):
        raise OptimizationError("objective returned a non-finite value at every candidate")
    order = np.argsort(-values, kind="stable")
    best_x = cands[order[0]].copy()
    best_v = float(values[order[0]])
    for idx in order[: budget.n_restarts]:
        if not np.isfinite(values[idx]):
            break
        x, v = _pattern_search(af, cands[idx], float(values[idx]), budget.max_evals_per_restart)
        if v > best_v:
            best_x, best_v = x, float(v)
    return np.clip(best_x, 0.0, 1.0), best_v


def maximize_pointwise(
    af: Callable[[np.ndarray], float], d: int, budget: OptBudget
) -> tuple[np.ndarray, float]:
    """Maximize a single-point acquisition over the unit cube.

    Quasi-random sweep, then pattern-search refinement from the top
    ``n_restarts`` candidates. The returned value is the objective at the
    returned point, and never falls below the best raw candidate.
    """
    return _maximize_vector(af, d, budget)


def maximize_joint(
    af: Callable[[np.ndarray, np.ndarray], float],
    d: int,
    horizon: int,
    budget: OptBudget,
    extra_candidates: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Maximize over a candidate and its lookahead batch simultaneously.

    The concatenated ``horizon * d`` vector is optimized with the same
    machinery as the pointwise case and split into the candidate and the
    ``(horizon - 1, d)`` batch. ``extra_candidates`` rows (also of length
    ``horizon * d``) are prepended to the quasi-random sweep, which lets
    callers warm-start the search, e.g. from a myopic maximizer.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")

    def flat_af(v: np.ndarray) -> float:
        return af(v[:d], v[d:].reshape(horizon - 1, d))

    vec, value = _maximize_vector(flat_af, horizon * d, budget, extra_candidates)
    return vec[:d], vec[d:].reshape(horizon - 1, d), value


def maximize_on_grid(
    af: Callable[[np.ndarray], float], grid: np.ndarray
) -> tuple[np.ndarray, float]:
    """Exhaustive argmax over the rows of a grid; ties take the lowest row."""
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if grid.shape[0] == 0:
        raise ValueError("grid must be nonempty")
    values = np.empty(grid.shape[0])
    for i, row in enumerate(grid):
        v = af(row)
        values[i] = v if np.isfinite(v) else -np.inf
    if not np.any(np.isfinite(values)):
        raise OptimizationError("objective returned a non-finite value on the whole grid")
    idx = int(np.argmax(values))
    return grid[idx].copy(), float(values[idx])
