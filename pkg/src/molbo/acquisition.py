"""Hypervolume-improvement acquisition functions, myopic and lookahead.

The myopic score of a candidate is the expected hypervolume improvement
(EHVI) under the GP posterior; a planned batch is scored by its joint batch
expected hypervolume improvement (BEHVI) under correlated posterior samples.
The three lookahead acquisition functions combine these:

* ``nested_af`` adds to EHVI the best lookahead batch found on a fixed grid
  under the one-step conditioned ("fantasy") model;
* ``joint_af`` scores a candidate together with an explicit lookahead batch;
* ``binom_af`` scores the whole horizon as one batch of the current model.

All estimators consume fixed standard-normal base tensors, so every value is
a deterministic function of its ``MCConfig`` and can be maximized stably.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import ndtr

from . import gp
from .pareto import ParetoFront, hvi2d_point_batch, hvi_points_batch
from .sampling import normal_base_samples, sobol_points

__all__ = [
    "MCConfig",
    "LookaheadConfig",
    "ehvi",
    "ehvi_exact_2d",
    "behvi",
    "nested_af",
    "joint_af",
    "binom_af",
    "binom_pick",
]

_SQRT_2PI = float(np.sqrt(2.0 * np.pi))


@dataclass(frozen=True)
class MCConfig:
    """Monte Carlo budget for acquisition estimation.

    ``base_samples``, when given, must be an (n, q, K) standard-normal tensor
    matching the batch size of the call it is passed to; otherwise a
    quasi-random tensor is derived from ``seed``.
    """

    n_samples: int = 128
    seed: int = 0
    base_samples: np.ndarray | None = None

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be >= 1, got {self.n_samples}")


@dataclass(frozen=True)
class LookaheadConfig:
    """Horizon cap and inner-search controls for the lookahead functions.

    ``grid_size`` is only consulted by the nested function, which needs a
    pre-defined candidate grid because of its inner maximization.
    ``inner_restarts`` > 1 adds seeded random lookahead batches as extra
    inner-search candidates on top of the greedy construction.
    """

    horizon_cap: int
    grid_size: int = 512
    inner_restarts: int = 1

    def __post_init__(self):
        if self.horizon_cap < 1:
            raise ValueError(f"horizon_cap must be >= 1, got {self.horizon_cap}")
        if self.grid_size < 1:
            raise ValueError(f"grid_size must be >= 1, got {self.grid_size}")
        if self.inner_restarts < 1:
            raise ValueError(f"inner_restarts must be >= 1, got {self.inner_restarts}")


def _check_models_front(models, front: ParetoFront) -> int:
    k = len(models)
    if k != front.k:
        raise ValueError(f"got {k} models for a front with {front.k} objectives")
    return k


def _seed_only(mc: MCConfig) -> MCConfig:
    """The same budget with seed-derived base tensors.

    The lookahead functions draw samples at several batch sizes internally,
    so an explicitly supplied base tensor (which is tied to one batch size)
    cannot be threaded through them.
    """
    return replace(mc, base_samples=None) if mc.base_samples is not None else mc


def lookahead_front(models, x: np.ndarray, front: ParetoFront) -> ParetoFront:
    """The front after the pseudo-observation at ``x``.

    The lookahead term scores batches against the data augmented with
    ``(x, y)``; substituting the fantasy model for the expectation over ``y``
    puts the posterior mean at ``x`` on the front. Without this, a candidate
    and its lookahead batch double-count overlapping volume.
    """
    mu = np.array([float(gp.posterior_marginals(m, x[None, :])[0][0]) for m in models])
    return front.with_point(mu)


def behvi(models, Xb, front: ParetoFront, mc: MCConfig) -> float:
    """Batch expected hypervolume improvement of a q-point input batch.

    Per posterior sample, the hypervolume of the front united with the
    sampled batch outputs is recomputed exactly; within-objective
    correlations across the batch are respected by the joint draw.
    """
    k = _check_models_front(models, front)
    Xb = np.atleast_2d(np.asarray(Xb, dtype=float))
    if Xb.shape[0] < 1:
        raise ValueError("batch must contain at least one point")
    samples, _ = gp._joint_sample_unique(models, Xb, mc.n_samples, mc.seed, mc.base_samples)
    values = hvi_points_batch(front, samples)
    return float(max(np.mean(values), 0.0))


def ehvi(models, x, front: ParetoFront, mc: MCConfig) -> float:
    """Expected hypervolume improvement of a single candidate input."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return behvi(models, x[None, :], front, mc)


def _partial_expected_excess(mu: float, sigma: float, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Integral of P(Y >= z) dz over [lo, hi] for Y ~ N(mu, sigma^2).

    Antiderivative: sigma * (t (1 - Phi(t)) - phi(t)), t=(z-mu)/sigma, which
    tends to 0 as z -> +inf. Degenerate sigma falls back to the indicator.
    """
    if sigma < 1e-12:
        return np.clip(np.minimum(hi, mu) - lo, 0.0, None)

    def anti(z: np.ndarray) -> np.ndarray:
        out = np.zeros_like(z)
        finite = np.isfinite(z)
        t = (z[finite] - mu) / sigma
        phi = np.exp(-0.5 * t * t) / _SQRT_2PI
        out[finite] = sigma * (t * (1.0 - ndtr(t)) - phi)
        return out

    return anti(hi) - anti(lo)


def ehvi_exact_2d(models, x, front: ParetoFront) -> float:
    """Closed-form EHVI for two objectives with independent Gaussian outputs.

    The non-dominated region above the reference point is cut into grid cells
    by the sorted front coordinates; each cell factorizes into a product of
    one-dimensional truncated-Gaussian partial moments.
    """
    k = _check_models_front(models, front)
    if k != 2:
        raise ValueError(f"exact cell decomposition requires K = 2, got K = {k}")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    mus, sigmas = [], []
    for model in models:
        mean, var = gp.posterior_marginals(model, x[None, :])
        mus.append(float(mean[0]))
        sigmas.append(float(np.sqrt(max(var[0], 0.0))))

    ref = front.reference
    pts = front.points[np.all(front.points > ref, axis=1)] if front.size else front.points
    order = np.argsort(pts[:, 0], kind="stable") if pts.shape[0] else np.empty(0, dtype=int)
    b = pts[order, 0]
    c = pts[order, 1]
    m = b.size

    x_edges = np.concatenate(([ref[0]], b, [np.inf]))
    y_edges = np.concatenate(([ref[1]], np.sort(c), [np.inf]))
    gx = _partial_expected_excess(mus[0], sigmas[0], x_edges[:-1], x_edges[1:])
    gy = _partial_expected_excess(mus[1], sigmas[1], y_edges[:-1], y_edges[1:])

    # Cell (i, j) is dominated iff some front point reaches past both of its
    # upper edges; t[i] is the tallest front y beyond x_edges[i + 1].
    t = np.concatenate((c, [-np.inf])) if m else np.array([-np.inf])
    nd = t[:, None] < y_edges[None, 1:]
    return float(np.sum(nd * np.outer(gx, gy)))


def _single_point_values(fmodels, grid: np.ndarray, front: ParetoFront, mc: MCConfig) -> np.ndarray:
    """BEHVI of each single grid point, sharing one q=1 base-sample tensor.

    Matches per-point ``behvi`` calls (same z, same marginal scale), so grid
    maxima are directly comparable with values computed point by point.
    """
    k = len(fmodels)
    n = mc.n_samples
    z = normal_base_samples(n, 1, k, mc.seed)[:, 0, :]
    m_grid = grid.shape[0]
    Y = np.empty((n, m_grid, k))
    for j, model in enumerate(fmodels):
        mean, var = gp.posterior_marginals(model, grid)
        sd = np.sqrt(np.clip(var, 0.0, None))
        Y[:, :, j] = mean[None, :] + sd[None, :] * z[:, j][:, None]
    if k == 2:
        flat = hvi2d_point_batch(Y.reshape(n * m_grid, 2), front.points, front.reference)
        vals = flat.reshape(n, m_grid).mean(axis=0)
    else:
        vals = np.empty(m_grid)
        for c in range(m_grid):
            vals[c] = np.mean(hvi_points_batch(front, Y[:, c : c + 1, :]))
    return np.clip(vals, 0.0, None)


def _best_lookahead_batch(
    fmodels, grid: np.ndarray, h_batch: int, front: ParetoFront, cfg: LookaheadConfig, mc: MCConfig
) -> tuple[np.ndarray, float]:
    """Greedy inner maximization of BEHVI over grid subsets of size h_batch.

    One point is added per round, choosing the grid member whose inclusion
    gives the largest batch value; ties break to the lowest grid index. Extra
    seeded random subsets are tried when ``inner_restarts`` > 1.
    """
    batch = np.empty((0, grid.shape[1]))
    value = 0.0
    for round_idx in range(h_batch):
        if batch.shape[0] == 0:
            vals = _single_point_values(fmodels, grid, front, mc)
        else:
            vals = np.array(
                [behvi(fmodels, np.vstack([batch, g[None, :]]), front, mc) for g in grid]
            )
        j = int(np.argmax(vals))
        batch = np.vstack([batch, grid[j][None, :]])
        value = float(vals[j])
    if cfg.inner_restarts > 1:
        rng = np.random.default_rng(mc.seed + 0x5EED)
        for _ in range(cfg.inner_restarts - 1):
            idx = rng.integers(0, grid.shape[0], size=h_batch)
            candidate = grid[idx]
            cand_value = behvi(fmodels, candidate, front, mc)
            if cand_value > value:
                batch, value = candidate, cand_value
    return batch, value


def nested_af(
    models,
    x,
    front: ParetoFront,
    cfg: LookaheadConfig,
    mc: MCConfig,
    grid: np.ndarray | None = None,
) -> float:
    """Candidate score with an inner-maximized lookahead batch.

    EHVI of the candidate plus the best BEHVI over lookahead batches of size
    ``horizon_cap - 1`` built from a fixed grid. The lookahead term is
    evaluated under the fantasy model conditioned at the candidate, against
    the front augmented with the candidate's posterior mean. With a horizon
    cap of 1 this is exactly EHVI.
    """
    _check_models_front(models, front)
    mc = _seed_only(mc)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    first = ehvi(models, x, front, mc)
    if cfg.horizon_cap == 1:
        return first
    if grid is None:
        grid = sobol_points(x.size, cfg.grid_size, mc.seed)
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if grid.shape[0] == 0:
        raise ValueError("nested lookahead requires a nonempty grid")
    fmodels = [gp.fantasize(m, x) for m in models]
    front_after = lookahead_front(models, x, front)
    _, value = _best_lookahead_batch(fmodels, grid, cfg.horizon_cap - 1, front_after, cfg, mc)
    return first + value


def joint_af(models, x, Xp, front: ParetoFront, mc: MCConfig) -> float:
    """Score of a candidate jointly with an explicit lookahead batch.

    EHVI of the candidate plus the BEHVI of the batch under the fantasy
    model conditioned at the candidate, against the front augmented with the
    candidate's posterior mean. An empty batch reduces this to EHVI.
    """
    _check_models_front(models, front)
    mc = _seed_only(mc)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    first = ehvi(models, x, front, mc)
    Xp = np.asarray(Xp, dtype=float).reshape(-1, x.size)
    if Xp.shape[0] == 0:
        return first
    fmodels = [gp.fantasize(m, x) for m in models]
    return first + behvi(fmodels, Xp, lookahead_front(models, x, front), mc)


def binom_af(models, Xb, front: ParetoFront, mc: MCConfig) -> float:
    """Whole-horizon batch score: the BEHVI of the batch under the data model."""
    return behvi(models, Xb, front, mc)


def binom_pick(models, Xb, front: ParetoFront, mc: MCConfig) -> np.ndarray:
    """Member of a batch with the highest immediate EHVI.

    Ties break to the lowest batch index. All members are scored under the
    same base samples, so the comparison is deterministic.
    """
    mc = _seed_only(mc)
    Xb = np.atleast_2d(np.asarray(Xb, dtype=float))
    if Xb.shape[0] < 1:
        raise ValueError("batch must contain at least one point")
    values = np.array([ehvi(models, row, front, mc) for row in Xb])
    return Xb[int(np.argmax(values))].copy()
