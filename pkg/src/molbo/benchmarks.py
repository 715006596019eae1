"""Analytic multi-objective test problems in maximization convention.

Each problem is defined by its native minimization objectives from the
standard engineering-design formulations (truss, beam, gear and brake
design) plus the ZDT3 synthetic. ``evaluate`` maps a unit-cube input to the
native box, snaps any discrete dimensions, evaluates the native objectives
g_k, and returns y_k = -g_k so the rest of the toolkit can maximize.

Reference points are stored in native (minimization) units;
``reference_max`` negates them into the internal maximization convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .pareto import ObjectiveVector

__all__ = ["Problem", "BenchmarkError", "make_problem", "evaluate", "reference_max", "PROBLEM_NAMES"]

_CLAMP = 1e-9


class BenchmarkError(RuntimeError):
    """A problem evaluation produced non-finite values even after clamping."""


# Standard discrete reinforcement-area choices for the concrete beam problem.
_BEAM_AREAS = np.array([
    0.20, 0.31, 0.40, 0.44, 0.60, 0.62, 0.79, 0.80, 0.88, 0.93,
    1.0, 1.20, 1.24, 1.32, 1.40, 1.55, 1.58, 1.60, 1.76, 1.80,
    1.86, 2.0, 2.17, 2.20, 2.37, 2.40, 2.48, 2.60, 2.64, 2.79,
    2.80, 3.0, 3.08, 3.10, 3.16, 3.41, 3.52, 3.60, 3.72, 3.95,
    3.96, 4.0, 4.03, 4.20, 4.34, 4.40, 4.65, 4.74, 4.84, 5.0,
    5.28, 5.40, 5.53, 5.72, 6.0, 6.16, 6.32, 6.60, 7.11, 7.20,
    7.80, 7.90, 8.0, 8.40, 8.69, 9.0, 9.48, 10.27, 11.0, 11.06,
    11.85, 12.0, 13.0, 14.0, 15.0,
])


@dataclass(frozen=True)
class Problem:
    """Metadata and native objectives for one benchmark."""

    name: str
    d: int
    k: int
    bounds: np.ndarray
    reference_native: np.ndarray
    native_fn: Callable[[np.ndarray], np.ndarray]
    integer_dims: tuple[int, ...] = ()
    level_dims: dict[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        bounds = np.asarray(self.bounds, dtype=float).reshape(self.d, 2)
        if np.any(bounds[:, 0] >= bounds[:, 1]):
            raise ValueError("each bound must satisfy lo < hi")
        ref = np.asarray(self.reference_native, dtype=float).reshape(self.k)
        object.__setattr__(self, "bounds", bounds)
        object.__setattr__(self, "reference_native", ref)


def _violations(g: np.ndarray) -> np.ndarray:
    """Constraint violations for constraints written as g(x) >= 0."""
    return np.where(g < 0.0, -g, 0.0)


def _zdt3(X: np.ndarray) -> np.ndarray:
    f1 = X[:, 0]
    g = 1.0 + 9.0 * np.sum(X[:, 1:], axis=1) / (X.shape[1] - 1)
    ratio = f1 / g
    f2 = g * (1.0 - np.sqrt(ratio) - ratio * np.sin(10.0 * np.pi * f1))
    return np.column_stack([f1, f2])


def _four_bar_truss(X: np.ndarray) -> np.ndarray:
    F, E, L = 10.0, 2.0e5, 200.0
    x1, x2, x3, x4 = X[:, 0], X[:, 1], X[:, 2], X[:, 3]
    f1 = L * (2.0 * x1 + np.sqrt(2.0) * x2 + np.sqrt(x3) + x4)
    f2 = (F * L / E) * (2.0 / x1 + 2.0 * np.sqrt(2.0) / x2 - 2.0 * np.sqrt(2.0) / x3 + 2.0 / x4)
    return np.column_stack([f1, f2])


def _reinforced_concrete_beam(X: np.ndarray) -> np.ndarray:
    x1, x2, x3 = X[:, 0], X[:, 1], X[:, 2]
    f1 = 29.4 * x1 + 0.6 * x2 * x3
    g1 = x1 * x3 - 7.735 * (x1 * x1) / x2 - 180.0
    g2 = 4.0 - x3 / x2
    f2 = _violations(g1) + _violations(g2)
    return np.column_stack([f1, f2])


def _gear_train(X: np.ndarray) -> np.ndarray:
    x1, x2, x3, x4 = X[:, 0], X[:, 1], X[:, 2], X[:, 3]
    ratio_error = np.abs(6.931 - (x3 / x1) * (x4 / x2))
    largest_gear = np.max(X, axis=1)
    g = 0.5 - ratio_error / 6.931
    return np.column_stack([ratio_error, largest_gear, _violations(g)])


def _welded_beam(X: np.ndarray) -> np.ndarray:
    P, L, E, G = 6000.0, 14.0, 30.0e6, 12.0e6
    tau_max, sigma_max = 13600.0, 30000.0
    x1, x2, x3, x4 = X[:, 0], X[:, 1], X[:, 2], X[:, 3]

    f1 = 1.10471 * x1 * x1 * x2 + 0.04811 * x3 * x4 * (14.0 + x2)
    f2 = (4.0 * P * L**3) / (E * x4 * x3**3)

    M = P * (L + x2 / 2.0)
    half_span_sq = ((x1 + x3) / 2.0) ** 2
    R = np.sqrt(x2 * x2 / 4.0 + half_span_sq)
    J = 2.0 * np.sqrt(2.0) * x1 * x2 * (x2 * x2 / 12.0 + half_span_sq)
    tau_dd = M * R / J
    tau_d = P / (np.sqrt(2.0) * x1 * x2)
    tau = np.sqrt(tau_d * tau_d + 2.0 * tau_d * tau_dd * x2 / (2.0 * R) + tau_dd * tau_dd)
    sigma = 6.0 * P * L / (x4 * x3 * x3)
    buckling = (
        4.013 * E * np.sqrt(x3 * x3 * x4**6 / 36.0) / (L * L)
        * (1.0 - (x3 / (2.0 * L)) * np.sqrt(E / (4.0 * G)))
    )
    g = np.column_stack([tau_max - tau, sigma_max - sigma, x4 - x1, buckling - P])
    f3 = np.sum(_violations(g), axis=1)
    return np.column_stack([f1, f2, f3])


def _disc_brake(X: np.ndarray) -> np.ndarray:
    x1, x2, x3, x4 = X[:, 0], X[:, 1], X[:, 2], X[:, 3]
    ring = x2 * x2 - x1 * x1
    cubes = x2**3 - x1**3
    f1 = 4.9e-5 * ring * (x4 - 1.0)
    f2 = 9.82e6 * ring / (x3 * x4 * cubes)
    g = np.column_stack([
        (x2 - x1) - 20.0,
        0.4 - x3 / (3.14 * ring),
        1.0 - 2.22e-3 * x3 * cubes / (ring * ring),
        2.66e-2 * x3 * x4 * cubes / ring - 900.0,
    ])
    f3 = np.sum(_violations(g), axis=1)
    return np.column_stack([f1, f2, f3])


_SQRT2 = float(np.sqrt(2.0))

_REGISTRY: dict[str, Callable[[], Problem]] = {
    "zdt3": lambda: Problem(
        name="zdt3", d=9, k=2,
        bounds=[(0.0, 1.0)] * 9,
        reference_native=(11.0, 11.0),
        native_fn=_zdt3,
    ),
    "four_bar_truss": lambda: Problem(
        name="four_bar_truss", d=4, k=2,
        bounds=[(1.0, 3.0), (_SQRT2, 3.0), (_SQRT2, 3.0), (1.0, 3.0)],
        reference_native=(2967.0243, 0.0383),
        native_fn=_four_bar_truss,
    ),
    "reinforced_concrete_beam": lambda: Problem(
        name="reinforced_concrete_beam", d=3, k=2,
        bounds=[(0.2, 15.0), (0.0, 20.0), (0.0, 40.0)],
        reference_native=(703.6860, 899.2291),
        native_fn=_reinforced_concrete_beam,
        level_dims={0: _BEAM_AREAS},
    ),
    "gear_train": lambda: Problem(
        name="gear_train", d=4, k=3,
        bounds=[(12.0, 60.0)] * 4,
        reference_native=(6.6764, 59.0, 0.4633),
        native_fn=_gear_train,
        integer_dims=(0, 1, 2, 3),
    ),
    "welded_beam": lambda: Problem(
        name="welded_beam", d=4, k=3,
        bounds=[(0.125, 5.0), (0.1, 10.0), (0.1, 10.0), (0.125, 5.0)],
        reference_native=(202.8569, 42.0653, 2111643.6209),
        native_fn=_welded_beam,
    ),
    "disc_brake": lambda: Problem(
        name="disc_brake", d=4, k=3,
        bounds=[(55.0, 80.0), (75.0, 110.0), (1000.0, 3000.0), (11.0, 20.0)],
        reference_native=(6.1356, 6.3421, 12.9737),
        native_fn=_disc_brake,
    ),
}

PROBLEM_NAMES = tuple(sorted(_REGISTRY))


def make_problem(name: str) -> Problem:
    """Look a benchmark up by name."""
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise ValueError(
            f"unknown problem {name!r}; supported problems: {', '.join(PROBLEM_NAMES)}"
        ) from None


def _snap_discrete(p: Problem, X: np.ndarray) -> np.ndarray:
    X = X.copy()
    for i in p.integer_dims:
        X[:, i] = np.floor(X[:, i] + 0.5)
    for i, levels in p.level_dims.items():
        idx = np.searchsorted(levels, X[:, i])
        idx = np.clip(idx, 1, levels.size - 1)
        lo, hi = levels[idx - 1], levels[idx]
        X[:, i] = np.where(X[:, i] - lo <= hi - X[:, i], lo, hi)
    return X


def to_native(p: Problem, U: np.ndarray) -> np.ndarray:
    """Map unit-cube rows to the native box, snapping discrete dimensions."""
    lo, hi = p.bounds[:, 0], p.bounds[:, 1]
    return _snap_discrete(p, lo + U * (hi - lo))


def evaluate_native_batch(p: Problem, U: np.ndarray) -> np.ndarray:
    """Native minimization objectives for (n, d) unit-cube inputs."""
    U = np.atleast_2d(np.asarray(U, dtype=float))
    if U.shape[1] != p.d:
        raise ValueError(f"{p.name} expects {p.d} input dimensions, got {U.shape[1]}")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return p.native_fn(to_native(p, U))


def evaluate(p: Problem, x_unit) -> ObjectiveVector:
    """Evaluate one unit-cube input; returns maximization-convention outputs.

    Non-finite intermediates (degenerate geometry on the box boundary) are
    retried with the input clamped slightly into the interior; if the result
    is still non-finite the evaluation fails.
    """
    x = np.atleast_1d(np.asarray(x_unit, dtype=float))
    if x.size != p.d:
        raise ValueError(f"{p.name} expects {p.d} input dimensions, got {x.size}")
    if np.any(x < -1e-12) or np.any(x > 1.0 + 1e-12):
        raise ValueError("input must lie in the unit cube")
    x = np.clip(x, 0.0, 1.0)
    f = evaluate_native_batch(p, x[None, :])[0]
    if not np.all(np.isfinite(f)):
        clamped = np.clip(x, _CLAMP, 1.0 - _CLAMP)
        f = evaluate_native_batch(p, clamped[None, :])[0]
        if not np.all(np.isfinite(f)):
            raise BenchmarkError(f"{p.name} produced non-finite objectives at {x.tolist()}")
    return ObjectiveVector(tuple(-f))


def reference_max(p: Problem) -> ObjectiveVector:
    """The problem's reference point in the internal maximization convention."""
    return ObjectiveVector(tuple(-p.reference_native))
