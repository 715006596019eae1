"""Pareto dominance, front maintenance, and exact hypervolume computation.

Everything in this module uses the maximization convention: larger objective
values are better, and the hypervolume of a front is the Lebesgue measure of
the region that the front dominates above a fixed reference point.

Comparisons are exact floating-point comparisons; there is no epsilon in the
dominance tests. Tolerances belong in tests, not here, because the
hypervolume-improvement additivity identity holds in exact arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

__all__ = [
    "ObjectiveVector",
    "ParetoFront",
    "HvEstimate",
    "dominates",
    "nondominated",
    "hypervolume",
    "hvi",
    "hv_mc_oracle",
]


def as_objective_array(y) -> np.ndarray:
    """Coerce an ObjectiveVector or array-like into a float 1-d array."""
    values = np.asarray(getattr(y, "values", y), dtype=float)
    if values.ndim != 1:
        raise ValueError(f"expected a 1-d objective vector, got shape {values.shape}")
    return values


def as_objective_matrix(Y, k: int | None = None) -> np.ndarray:
    """Coerce an iterable of objective vectors into an (m, K) float matrix."""
    if isinstance(Y, np.ndarray) and Y.ndim == 2:
        mat = np.asarray(Y, dtype=float)
    else:
        rows = [as_objective_array(y) for y in Y]
        if not rows:
            return np.empty((0, k if k is not None else 0))
        mat = np.vstack(rows)
    if k is not None and mat.shape[0] and mat.shape[1] != k:
        raise ValueError(f"expected {k} objectives, got {mat.shape[1]}")
    return mat


@dataclass(frozen=True)
class ObjectiveVector:
    """A point in objective space, K >= 2 entries, maximization convention."""

    values: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if len(values) < 2:
            raise ValueError("objective vectors need at least two entries")
        if not all(np.isfinite(v) for v in values):
            raise ValueError(f"objective vector has non-finite entries: {values}")
        object.__setattr__(self, "values", values)

    @property
    def k(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class ParetoFront:
    """A mutually non-dominated point set together with a reference point.

    Points that do not dominate the reference may be stored; they simply
    contribute zero volume. Construction raises if the stored points are not
    mutually non-dominated; use :meth:`from_points` to filter first.
    """

    points: np.ndarray
    reference: np.ndarray

    def __post_init__(self):
        ref = as_objective_array(self.reference)
        if ref.size < 2:
            raise ValueError("reference point needs at least two entries")
        if not np.all(np.isfinite(ref)):
            raise ValueError("reference point must be finite")
        pts = as_objective_matrix(self.points, k=ref.size)
        if pts.size and not np.all(np.isfinite(pts)):
            raise ValueError("front points must be finite")
        if pts.shape[0] == 0:
            pts = pts.reshape(0, ref.size)
        elif pts.shape[0] != _nondominated_matrix(pts).shape[0]:
            raise ValueError("front points must be mutually non-dominated")
        pts = pts.copy()
        pts.setflags(write=False)
        ref.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "reference", ref)

    @classmethod
    def from_points(cls, points, reference) -> "ParetoFront":
        ref = as_objective_array(reference)
        pts = as_objective_matrix(points, k=ref.size)
        return cls(_nondominated_matrix(pts.reshape(-1, ref.size)), ref)

    @property
    def k(self) -> int:
        return int(self.reference.size)

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    def with_point(self, y) -> "ParetoFront":
        """Front after inserting one observation (non-dominated filtered)."""
        y = as_objective_array(y)
        if y.size != self.k:
            raise ValueError(f"dimension mismatch: point has {y.size}, front has {self.k}")
        stacked = np.vstack([self.points, y[None, :]]) if self.size else y[None, :]
        return ParetoFront.from_points(stacked, self.reference)

    def vectors(self) -> tuple[ObjectiveVector, ...]:
        return tuple(ObjectiveVector(tuple(row)) for row in self.points)


class HvEstimate(NamedTuple):
    value: float
    stderr: float


def dominates(a, b) -> bool:
    """True iff ``a`` Pareto-dominates ``b``: >= everywhere, > somewhere."""
    va, vb = as_objective_array(a), as_objective_array(b)
    if va.size != vb.size:
        raise ValueError(f"dimension mismatch: {va.size} vs {vb.size}")
    return bool(np.all(va >= vb) and np.any(va > vb))


def _nondominated_matrix(Y: np.ndarray) -> np.ndarray:
    """Maximal non-dominated subset of the rows of Y, duplicates collapsed.

    First-occurrence order is preserved, so the result is deterministic and
    independent of how callers assembled the input.
    """
    if Y.shape[0] == 0:
        return Y
    seen: dict[bytes, int] = {}
    order = []
    for i, row in enumerate(Y):
        key = row.tobytes()
        if key not in seen:
            seen[key] = i
            order.append(i)
    U = Y[order]
    m = U.shape[0]
    keep = np.ones(m, dtype=bool)
    for i in range(m):
        if not keep[i]:
            continue
        ge = np.all(U >= U[i], axis=1)
        gt = np.any(U > U[i], axis=1)
        if np.any(ge & gt & keep):
            keep[i] = False
    return U[keep]


def nondominated(Y) -> np.ndarray:
    """Non-dominated subset of a collection of objective vectors.

    Accepts an (m, K) array or an iterable of vectors; returns an (m', K)
    array. Empty input yields an empty output.
    """
    mat = as_objective_matrix(Y)
    if mat.shape[0] == 0:
        return mat
    k = mat.shape[1]
    if k < 2:
        raise ValueError("objective vectors need at least two entries")
    return _nondominated_matrix(mat)


def _hv2d(points: np.ndarray, ref: np.ndarray) -> float:
    """Exact 2-d hypervolume by a descending-first-coordinate sweep."""
    mask = np.all(points > ref, axis=1)
    pts = points[mask]
    if pts.shape[0] == 0:
        return 0.0
    order = np.argsort(-pts[:, 0], kind="stable")
    xs = pts[order, 0]
    ys = pts[order, 1]
    prev = np.maximum.accumulate(np.concatenate(([ref[1]], ys[:-1])))
    contrib = (xs - ref[0]) * np.clip(ys - prev, 0.0, None)
    return float(np.sum(contrib))


def _hv_recursive(pts: np.ndarray, ref: np.ndarray) -> float:
    """Exact hypervolume for K >= 2 via dimension sweep on the last axis.

    Slabs between consecutive values of the last coordinate are measured by
    recursing on the projection of the points that reach that slab. The
    sweeps tolerate dominated projections, so no per-level refiltering is
    needed; callers filter once up front.
    """
    k = ref.size
    if pts.shape[0] == 0:
        return 0.0
    if k == 2:
        return _hv2d(pts, ref)
    order = np.argsort(-pts[:, -1], kind="stable")
    pts = pts[order]
    levels = pts[:, -1]
    total = 0.0
    m = pts.shape[0]
    for i in range(m):
        lower = levels[i + 1] if i + 1 < m else ref[-1]
        thickness = levels[i] - lower
        if thickness <= 0.0:
            continue
        total += thickness * _hv_recursive(pts[: i + 1, :-1], ref[:-1])
    return total


def _hv(points: np.ndarray, ref: np.ndarray) -> float:
    if points.size and not np.all(np.isfinite(points)):
        raise ValueError("hypervolume requires finite coordinates")
    if points.shape[0] == 0:
        return 0.0
    if points.shape[1] != ref.size:
        raise ValueError(f"dimension mismatch: points {points.shape[1]}, reference {ref.size}")
    pts = points[np.all(points > ref, axis=1)]
    if pts.shape[0] == 0:
        return 0.0
    return _hv_recursive(_nondominated_matrix(pts), ref)


def hypervolume(front: ParetoFront) -> float:
    """Exact hypervolume of a front with respect to its reference point."""
    return _hv(front.points, front.reference)


def hvi(y, front: ParetoFront) -> float:
    """Hypervolume improvement of adding ``y`` to ``front``.

    Exactly zero when ``y`` is weakly dominated by the front or does not
    dominate the reference point.
    """
    v = as_objective_array(y)
    if v.size != front.k:
        raise ValueError(f"dimension mismatch: point has {v.size}, front has {front.k}")
    if not np.all(np.isfinite(v)):
        raise ValueError("hvi requires a finite objective vector")
    union = np.vstack([front.points, v[None, :]]) if front.size else v[None, :]
    return _hv(union, front.reference) - _hv(front.points, front.reference)


def hv_mc_oracle(front: ParetoFront, n_samples: int, seed: int) -> HvEstimate:
    """Monte-Carlo estimate of the dominated volume, with its standard error.

    Uniform sampling inside the bounding box spanned by the reference point
    and the componentwise maximum of the front. Kept independent of the exact
    sweep algorithms so it can serve as an oracle for them.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    ref = front.reference
    pts = front.points[np.all(front.points > ref, axis=1)] if front.size else front.points
    if pts.shape[0] == 0:
        return HvEstimate(0.0, 0.0)
    hi = np.max(pts, axis=0)
    widths = hi - ref
    box_volume = float(np.prod(widths))
    rng = np.random.default_rng(seed)
    z = ref + rng.random((n_samples, ref.size)) * widths
    dominated = np.zeros(n_samples, dtype=bool)
    for p in pts:
        dominated |= np.all(z <= p, axis=1)
    p_hat = float(np.mean(dominated))
    value = box_volume * p_hat
    stderr = box_volume * float(np.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / n_samples))
    return HvEstimate(value, stderr)


# ---------------------------------------------------------------------------
# Batched helpers used by the Monte Carlo acquisition estimators. These share
# the 2-d sweep with _hv2d so per-sample values are exact.
# ---------------------------------------------------------------------------


def hv2d_batch(points: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Exact 2-d hypervolume of each row-set in an (n, m, 2) stack."""
    clipped = np.maximum(points, ref)
    order = np.argsort(-clipped[:, :, 0], axis=1, kind="stable")
    xs = np.take_along_axis(clipped[:, :, 0], order, axis=1)
    ys = np.take_along_axis(clipped[:, :, 1], order, axis=1)
    n = points.shape[0]
    prev = np.concatenate([np.full((n, 1), ref[1]), ys[:, :-1]], axis=1)
    prev = np.maximum.accumulate(prev, axis=1)
    contrib = (xs - ref[0]) * np.clip(ys - prev, 0.0, None)
    return np.sum(contrib, axis=1)


def hvi2d_point_batch(Y: np.ndarray, front_points: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Exact single-point hypervolume improvement for each row of (n, 2) Y.

    Integrates the exclusive region of each candidate over the strips induced
    by the front's staircase; no per-sample sort is needed.
    """
    fp = front_points[np.all(front_points > ref, axis=1)] if front_points.size else front_points.reshape(0, 2)
    fp = _nondominated_matrix(fp)
    order = np.argsort(fp[:, 0], kind="stable") if fp.shape[0] else np.empty(0, dtype=int)
    b = fp[order, 0] if fp.shape[0] else np.empty(0)
    c = fp[order, 1] if fp.shape[0] else np.empty(0)
    # Segment j covers x in (edges[j], edges[j+1]]; staircase height there is
    # heights[j] (the largest front y among points with x beyond the segment).
    edges = np.concatenate(([ref[0]], b, [np.inf]))
    heights = np.concatenate((c, [ref[1]]))
    a = np.maximum(Y[:, 0], ref[0])[:, None]
    y2 = np.maximum(Y[:, 1], ref[1])[:, None]
    lo = edges[None, :-1]
    hi = np.minimum(a, edges[None, 1:])
    length = np.clip(hi - lo, 0.0, None)
    gain = np.clip(y2 - heights[None, :], 0.0, None)
    return np.sum(length * gain, axis=1)


def hvi_points_batch(front: ParetoFront, Y: np.ndarray, ref: np.ndarray | None = None) -> np.ndarray:
    """Per-sample batch hypervolume improvement.

    ``Y`` is (n, q, K): each of the n rows is a candidate batch scored as a
    set against the same front. Exact for any K; fully vectorized for K = 2.
    """
    ref = front.reference if ref is None else ref
    n, q, k = Y.shape
    if k == 2:
        if q == 1:
            return hvi2d_point_batch(Y[:, 0, :], front.points, ref)
        if front.size:
            stacked = np.concatenate(
                [np.broadcast_to(front.points, (n,) + front.points.shape), Y], axis=1
            )
        else:
            stacked = Y
        base = hv2d_batch(front.points[None, :, :], ref)[0] if front.size else 0.0
        return np.clip(hv2d_batch(stacked, ref) - base, 0.0, None)
    base = _hv(front.points, ref)
    out = np.zeros(n)
    # Fast path: a sample contributes only if some batch member is above the
    # reference and not weakly dominated by the front.
    above = np.all(Y > ref, axis=2)
    undominated = above.copy()
    for p in front.points:
        undominated &= ~np.all(Y <= p, axis=2)
    needs_hv = np.any(undominated, axis=1)
    for i in np.nonzero(needs_hv)[0]:
        union = np.vstack([front.points, Y[i]]) if front.size else Y[i]
        out[i] = max(_hv(union, ref) - base, 0.0)
    return out
