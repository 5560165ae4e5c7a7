"""
Two-dimensional rate regions described by monotone upper boundaries.

A region is ``{(R1, R2) >= 0 : R1 <= r1_max, R2 <= upper(R1)}`` where
``upper`` is the pointwise minimum of linear half-plane bounds and of
arbitrary decreasing curves ``R2 <= f(R1)``.  Curves are kept as functions,
so every query evaluates constraints exactly instead of interpolating.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

DEFAULT_SAMPLES = 512
CONTAIN_TOL = 1e-9


@dataclass(frozen=True)
class HalfPlane:
    """``a1 R1 + a2 R2 <= c`` with ``a1, a2 >= 0``."""

    a1: float
    a2: float
    c: float
    name: str = ""

    def r2_bound(self, r1):
        r1 = np.asarray(r1, dtype=float)
        if self.a2 > 0:
            return (self.c - self.a1 * r1) / self.a2
        return np.where(self.a1 * r1 <= self.c + CONTAIN_TOL, np.inf, -np.inf)

    def as_tuple(self):
        return (self.a1, self.a2, self.c)


@dataclass(frozen=True)
class Curve:
    """``R2 <= fn(R1)`` for a vectorized decreasing ``fn``; ``breakpoints`` are kinks worth sampling."""

    fn: Callable
    name: str = ""
    breakpoints: Tuple[float, ...] = ()
    data: object = field(default=None, compare=False)

    def r2_bound(self, r1):
        return np.asarray(self.fn(np.asarray(r1, dtype=float)), dtype=float)


@dataclass(frozen=True)
class RateRegion:
    """Convex region under a decreasing boundary in the nonnegative quadrant.

    Parameters
    ----------
    halfplanes : tuple of HalfPlane
    curves : tuple of Curve
    r1_cap : float
        A priori limit on ``R1``; the effective ``r1_max`` is the largest
        ``R1 <= r1_cap`` at which the boundary is still nonnegative.
    n : int
        Number of boundary samples returned by ``boundary``.
    """

    halfplanes: Tuple[HalfPlane, ...] = ()
    curves: Tuple[Curve, ...] = ()
    r1_cap: float = np.inf
    n: int = DEFAULT_SAMPLES
    r1_max: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "halfplanes", tuple(self.halfplanes))
        object.__setattr__(self, "curves", tuple(self.curves))
        object.__setattr__(self, "r1_max", self._find_r1_max())

    def _raw_upper(self, r1):
        r1 = np.asarray(r1, dtype=float)
        out = np.full(r1.shape, np.inf)
        for hp in self.halfplanes:
            out = np.minimum(out, hp.r2_bound(r1))
        for cv in self.curves:
            out = np.minimum(out, cv.r2_bound(r1))
        return out

    def _find_r1_max(self) -> float:
        cap = float(self.r1_cap)
        for hp in self.halfplanes:
            if hp.a1 > 0:
                cap = min(cap, hp.c / hp.a1)
        if not np.isfinite(cap):
            raise ValueError("region is unbounded in R1; give r1_cap or a bounding constraint")
        cap = max(cap, 0.0)
        if self._raw_upper(cap) >= -CONTAIN_TOL:
            return cap
        if self._raw_upper(0.0) < -CONTAIN_TOL:
            return 0.0
        lo, hi = 0.0, cap
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self._raw_upper(mid) >= 0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-14 * max(1.0, hi):
                break
        return lo

    def upper(self, r1):
        """Largest ``R2`` in the region at each ``R1`` (``-inf`` outside ``[0, r1_max]``)."""
        r1 = np.asarray(r1, dtype=float)
        out = np.maximum(self._raw_upper(np.clip(r1, 0.0, self.r1_max)), 0.0)
        out = np.where((r1 < 0) | (r1 > self.r1_max * (1 + 1e-15) + 1e-15), -np.inf, out)
        return float(out) if out.ndim == 0 else out

    def grid(self, n: int = None) -> np.ndarray:
        return np.linspace(0.0, self.r1_max, self.n if n is None else n)

    @property
    def boundary(self) -> np.ndarray:
        """``(n, 2)`` array of boundary samples ``(R1, R2)``."""
        r1 = self.grid()
        return np.column_stack([r1, self.upper(r1)])

    def intersect(self, other: "RateRegion") -> "RateRegion":
        return RateRegion(self.halfplanes + other.halfplanes, self.curves + other.curves,
                          min(self.r1_max, other.r1_max), n=self.n)

    def with_constraints(self, halfplanes=(), curves=()) -> "RateRegion":
        return RateRegion(self.halfplanes + tuple(halfplanes), self.curves + tuple(curves),
                          self.r1_max, n=self.n)

    def _candidate_r1(self, dense: int) -> np.ndarray:
        pts = [np.linspace(0.0, self.r1_max, dense), [self.r1_max]]
        for cv in self.curves:
            pts.append(cv.breakpoints)
        hps = [hp for hp in self.halfplanes if hp.a2 > 0]
        for i, p in enumerate(hps):
            for q in hps[i + 1:]:
                det = p.a1 * q.a2 - q.a1 * p.a2
                if abs(det) > 1e-15:
                    pts.append([(p.c * q.a2 - q.c * p.a2) / det])
        r1 = np.concatenate([np.atleast_1d(np.asarray(p, dtype=float)) for p in pts])
        return np.unique(r1[(r1 >= 0) & (r1 <= self.r1_max)])

    def max_weighted(self, w1: float = 1.0, w2: float = 1.0, dense: int = 4097):
        """Maximize ``w1 R1 + w2 R2`` over the region; returns ``(value, R1, R2)``."""
        r1 = self._candidate_r1(dense)
        vals = w1 * r1 + w2 * self.upper(r1)
        k = int(np.argmax(vals))
        best = (float(vals[k]), float(r1[k]))
        if self.curves and r1.size > 2:
            lo = r1[max(k - 1, 0)]
            hi = r1[min(k + 1, r1.size - 1)]
            if hi > lo:
                res = minimize_scalar(lambda x: -(w1 * x + w2 * self.upper(x)),
                                      bounds=(lo, hi), method="bounded",
                                      options={"xatol": 1e-12})
                if -res.fun > best[0]:
                    best = (float(-res.fun), float(res.x))
        return best[0], best[1], float(self.upper(best[1]))

    def max_sum(self) -> float:
        return self.max_weighted(1.0, 1.0)[0]

    def contains(self, r1, r2, tol: float = CONTAIN_TOL):
        r1 = np.asarray(r1, dtype=float)
        r2 = np.asarray(r2, dtype=float)
        inside = (r1 >= -tol) & (r2 >= -tol) & (r1 <= self.r1_max + tol)
        ub = self.upper(np.clip(r1, 0.0, self.r1_max))
        out = inside & (r2 <= ub + tol)
        return bool(out) if out.ndim == 0 else out

    def halfplane_tuples(self):
        return [hp.as_tuple() for hp in self.halfplanes]


def upper_concave_hull(points) -> np.ndarray:
    """Upper concave envelope of points in the plane, sorted by x (monotone chain)."""
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    pts = pts[np.lexsort((-pts[:, 1], pts[:, 0]))]
    hull = []
    for p in pts:
        if hull and p[0] == hull[-1][0]:
            continue
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            cross = (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return np.array(hull)


def decreasing_hull(points) -> np.ndarray:
    """Boundary of the convex hull of ``points`` together with their projections on the axes.

    The result is the upper-right frontier: a concave, nonincreasing
    piecewise-linear curve from ``(0, R2max)`` to the highest point at
    ``R1max``.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    pts = np.clip(pts, 0.0, None)
    aug = np.vstack([pts, np.column_stack([np.zeros(len(pts)), pts[:, 1]]),
                     np.column_stack([pts[:, 0], np.zeros(len(pts))]), [[0.0, 0.0]]])
    hull = upper_concave_hull(aug)
    # Drop any rising prefix: the projections make (0, max R2) the first vertex.
    k = int(np.argmax(hull[:, 1]))
    return hull[k:] if hull[k, 0] == 0.0 else np.vstack([[0.0, hull[k, 1]], hull[k:]])


def polyline_curve(vertices: np.ndarray, name: str = "") -> Curve:
    """Curve through ``vertices`` (increasing x); ``-inf`` beyond the last vertex."""
    xs, ys = vertices[:, 0].copy(), vertices[:, 1].copy()

    def fn(r1):
        out = np.interp(r1, xs, ys)
        return np.where(r1 > xs[-1] * (1 + 1e-12) + 1e-15, -np.inf, out)

    return Curve(fn, name, tuple(xs.tolist()))
