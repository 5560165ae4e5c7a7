"""Small numerical helpers shared by the threshold solvers."""

from __future__ import annotations

import numpy as np


def log2_ratio(num, den):
    """``0.5 * log2(num / den)`` with nonpositive arguments mapped to ``-inf``."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 0.5 * np.log2(num / den)
    out = np.where((num <= 0) & (den > 0), -np.inf, out)
    out = np.where(den == 0, np.where(num > 0, np.inf, -np.inf), out)
    return out


def db(x):
    """Power ratio in decibels (``10 log10``)."""
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(x)


def from_db(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


def bisect_boolean(pred, lo: float, hi: float, tol: float, max_iter: int = 200):
    """Largest ``x`` in ``[lo, hi]`` (to ``tol``) with ``pred(x)`` true.

    Assumes ``pred(lo)`` is true and ``pred`` switches from true to false
    once.  Returns ``hi`` when ``pred(hi)`` already holds.
    """
    if pred(hi):
        return hi
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo


def invert_decreasing(fn, targets, lo: float, hi: float, iters: int = 64):
    """Vectorized ``sup{x in [lo, hi] : fn(x) >= target}`` for a nonincreasing ``fn``.

    Returns ``-inf`` where ``fn(lo) < target`` and ``+inf`` where
    ``fn(hi) >= target`` (the constraint is inactive on the interval).
    """
    t = np.asarray(targets, dtype=float)
    a = np.full(t.shape, float(lo))
    b = np.full(t.shape, float(hi))
    f_lo = np.asarray(fn(a), dtype=float)
    f_hi = np.asarray(fn(b), dtype=float)
    for _ in range(iters):
        m = 0.5 * (a + b)
        ok = np.asarray(fn(m), dtype=float) >= t
        a = np.where(ok, m, a)
        b = np.where(ok, b, m)
    out = np.where(f_lo < t, -np.inf, a)
    out = np.where(f_hi >= t, np.inf, out)
    return out
