"""
Two-user Gaussian interference channel: inner and outer bounds, low
interference certificates and INR thresholds.

Receiver 1 sees ``Y1 = X1 + h12 X2 + Z1`` and receiver 2 sees
``Y2 = h21 X1 + X2 + Z2``.  Rates are in bits per channel use.

Outer bounds built from correlated genies are expressed as curves
``R2 <= f(R1)``.  For a family of genies the region is the intersection over
the family, which the search approximates by the pointwise minimum over a
finite candidate set; every candidate is a valid bound on its own, so the
approximation can only loosen the region, never invalidate it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import bisect as _scipy_bisect
from scipy.optimize import minimize_scalar

from ._numeric import db, invert_decreasing, log2_ratio
from .channel_model import (InterferenceNetwork, build_gaussian_system, require_two_user,
                            require_weak)
from .errors import DomainError, InfeasibleGenieError
from .gaussian_core import GaussianSystem, conditional_cov, mutual_information
from .genies import EtwGenie, GenieSpec2
from .regions import Curve, HalfPlane, RateRegion, decreasing_hull, polyline_curve

SLACK_FLOOR = 1e-9
SMART_TOL = 1e-9
SYMMETRIC_LIMIT = 0.5


def capacity(P) -> float:
    """Point-to-point AWGN capacity ``0.5 log2(1 + P)``."""
    return 0.5 * np.log2(1.0 + P)


@dataclass(frozen=True)
class BoundCertificate:
    """A sum-rate value with the reason it holds."""

    value: float
    kind: str
    witness: object = None


@dataclass(frozen=True)
class SumCapacityResult:
    """Sum capacity if established, else the bracketing inner and outer bounds."""

    established: bool
    inner: BoundCertificate
    outer: BoundCertificate

    @property
    def value(self) -> Optional[float]:
        return self.inner.value if self.established else None

    @property
    def gap(self) -> float:
        return self.outer.value - self.inner.value


@dataclass(frozen=True)
class LowInterferenceResult:
    """Outcome of the low-interference test; truthiness is ``holds``."""

    holds: bool
    value: float
    witness: Optional[GenieSpec2] = None

    def __bool__(self):
        return self.holds


@dataclass(frozen=True)
class ThresholdResult:
    """Interference gain at the regime boundary and the matching INR."""

    snr: float
    h: float
    inr: float

    @property
    def inr_db(self) -> float:
        return float(db(self.inr))

    @property
    def snr_db(self) -> float:
        return float(db(self.snr))


@dataclass(frozen=True)
class GenieSearchConfig:
    """Resolution of the correlated-genie searches behind the EPI outer region.

    Correlations run over ``[-rho_max, rho_max]`` in steps of ``rho_step``;
    noise scales over a log grid on ``[eta_min, eta_max]`` clipped to the
    slack constraints, plus the constraint boundary itself.  Each of
    ``n_anchors`` rate points gets its own best genie, optionally polished by
    a batched compass search.
    """

    rho_step: float = 0.02
    rho_max: float = 0.999
    eta_min: float = 1e-3
    eta_max: float = 1e3
    n_eta: int = 61
    n_anchors: int = 32
    refine: bool = True
    refine_iters: int = 60
    slack_floor: float = SLACK_FLOOR
    n_samples: int = 512
    threads: Optional[int] = None

    def rho_grid(self) -> np.ndarray:
        g = np.arange(-self.rho_max, self.rho_max, self.rho_step)
        return np.unique(np.concatenate([g, [self.rho_max, 0.0]]))

    def eta_grid(self) -> np.ndarray:
        return np.geomspace(self.eta_min, self.eta_max, self.n_eta)


# --------------------------------------------------------------------------
# Inner bound and engine-evaluated genie statistics


def tin_rates(net: InterferenceNetwork):
    """Per-user rates when both receivers treat interference as noise."""
    require_two_user(net)
    r1 = capacity(net.P1 / (1.0 + net.h12 ** 2 * net.P2))
    r2 = capacity(net.P2 / (1.0 + net.h21 ** 2 * net.P1))
    return float(r1), float(r2)


def tin_sum_rate(net: InterferenceNetwork) -> float:
    return float(sum(tin_rates(net)))


@dataclass(frozen=True)
class GenieVariances:
    """Engine-computed variances for the normalized genie ``T_i = X_i + eta_i W_i``.

    The genie actually handed out is ``S1 = h21 T1`` and ``S2 = h12 T2``;
    the bounds use the scale-free ratios below and insert the gains
    explicitly, which keeps zero cross gains well defined.
    """

    y1: np.ndarray
    y1_given_t1: np.ndarray
    t1: np.ndarray
    t1_given_x1: np.ndarray
    y2: np.ndarray
    y2_given_t2: np.ndarray
    t2: np.ndarray
    t2_given_x2: np.ndarray


def _user_system(net, user, eta, rho) -> GaussianSystem:
    """Receiver ``user`` with its normalized genie; ``corr(W, Z) = rho``."""
    if user == 1:
        P_own, P_other, h_in = net.P1, net.P2, net.h12
    else:
        P_own, P_other, h_in = net.P2, net.P1, net.h21
    eta, rho = np.broadcast_arrays(np.asarray(eta, dtype=float), np.asarray(rho, dtype=float))
    cov = np.zeros(eta.shape + (4, 4))
    cov[..., :, :] = np.diag([P_own, P_other, 1.0, 1.0])
    cov[..., 2, 3] = cov[..., 3, 2] = rho
    return GaussianSystem.from_linear(
        ["X", "Xo", "Z", "W"], cov,
        {"Y": {"X": 1.0, "Xo": h_in, "Z": 1.0}, "T": {"X": 1.0, "W": eta}})


def user_variances(net, user, eta, rho) -> dict:
    sys = _user_system(net, user, eta, rho)
    c = sys.joint_cov.entries
    i = sys.indices(["Y", "T"])
    return {
        "y": c[..., i[0], i[0]],
        "y_given_t": conditional_cov(sys, "Y", "T").entries[..., 0, 0],
        "t": c[..., i[1], i[1]],
        "t_given_x": conditional_cov(sys, "T", "X").entries[..., 0, 0],
    }


def genie_variances(net: InterferenceNetwork, genie: GenieSpec2) -> GenieVariances:
    u1 = user_variances(net, 1, genie.eta1, genie.rho1)
    u2 = user_variances(net, 2, genie.eta2, genie.rho2)
    return GenieVariances(u1["y"], u1["y_given_t"], u1["t"], u1["t_given_x"],
                          u2["y"], u2["y_given_t"], u2["t"], u2["t_given_x"])


def _finite_sum(a, b):
    with np.errstate(invalid="ignore"):
        out = a + b
    return np.where(np.isnan(out), np.inf, out)


# --------------------------------------------------------------------------
# ETW and broadcast outer bounds


ETW_NAMES = ("R1", "R2", "R1+R2 (Z, receiver 2 clean)", "R1+R2 (Z, receiver 1 clean)",
             "R1+R2 (genie)", "2R1+R2", "R1+2R2")


def etw_constraints(net: InterferenceNetwork) -> list:
    """The seven ETW half-planes ``(a1, a2, c, name)`` with engine-evaluated right-hand sides."""
    require_weak(net)
    sys = build_gaussian_system(net, EtwGenie())
    a1 = mutual_information(sys, "X1", "Y1", given="X2")
    a2 = mutual_information(sys, "X2", "Y2", given="X1")
    b1 = mutual_information(sys, "X1", "Y1")
    b2 = mutual_information(sys, "X2", "Y2")
    c1 = mutual_information(sys, "X1", ("Y1", "S1"))
    c2 = mutual_information(sys, "X2", ("Y2", "S2"))
    rhs = [a1, a2, a1 + b2, b1 + a2, c1 + c2, a1 + b1 + c2, c1 + a2 + b2]
    coef = [(1, 0), (0, 1), (1, 1), (1, 1), (1, 1), (2, 1), (1, 2)]
    return [(float(a), float(b), float(c), n) for (a, b), c, n in zip(coef, rhs, ETW_NAMES)]


def etw_outer_region(net: InterferenceNetwork, n: int = 512) -> RateRegion:
    hps = [HalfPlane(a, b, c, name) for a, b, c, name in etw_constraints(net)]
    return RateRegion(tuple(hps), (), capacity(net.P1), n=n)


def broadcast_outer_constraint(net: InterferenceNetwork, rate: float, swapped: bool = False) -> float:
    """Broadcast-channel bound: largest ``R1`` given ``R2 = rate``.

    With ``swapped=True`` the user roles are exchanged and the result is
    the largest ``R2`` given ``R1 = rate``.
    """
    require_weak(net)
    n = net.swapped() if swapped else net
    if rate < -1e-12 or rate > capacity(n.P2) + 1e-12:
        raise DomainError(f"rate {rate} outside [0, {capacity(n.P2)}]")
    return float(_broadcast_bound(n, rate))


def _broadcast_bound(net, r2):
    h2 = net.h12 ** 2
    return log2_ratio(1.0 + net.P1 + h2 * net.P2, 1.0 + h2 * (2.0 ** (2.0 * np.asarray(r2)) - 1.0))


def broadcast_curves(net: InterferenceNetwork) -> tuple:
    """Both broadcast bounds written as ``R2 <= f(R1)``."""
    require_weak(net)
    v1 = 1.0 + net.P1 + net.h12 ** 2 * net.P2
    h12s = net.h12 ** 2
    C1 = capacity(net.P1)

    def bc_user1(r1):
        r1 = np.asarray(r1, dtype=float)
        if h12s == 0:
            return np.where(r1 <= C1 + 1e-12, np.inf, -np.inf)
        return log2_ratio(h12s + v1 * 2.0 ** (-2.0 * r1) - 1.0, h12s)

    def bc_user2(r1):
        return _broadcast_bound(net.swapped(), r1)

    return (Curve(bc_user1, "broadcast (receiver 1)"), Curve(bc_user2, "broadcast (receiver 2)"))


def broadcast_outer_region(net: InterferenceNetwork, n: int = 512) -> RateRegion:
    """Both broadcast bounds together with the single-user limits."""
    hps = (HalfPlane(1.0, 0.0, capacity(net.P1), "R1"), HalfPlane(0.0, 1.0, capacity(net.P2), "R2"))
    return RateRegion(hps, broadcast_curves(net), capacity(net.P1), n=n)


# --------------------------------------------------------------------------
# EPI-tightened bounds for a fixed genie


def onebit_slacks(net, genie):
    """``(numerator, denominator)`` slacks of the sum-rate EPI bound."""
    num = 1.0 - np.asarray(genie.rho1) ** 2 - (net.h12 * np.asarray(genie.eta2)) ** 2
    den = 1.0 - np.asarray(genie.rho2) ** 2 - (net.h21 * np.asarray(genie.eta1)) ** 2
    return num, den


def twor1r2_slacks(net, genie):
    num = 1.0 - (net.h12 * np.asarray(genie.eta2)) ** 2
    den = 1.0 - np.asarray(genie.rho2) ** 2 - net.h21 ** 2
    return num, den


def _onebit_from_stats(net, gv, genie, r1):
    num, den = onebit_slacks(net, genie)
    with np.errstate(divide="ignore", invalid="ignore"):
        first = log2_ratio(gv.y2_given_t2, net.h12 ** 2 * gv.t2_given_x2)
        b = gv.t1 * gv.y1_given_t1 / gv.t1_given_x1
        second = log2_ratio(b * 2.0 ** (-2.0 * r1) - num, net.h21 ** 2 * gv.t1 + den)
    return _finite_sum(first, second)


def _twor1r2_from_stats(net, gv, genie, r1):
    num, den = twor1r2_slacks(net, genie)
    with np.errstate(divide="ignore", invalid="ignore"):
        first = log2_ratio(gv.y2_given_t2, net.h12 ** 2 * gv.t2_given_x2)
        second = log2_ratio(gv.y1 * 2.0 ** (-2.0 * r1) - num,
                            net.h21 ** 2 * 2.0 ** (2.0 * r1) + den)
    return _finite_sum(first, second)


def _check_slacks(num, den, floor, what):
    if np.any(np.asarray(num) < floor) or np.any(np.asarray(den) < floor):
        raise InfeasibleGenieError(
            f"{what}: slack variables must exceed {floor} (got {np.min(num):.3g}, {np.min(den):.3g})")


def epi_onebit_constraint(net: InterferenceNetwork, genie: GenieSpec2, R1,
                          slack_floor: float = SLACK_FLOOR):
    """EPI-tightened genie sum-rate bound: largest ``R2`` given ``R1``.

    The slacks are ``1 - rho1^2 - (h12 eta2)^2`` (subtracted in the
    numerator, from the EPI step at receiver 1) and
    ``1 - rho2^2 - (h21 eta1)^2`` (added in the denominator, from the EPI
    step at receiver 2).  Returns ``-inf`` where the log argument is
    nonpositive.
    """
    require_weak(net)
    _check_slacks(*onebit_slacks(net, genie), slack_floor, "sum-rate EPI bound")
    out = _onebit_from_stats(net, genie_variances(net, genie), genie, np.asarray(R1, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def epi_2r1r2_constraint(net: InterferenceNetwork, genie: GenieSpec2, R1,
                         slack_floor: float = SLACK_FLOOR):
    """EPI-tightened ``2R1 + R2`` bound: largest ``R2`` given ``R1``.

    Slacks are ``1 - (h12 eta2)^2`` and ``1 - rho2^2 - h21^2``; only
    ``eta2`` and ``rho2`` enter.  Swap the network and genie for the
    ``R1 + 2R2`` counterpart.
    """
    require_weak(net)
    _check_slacks(*twor1r2_slacks(net, genie), slack_floor, "2R1+R2 EPI bound")
    out = _twor1r2_from_stats(net, genie_variances(net, genie), genie, np.asarray(R1, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# Genie searches


def _eta_candidates(cfg, limits):
    """Log grid clipped below ``max(limits)`` plus every limit value."""
    grid = cfg.eta_grid()
    limits = np.asarray(limits, dtype=float).ravel()
    top = np.max(limits) if limits.size else np.inf
    return np.unique(np.concatenate([grid[grid <= top], limits[limits > 0]]))


def _eta_limit(gain, rho, floor):
    """Largest eta with ``1 - rho^2 - (gain eta)^2 >= floor`` (with a rounding margin)."""
    room = 1.0 - np.asarray(rho) ** 2 - 2.0 * floor
    with np.errstate(divide="ignore"):
        return np.where(room > 0, np.sqrt(np.clip(room, 0.0, None)) / abs(gain), 0.0)


def _sigmoid(v):
    return 0.5 * (1.0 + np.tanh(0.5 * v))


def _logit(p):
    p = np.clip(p, 1e-12, 1 - 1e-12)
    return np.log(p / (1.0 - p))


@dataclass
class _Family:
    """A finite set of genies plus the engine statistics needed to evaluate their curves."""

    genies: GenieSpec2
    stats: GenieVariances


def _stack_genies(genies):
    arr = lambda k: np.array([float(getattr(g, k)) for g in genies])
    return GenieSpec2(arr("eta1"), arr("eta2"), arr("rho1"), arr("rho2"))


def _onebit_search(net, anchors, cfg) -> list:
    """``(R1, genie)`` pairs: the best sum-rate EPI genie per anchor; empty if the family is vacuous."""
    h12, h21, floor = net.h12, net.h21, cfg.slack_floor
    if h12 == 0:
        return []
    R = cfg.rho_grid()
    # User 1: minimize B = Cov(T1) Cov(Y1|T1) / Cov(T1|X1) over eta1 for each (rho1, rho2).
    if h21 != 0:
        lim1 = _eta_limit(h21, R, floor)
        E1 = _eta_candidates(cfg, lim1)
    else:
        lim1 = np.full(R.shape, np.inf)
        E1 = cfg.eta_grid()
    u1 = user_variances(net, 1, E1[:, None], R[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        B = u1["t"] * u1["y_given_t"] / u1["t_given_x"]
    feas1 = E1[:, None] <= lim1[None, :] * (1 + 1e-12)
    Bm = np.where(feas1[:, None, :], B[:, :, None], np.inf)
    k1 = np.argmin(Bm, axis=0)
    Bmin = np.take_along_axis(Bm, k1[None], axis=0)[0]
    eta1_best = E1[k1]
    den = 1.0 - R[None, :] ** 2 - (h21 * eta1_best) ** 2
    t1_best = u1["t"][k1, np.arange(R.size)[:, None]]
    D = h21 ** 2 * t1_best + den

    # User 2: first term depends on (eta2, rho2); numerator slack couples eta2 with rho1.
    lim2 = _eta_limit(h12, R, floor)
    E2 = _eta_candidates(cfg, lim2)
    u2 = user_variances(net, 2, E2[:, None], R[None, :])
    A = log2_ratio(u2["y_given_t"], h12 ** 2 * u2["t_given_x"])
    num = 1.0 - R[None, :] ** 2 - (h12 * E2[:, None]) ** 2
    valid = (num >= floor)[:, :, None] & (den >= floor)[None, :, :] & np.isfinite(Bmin)[None]

    out = []
    for r1 in anchors:
        with np.errstate(divide="ignore", invalid="ignore"):
            val = A[:, None, :] + log2_ratio(Bmin[None] * 2.0 ** (-2.0 * r1) - num[:, :, None],
                                             D[None])
        val = np.where(valid & ~np.isnan(val), val, np.inf)
        e2, i1, i2 = np.unravel_index(int(np.argmin(val)), val.shape)
        if not np.isfinite(val[e2, i1, i2]) and val[e2, i1, i2] > 0:
            continue
        out.append((float(r1), GenieSpec2(float(eta1_best[i1, i2]), float(E2[e2]), float(R[i1]), float(R[i2]))))
    return out


def _twor1r2_search(net, anchors, cfg) -> list:
    h12, h21, floor = net.h12, net.h21, cfg.slack_floor
    if h12 == 0 or 1.0 - h21 ** 2 < 2 * floor:
        return []
    R = cfg.rho_grid()
    R = R[1.0 - R ** 2 - h21 ** 2 >= floor]
    lim = _eta_limit(h12, 0.0, floor)
    E2 = _eta_candidates(cfg, [float(lim)])
    u2 = user_variances(net, 2, E2[:, None], R[None, :])
    A = log2_ratio(u2["y_given_t"], h12 ** 2 * u2["t_given_x"])
    y1 = float(user_variances(net, 1, 1.0, 0.0)["y"])
    num = (1.0 - (h12 * E2) ** 2)[:, None]
    den = (1.0 - R ** 2 - h21 ** 2)[None, :]
    out = []
    for r1 in anchors:
        val = A + log2_ratio(y1 * 2.0 ** (-2.0 * r1) - num, h21 ** 2 * 2.0 ** (2.0 * r1) + den)
        val = np.where((num >= floor) & ~np.isnan(val), val, np.inf)
        e2, i2 = np.unravel_index(int(np.argmin(val)), val.shape)
        # eta1 and rho1 do not enter this bound; fix them at harmless values.
        out.append((float(r1), GenieSpec2(0.0, float(E2[e2]), 0.0, float(R[i2]))))
    return out


class _OnebitCodec:
    """Unconstrained coordinates for sum-rate genies: slacks hold by construction."""

    dim = 4

    def __init__(self, net, cfg):
        self.h12, self.h21, self.floor, self.rmax = net.h12, net.h21, cfg.slack_floor, cfg.rho_max

    def decode(self, th):
        rho1, rho2 = self.rmax * np.tanh(th[..., 0]), self.rmax * np.tanh(th[..., 1])
        if self.h21 != 0:
            eta1 = _eta_limit(self.h21, rho2, self.floor) * _sigmoid(th[..., 2])
        else:
            eta1 = np.exp(th[..., 2])
        eta2 = _eta_limit(self.h12, rho1, self.floor) * _sigmoid(th[..., 3])
        return GenieSpec2(eta1, eta2, rho1, rho2)

    def encode(self, g):
        u1 = np.arctanh(np.clip(g.rho1 / self.rmax, -1 + 1e-12, 1 - 1e-12))
        u2 = np.arctanh(np.clip(g.rho2 / self.rmax, -1 + 1e-12, 1 - 1e-12))
        if self.h21 != 0:
            v1 = _logit(g.eta1 / _eta_limit(self.h21, g.rho2, self.floor))
        else:
            v1 = np.log(g.eta1)
        v2 = _logit(g.eta2 / _eta_limit(self.h12, g.rho1, self.floor))
        return np.array([u1, u2, v1, v2], dtype=float)


class _TwoR1R2Codec:
    """Coordinates for ``2R1 + R2`` genies; only ``eta2`` and ``rho2`` matter."""

    dim = 2

    def __init__(self, net, cfg):
        self.rho_lim = np.sqrt(max(1.0 - net.h21 ** 2 - 2 * cfg.slack_floor, 0.0))
        self.eta_lim = float(_eta_limit(net.h12, 0.0, cfg.slack_floor))

    def decode(self, th):
        eta2 = self.eta_lim * _sigmoid(th[..., 0])
        rho2 = self.rho_lim * np.tanh(th[..., 1])
        zero = np.zeros_like(eta2)
        return GenieSpec2(zero, eta2, zero, rho2)

    def encode(self, g):
        return np.array([_logit(g.eta2 / self.eta_lim),
                         np.arctanh(np.clip(g.rho2 / max(self.rho_lim, 1e-300), -1 + 1e-12, 1 - 1e-12))])


def _pattern_refine(net, codec, evaluator, slack_fn, genies, anchors, cfg) -> list:
    """Batched compass search polishing each anchor's genie at its own ``R1``.

    Every iteration evaluates the full ``{-1, 0, 1}^d`` stencil for all anchors
    in one engine call; an anchor's step halves when its centre is best.
    """
    th = np.stack([codec.encode(g) for g in genies])
    anchors = np.asarray(anchors, dtype=float)[:, None]
    offsets = np.array(np.meshgrid(*[[-1.0, 0.0, 1.0]] * codec.dim, indexing="ij")).reshape(codec.dim, -1).T
    centre = int(np.flatnonzero(np.all(offsets == 0, axis=1))[0])
    step = np.full(len(genies), 0.5)
    for _ in range(cfg.refine_iters):
        cand = th[:, None, :] + step[:, None, None] * offsets[None]
        g = codec.decode(cand)
        num, den = slack_fn(net, g)
        with np.errstate(invalid="ignore"):
            vals = evaluator(net, genie_variances(net, g), g, anchors)
        ok = (num >= cfg.slack_floor) & (den >= cfg.slack_floor) & (g.eta2 > 0) & ~np.isnan(vals)
        vals = np.where(ok, vals, np.inf)
        k = np.argmin(vals, axis=1)
        stay = (k == centre) | (vals[np.arange(len(k)), k] >= vals[:, centre])
        k = np.where(stay, centre, k)
        th = cand[np.arange(len(k)), k]
        step = np.where(stay, 0.5 * step, step)
        if np.all(step < 1e-7):
            break
    g = codec.decode(th)
    return [GenieSpec2(float(g.eta1[i]), float(g.eta2[i]), float(g.rho1[i]), float(g.rho2[i]))
            for i in range(len(genies))]


def _near_etw_genie(net, eps=1e-6) -> Optional[GenieSpec2]:
    if net.h12 == 0 or net.h21 == 0:
        return None
    return GenieSpec2((1 - eps) / abs(net.h21), (1 - eps) / abs(net.h12), 0.0, 0.0)


def _build_family(net, genies, slack_fn, floor) -> Optional[_Family]:
    keep = []
    for g in genies:
        if g is None:
            continue
        num, den = slack_fn(net, g)
        if num >= floor and den >= floor and g.eta2 > 0:
            keep.append(g)
    if not keep:
        return None
    stacked = _stack_genies(keep)
    return _Family(stacked, genie_variances(net, stacked))


def _family_min(net, fam, evaluator, r):
    r = np.asarray(r, dtype=float)
    vals = evaluator(net, fam.stats, fam.genies, r[..., None])
    return np.min(vals, axis=-1)


def _search_family(net, cfg, kind):
    C1 = capacity(net.P1)
    anchors = np.linspace(0.0, C1, cfg.n_anchors)
    if kind == "onebit":
        found = _onebit_search(net, anchors, cfg)
        codec, ev, slack_fn = _OnebitCodec(net, cfg), _onebit_from_stats, onebit_slacks
        extra = [_near_etw_genie(net)]
        lt = low_interference_test(net)
        if lt.holds:
            extra.append(lt.witness)
    else:
        found = _twor1r2_search(net, anchors, cfg)
        codec, ev, slack_fn = _TwoR1R2Codec(net, cfg), _twor1r2_from_stats, twor1r2_slacks
        etw = _near_etw_genie(net)
        extra = [GenieSpec2(0.0, etw.eta2, 0.0, 0.0)] if etw is not None else []
    genies = [g for _, g in found]
    if cfg.refine and found:
        genies += _pattern_refine(net, codec, ev, slack_fn, genies, [a for a, _ in found], cfg)
    return _build_family(net, genies + extra, slack_fn, cfg.slack_floor)


def epi_genie_families(net: InterferenceNetwork, search: GenieSearchConfig = None) -> dict:
    """Candidate genie sets for the four EPI curve families.

    Keys are ``onebit``, ``onebit_swapped``, ``2r1r2`` and ``r12r2``; the
    ``*swapped`` and ``r12r2`` families live on the user-swapped network.
    A value of ``None`` means the family gives no constraint.
    """
    require_weak(net)
    cfg = search or GenieSearchConfig()
    sw = net.swapped()
    return {
        "onebit": _search_family(net, cfg, "onebit"),
        "onebit_swapped": _search_family(sw, cfg, "onebit"),
        "2r1r2": _search_family(net, cfg, "2r1r2"),
        "r12r2": _search_family(sw, cfg, "2r1r2"),
    }


def epi_curves(net: InterferenceNetwork, families: dict) -> tuple:
    """EPI families as curves ``R2 <= f(R1)``; swapped families are inverted numerically."""
    sw = net.swapped()
    C2 = capacity(net.P2)
    curves = []
    spec = [("onebit", net, _onebit_from_stats, False, "EPI R1+R2"),
            ("onebit_swapped", sw, _onebit_from_stats, True, "EPI R1+R2 (swapped)"),
            ("2r1r2", net, _twor1r2_from_stats, False, "EPI 2R1+R2"),
            ("r12r2", sw, _twor1r2_from_stats, True, "EPI R1+2R2")]
    for key, n, ev, inverted, name in spec:
        fam = families.get(key)
        if fam is None:
            continue
        if not inverted:
            fn = (lambda r1, n=n, fam=fam, ev=ev: _family_min(n, fam, ev, r1))
        else:
            g = (lambda r2, n=n, fam=fam, ev=ev: _family_min(n, fam, ev, r2))
            fn = (lambda r1, g=g: invert_decreasing(g, r1, 0.0, C2))
        curves.append(Curve(fn, name, data=fam.genies))
    return tuple(curves)


def epi_outer_region(net: InterferenceNetwork, search: GenieSearchConfig = None) -> RateRegion:
    """EPI-tightened outer region: genie curves, broadcast bounds and single-user limits."""
    require_weak(net)
    cfg = search or GenieSearchConfig()
    families = epi_genie_families(net, cfg)
    hps = (HalfPlane(1.0, 0.0, capacity(net.P1), "R1"), HalfPlane(0.0, 1.0, capacity(net.P2), "R2"))
    curves = broadcast_curves(net) + epi_curves(net, families)
    return RateRegion(hps, curves, capacity(net.P1), n=cfg.n_samples)


# --------------------------------------------------------------------------
# Genie-aided sum-rate bound and low-interference certificates


def is_useful(net: InterferenceNetwork, genie: GenieSpec2, tol: float = 1e-12) -> bool:
    """Usefulness: ``|h21 eta1| <= sqrt(1 - rho2^2)`` and ``|h12 eta2| <= sqrt(1 - rho1^2)``."""
    ok1 = abs(net.h21 * genie.eta1) <= np.sqrt(max(1.0 - genie.rho2 ** 2, 0.0)) + tol
    ok2 = abs(net.h12 * genie.eta2) <= np.sqrt(max(1.0 - genie.rho1 ** 2, 0.0)) + tol
    return bool(ok1 and ok2)


def is_smart(net: InterferenceNetwork, genie: GenieSpec2, tol: float = SMART_TOL) -> bool:
    """Smartness: ``eta1 rho1 = 1 + h12^2 P2`` and ``eta2 rho2 = 1 + h21^2 P1``."""
    t1, t2 = smart_targets(net)
    return bool(abs(genie.eta1 * genie.rho1 - t1) <= tol and abs(genie.eta2 * genie.rho2 - t2) <= tol)


def smart_targets(net: InterferenceNetwork):
    return 1.0 + net.h12 ** 2 * net.P2, 1.0 + net.h21 ** 2 * net.P1


def genie_markov_gaps(net: InterferenceNetwork, genie) -> tuple:
    """Engine values of ``I(X_i; S_i | Y_i)``; both vanish iff the genie is smart."""
    sys = build_gaussian_system(net, genie)
    return (mutual_information(sys, "X1", "S1", given="Y1"),
            mutual_information(sys, "X2", "S2", given="Y2"))


def genie_sum_bound(net: InterferenceNetwork, genie) -> float:
    """``I(X1; Y1, S1) + I(X2; Y2, S2)`` with Gaussian inputs, from the engine."""
    sys = build_gaussian_system(net, genie)
    return mutual_information(sys, "X1", ("Y1", "S1")) + mutual_information(sys, "X2", ("Y2", "S2"))


def useful_genie_sum_bound(net: InterferenceNetwork, search: GenieSearchConfig = None):
    """Smallest genie-aided sum bound over a grid of useful genies.

    Returns ``(value, genie)``.  Each user's term depends only on its own
    ``(eta, rho)``, while usefulness couples ``eta1`` with ``rho2`` and
    ``eta2`` with ``rho1``; the grid search exploits that split.
    """
    require_weak(net)
    cfg = search or GenieSearchConfig()
    R = cfg.rho_grid()
    terms, etas = [], []
    for user, gain in ((1, net.h21), (2, net.h12)):
        lim = _eta_limit(gain, R, 0.0) if gain != 0 else np.full(R.shape, np.inf)
        E = _eta_candidates(cfg, lim) if gain != 0 else cfg.eta_grid()
        sys = _user_system(net, user, E[:, None], R[None, :])
        f = mutual_information(sys, "X", ("Y", "T"))
        # rows: own rho; cols: the other user's rho (which caps own eta)
        feas = E[:, None] <= lim[None, :] * (1 + 1e-12)
        fm = np.where(feas[:, None, :], f[:, :, None], np.inf)
        k = np.argmin(fm, axis=0)
        terms.append(np.take_along_axis(fm, k[None], axis=0)[0])
        etas.append(E[k])
    total = terms[0] + terms[1].T
    i1, i2 = np.unravel_index(int(np.argmin(total)), total.shape)
    best = GenieSpec2(float(etas[0][i1, i2]), float(etas[1][i2, i1]), float(R[i1]), float(R[i2]))
    value = genie_sum_bound(net, best)
    lt = low_interference_test(net)
    if lt.holds:
        w = genie_sum_bound(net, lt.witness)
        if w < value:
            return w, lt.witness
    return value, best


def asymmetric_condition_value(net: InterferenceNetwork) -> float:
    """``|h12 (1 + h21^2 P1)| + |h21 (1 + h12^2 P2)|``."""
    require_two_user(net)
    a = abs(net.h12 * (1.0 + net.h21 ** 2 * net.P1))
    b = abs(net.h21 * (1.0 + net.h12 ** 2 * net.P2))
    return float(a + b)


def low_interference_test(net: InterferenceNetwork) -> LowInterferenceResult:
    """Closed-form low-interference condition with a useful and smart genie as witness."""
    require_two_user(net)
    a = abs(net.h12 * (1.0 + net.h21 ** 2 * net.P1))
    b = abs(net.h21 * (1.0 + net.h12 ** 2 * net.P2))
    value = float(a + b)
    if value > 1.0:
        return LowInterferenceResult(False, value, None)
    cos2 = 0.5 * (1.0 + a - b)
    rho2 = float(np.sqrt(cos2))
    rho1 = float(np.sqrt(1.0 - cos2))
    t1, t2 = smart_targets(net)
    witness = GenieSpec2(t1 / rho1, t2 / rho2, rho1, rho2)
    return LowInterferenceResult(True, value, witness)


def symmetric_condition_value(P: float, h: float) -> float:
    return float(abs(h + h ** 3 * P))


def symmetric_low_interference_test(P: float, h: float) -> bool:
    """``|h + h^3 P| <= 0.5``."""
    return symmetric_condition_value(P, h) <= SYMMETRIC_LIMIT


def smart_genie_check(P: float, h: float, genie: GenieSpec2, tol: float = SMART_TOL) -> bool:
    """Smartness identity ``eta rho = 1 + h^2 P`` for a symmetric genie (both users)."""
    target = 1.0 + h ** 2 * P
    return bool(abs(genie.eta1 * genie.rho1 - target) <= tol
                and abs(genie.eta2 * genie.rho2 - target) <= tol)


@dataclass(frozen=True)
class SymmetricGenieSearch:
    found: bool
    genie: Optional[GenieSpec2]
    margin: float


def symmetric_genie_search(P: float, h: float, rho_step: float = 1e-3) -> SymmetricGenieSearch:
    """Search ``rho`` for a symmetric genie that is both useful and smart.

    ``eta`` is pinned by smartness to ``(1 + h^2 P) / rho``; the margin is
    ``sqrt(1 - rho^2) - |h eta|`` and a useful genie exists iff its maximum
    is nonnegative.  The grid optimum is polished by a bounded scalar search.
    """
    target = 1.0 + h ** 2 * P
    rho = np.arange(rho_step, 1.0, rho_step)

    def margin(r):
        return np.sqrt(1.0 - r ** 2) - abs(h) * target / r

    m = margin(rho)
    k = int(np.argmax(m))
    lo, hi = rho[max(k - 1, 0)], rho[min(k + 1, rho.size - 1)]
    res = minimize_scalar(lambda r: -margin(r), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    r_best, m_best = (float(res.x), float(-res.fun)) if -res.fun > m[k] else (float(rho[k]), float(m[k]))
    found = m_best >= -1e-12
    genie = GenieSpec2(target / r_best, target / r_best, r_best, r_best) if found else None
    return SymmetricGenieSearch(bool(found), genie, m_best)


def sum_capacity(net: InterferenceNetwork, search: GenieSearchConfig = None,
                 use_epi: bool = True) -> SumCapacityResult:
    """Sum capacity when the low-interference test passes, else inner and outer bounds.

    The outer bound outside the regime is the smallest of the ETW region's
    maximum sum, the best useful-genie sum bound and (with ``use_epi``) the
    EPI region's maximum sum.
    """
    require_two_user(net)
    tin = tin_sum_rate(net)
    lt = low_interference_test(net)
    if lt.holds:
        cert = BoundCertificate(tin, "exact", lt.witness)
        return SumCapacityResult(True, cert, cert)
    inner = BoundCertificate(tin, "inner", "treating interference as noise")
    require_weak(net)
    cands = [(etw_outer_region(net).max_sum(), "ETW region")]
    val, genie = useful_genie_sum_bound(net, search)
    cands.append((val, genie))
    if use_epi:
        cands.append((epi_outer_region(net, search).max_sum(), "EPI region"))
    value, witness = min(cands, key=lambda c: c[0])
    return SumCapacityResult(False, inner, BoundCertificate(float(value), "outer", witness))


# --------------------------------------------------------------------------
# Thresholds


def inr_threshold(snr: float, tol: float = 1e-9) -> ThresholdResult:
    """Largest ``h >= 0`` with ``h + h^3 snr <= 0.5`` (bisection), and ``INR = h^2 snr``."""
    if not snr > 0:
        raise DomainError("snr must be positive")
    h = _scipy_bisect(lambda x: x + x ** 3 * snr - SYMMETRIC_LIMIT, 0.0, SYMMETRIC_LIMIT,
                      xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)
    return ThresholdResult(float(snr), float(h), float(h * h * snr))


# --------------------------------------------------------------------------
# Han-Kobayashi baseline


HK_NAMES = ("R1", "R2", "R1+R2 (a)", "R1+R2 (b)", "R1+R2 (c)", "2R1+R2", "R1+2R2")
_HK_COEF = np.array([(1, 0), (0, 1), (1, 1), (1, 1), (1, 1), (2, 1), (1, 2)], dtype=float)


def hk_constraints(net: InterferenceNetwork, lam1, lam2) -> np.ndarray:
    """Right-hand sides of the seven Han-Kobayashi constraints, shape ``(..., 7)``.

    Transmitter ``i`` splits ``X_i = U_i + V_i`` into a common part with
    power ``lam_i P_i`` (decoded at both receivers) and a private part.
    Inputs are Gaussian and there is no time sharing.
    """
    require_two_user(net)
    lam1, lam2 = np.broadcast_arrays(np.asarray(lam1, dtype=float), np.asarray(lam2, dtype=float))
    cov = np.zeros(lam1.shape + (6, 6))
    cov[..., 0, 0] = lam1 * net.P1
    cov[..., 1, 1] = (1 - lam1) * net.P1
    cov[..., 2, 2] = lam2 * net.P2
    cov[..., 3, 3] = (1 - lam2) * net.P2
    cov[..., 4, 4] = cov[..., 5, 5] = 1.0
    sys = GaussianSystem.from_linear(
        ["U1", "V1", "U2", "V2", "Z1", "Z2"], cov,
        {"X1": {"U1": 1.0, "V1": 1.0}, "X2": {"U2": 1.0, "V2": 1.0},
         "Y1": {"U1": 1.0, "V1": 1.0, "U2": net.h12, "V2": net.h12, "Z1": 1.0},
         "Y2": {"U1": net.h21, "V1": net.h21, "U2": 1.0, "V2": 1.0, "Z2": 1.0}})
    mi = lambda a, b, g=(): mutual_information(sys, a, b, given=g)
    a1, a2 = mi("X1", "Y1", ("U2",)), mi("X2", "Y2", ("U1",))
    b1, b2 = mi(("X1", "U2"), "Y1"), mi(("X2", "U1"), "Y2")
    c1, c2 = mi("X1", "Y1", ("U1", "U2")), mi("X2", "Y2", ("U1", "U2"))
    d1, d2 = mi(("X1", "U2"), "Y1", ("U1",)), mi(("X2", "U1"), "Y2", ("U2",))
    return np.stack([a1, a2, b1 + c2, b2 + c1, d1 + d2, b1 + c1 + d2, b2 + c2 + d1], axis=-1)


def hk_vertices(rhs: np.ndarray) -> np.ndarray:
    """Vertices of each polytope ``{R >= 0, coef . R <= rhs}``; returns an ``(N, 2)`` array."""
    rhs = np.asarray(rhs, dtype=float).reshape(-1, 7)
    coef = np.vstack([_HK_COEF, [[-1.0, 0.0], [0.0, -1.0]]])
    c = np.concatenate([rhs, np.zeros((rhs.shape[0], 2))], axis=1)
    pts = []
    for i in range(coef.shape[0]):
        for j in range(i + 1, coef.shape[0]):
            det = coef[i, 0] * coef[j, 1] - coef[j, 0] * coef[i, 1]
            if det == 0:
                continue
            x = (c[:, i] * coef[j, 1] - c[:, j] * coef[i, 1]) / det
            y = (coef[i, 0] * c[:, j] - coef[j, 0] * c[:, i]) / det
            p = np.stack([x, y], axis=1)
            ok = np.all(p @ coef.T <= c + 1e-12 * (1 + np.abs(c)), axis=1)
            pts.append(p[ok])
    return np.vstack(pts)


def hk_gaussian_inner_region(net: InterferenceNetwork, n_splits: int = 64, n: int = 512) -> RateRegion:
    """Union over power splits of Gaussian Han-Kobayashi polytopes, convexified."""
    require_weak(net)
    lam = np.linspace(0.0, 1.0, n_splits)
    l1, l2 = np.meshgrid(lam, lam, indexing="ij")
    verts = hk_vertices(hk_constraints(net, l1, l2))
    hull = decreasing_hull(verts)
    return RateRegion((), (polyline_curve(hull, "HK (Gaussian, no time sharing)"),),
                      float(hull[-1, 0]), n=n)
