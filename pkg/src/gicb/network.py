"""
M-user interference networks: sum-capacity certificates for the many-to-one
and one-to-many topologies, the vector genie and its sum-rate outer bound,
and the correlated-genie feasibility search for the symmetric three-user
channel.

Networks are in standard form (see ``channel_model``); ``H[r, t]`` is the
gain from transmitter ``t`` to receiver ``r``.  Rates are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import bisect as _scipy_bisect

from ._numeric import db
from .channel_model import (InterferenceNetwork, build_gaussian_system, genie_labels,
                            is_many_to_one, is_one_to_many)
from .errors import DomainError, InvalidOrderingError
from .gaussian_core import GaussianSystem, mutual_information
from .genies import GenieSpec3Sym, OrderingFunction, VectorGenie
from .two_user import BoundCertificate, SumCapacityResult, capacity

PSD_TOL = 1e-10
REGIME_LIMIT = 1.0


# --------------------------------------------------------------------------
# Treating interference as noise


def m_user_tin_sum_rate(net: InterferenceNetwork) -> float:
    """``sum_r 0.5 log2(1 + P_r / (1 + sum_{t != r} h_rt^2 P_t))``."""
    G = net.H ** 2 * net.P[None, :]
    interference = G.sum(axis=1) - np.diag(G)
    return float(np.sum(capacity(net.P / (1.0 + interference))))


def single_user_sum(net: InterferenceNetwork) -> float:
    """Sum of interference-free capacities, a trivial outer bound."""
    return float(np.sum(capacity(net.P)))


# --------------------------------------------------------------------------
# Many-to-one: only receiver 1 sees interference


def _require(net, predicate, what):
    if not predicate(net):
        raise DomainError(f"operation needs a {what} network")


def many_to_one_condition_value(net: InterferenceNetwork) -> float:
    """``sum_{i >= 2} h_1i^2``."""
    _require(net, is_many_to_one, "many-to-one")
    return float(np.sum(net.H[0, 1:] ** 2))


def many_to_one_test(net: InterferenceNetwork) -> bool:
    """``sum_{i >= 2} h_1i^2 <= 1``."""
    return many_to_one_condition_value(net) <= REGIME_LIMIT


def many_to_one_genie_bound(net: InterferenceNetwork, corr) -> np.ndarray:
    """Genie-aided sum bound with the interferers' receivers pooled.

    The pooled receivers get ``S = h^T X_I + W`` where
    ``W = corr * u^T Z_I + sqrt(1 - corr^2) V`` and ``u = h / |h|``.
    The bound ``I(X1; Y1) + I(X_I; Y_I, S)`` holds for every ``corr`` in
    ``[-1, 1]``; ``corr = |h|`` makes the genie smart when ``|h| <= 1``.
    """
    _require(net, is_many_to_one, "many-to-one")
    M = net.M
    corr = np.asarray(corr, dtype=float)
    h = net.H[0, 1:]
    norm = float(np.linalg.norm(h))
    u = h / norm if norm > 0 else np.zeros_like(h)
    X = [f"X{i}" for i in range(1, M + 1)]
    Z = [f"Z{i}" for i in range(1, M + 1)]
    sources = X + Z + ["V"]
    cov = np.diag(np.concatenate([net.P, np.ones(M + 1)]))
    combos = {f"Y{r + 1}": {**{X[t]: net.H[r, t] for t in range(M)}, Z[r]: 1.0} for r in range(M)}
    s_terms = {X[i]: h[i - 1] for i in range(1, M)}
    s_terms.update({Z[i]: corr * u[i - 1] for i in range(1, M)})
    s_terms["V"] = np.sqrt(np.clip(1.0 - corr ** 2, 0.0, None))
    combos["S"] = s_terms
    sys = GaussianSystem.from_linear(sources, cov, combos)
    first = mutual_information(sys, "X1", "Y1")
    rest = mutual_information(sys, X[1:], [f"Y{i}" for i in range(2, M + 1)] + ["S"])
    return first + rest


def many_to_one_sum_capacity(net: InterferenceNetwork) -> SumCapacityResult:
    """Sum capacity in regime; otherwise TIN inner and the best pooled-genie outer bound."""
    value = many_to_one_condition_value(net)
    P1, Pi, h = net.P[0], net.P[1:], net.H[0, 1:]
    if value <= REGIME_LIMIT:
        csum = float(capacity(P1 / (1.0 + np.sum(h ** 2 * Pi))) + np.sum(capacity(Pi)))
        cert = BoundCertificate(csum, "exact", {"condition": value})
        return SumCapacityResult(True, cert, cert)
    inner = BoundCertificate(m_user_tin_sum_rate(net), "inner", "treating interference as noise")
    corr = np.linspace(-1.0, 1.0, 401)
    bounds = many_to_one_genie_bound(net, corr)
    k = int(np.argmin(bounds))
    cands = [(single_user_sum(net), "single-user capacities"),
             (float(bounds[k]), {"pooled genie correlation": float(corr[k])})]
    best = min(cands, key=lambda c: c[0])
    return SumCapacityResult(False, inner, BoundCertificate(best[0], "outer", best[1]))


# --------------------------------------------------------------------------
# One-to-many: only transmitter 1 causes interference


@dataclass(frozen=True)
class OneToManyTest:
    """Condition value and, when it holds, weights ``lam`` for users ``2..M``."""

    holds: bool
    value: float
    lam: Optional[Tuple[float, ...]] = None

    def __bool__(self):
        return self.holds


def _one_to_many_terms(net):
    g = net.H[1:, 0] ** 2
    P1 = net.P[0]
    return (g * P1 + g) / (g * P1 + 1.0)


def one_to_many_test(net: InterferenceNetwork) -> OneToManyTest:
    """``sum_{i >= 2} (h_i1^2 P1 + h_i1^2) / (h_i1^2 P1 + 1) <= 1`` with a weight witness.

    The weights satisfy ``lam_i >= term_i`` and sum to one; the leftover
    mass is spread evenly.
    """
    _require(net, is_one_to_many, "one-to-many")
    terms = _one_to_many_terms(net)
    value = float(np.sum(terms))
    if value > REGIME_LIMIT:
        return OneToManyTest(False, value, None)
    lam = terms + (1.0 - value) / terms.size
    return OneToManyTest(True, value, tuple(float(x) for x in lam))


def one_to_many_sum_capacity(net: InterferenceNetwork) -> SumCapacityResult:
    """Sum capacity in regime; otherwise TIN inner and single-user outer bounds."""
    test = one_to_many_test(net)
    if test.holds:
        g = net.H[1:, 0] ** 2
        csum = float(capacity(net.P[0]) + np.sum(capacity(net.P[1:] / (g * net.P[0] + 1.0))))
        cert = BoundCertificate(csum, "exact", {"lambda": test.lam})
        return SumCapacityResult(True, cert, cert)
    inner = BoundCertificate(m_user_tin_sum_rate(net), "inner", "treating interference as noise")
    outer = BoundCertificate(single_user_sum(net), "outer", "single-user capacities")
    return SumCapacityResult(False, inner, outer)


# --------------------------------------------------------------------------
# Vector genie


def _ordering(net, pi) -> OrderingFunction:
    if pi is None:
        return OrderingFunction.cyclic(net.M)
    if not isinstance(pi, OrderingFunction):
        pi = OrderingFunction(tuple(pi))
    if pi.M != net.M:
        raise InvalidOrderingError(f"range: ordering is for M={pi.M}, network has M={net.M}")
    return pi


def build_vector_genie(net: InterferenceNetwork, pi=None) -> VectorGenie:
    """Vector genie for ``net``; ``pi`` defaults to ``1 -> 2 -> ... -> M -> 1``."""
    return VectorGenie.from_ordering(_ordering(net, pi))


def check_interference_free(genie: VectorGenie, H) -> bool:
    """``S_{r,M-1}`` carries no input other than ``X_r`` (exact coefficient check)."""
    A = genie.coefficients(H)
    last = A[:, -1, :].copy()
    np.fill_diagonal(last, 0.0)
    return bool(np.all(last == 0.0))


def check_stacking_identity(genie: VectorGenie, H) -> bool:
    """``S_r`` equals ``[Y, S_1, ..., S_{M-2}]`` of receiver ``pi(r)`` with ``X_{pi(r)}`` removed.

    Compared on coefficient vectors and noise indices, so the check is exact.
    """
    H = np.asarray(H, dtype=float)
    A = genie.coefficients(H)
    N = genie.noise_indices()
    M = genie.M
    for r in range(1, M + 1):
        p = genie.pi(r)
        stacked_coef = np.vstack([H[p - 1][None, :], A[p - 1, :M - 2, :]])
        stacked_noise = np.concatenate([[p], N[p - 1, :M - 2]])
        stacked_coef[:, p - 1] = 0.0
        if not (np.array_equal(A[r - 1], stacked_coef) and np.array_equal(N[r - 1], stacked_noise)):
            return False
    return True


def genie_aided_sum_bound(net: InterferenceNetwork, genie) -> float:
    """``sum_r I(X_r; Y_r, S_r)`` with Gaussian inputs, evaluated by the engine."""
    sys = build_gaussian_system(net, genie)
    total = 0.0
    for r in range(1, net.M + 1):
        total = total + mutual_information(sys, f"X{r}", [f"Y{r}"] + genie_labels(net, genie, r))
    return total


def vector_genie_sum_bound(net: InterferenceNetwork, pi=None) -> float:
    """Sum-capacity outer bound of the vector genie built from ``pi``."""
    return float(genie_aided_sum_bound(net, build_vector_genie(net, pi)))


# --------------------------------------------------------------------------
# Symmetric three-user channel with a correlated vector genie


def three_user_smart_conditions(P: float, h: float) -> Tuple[float, float]:
    """Targets ``(eta1 rho1, eta2 rho2)`` that make the genie smart."""
    return 1.0 + 2.0 * h * h * P - h * P, 1.0 + 2.0 * h * h * P


def _useful_matrix(h, eta1, eta2, rho1, rho2, rho12):
    """Entries of ``Cov([Z, a W1] | W2) - Cov([a W1, b W2])`` with ``a = h eta1``, ``b = h eta2``."""
    a = h * np.asarray(eta1, dtype=float)
    b = h * np.asarray(eta2, dtype=float)
    d11 = 1.0 - rho2 ** 2 - a ** 2
    d12 = a * (rho1 - rho2 * rho12) - a * b * rho12
    d22 = a ** 2 * (1.0 - rho12 ** 2) - b ** 2
    return d11, d12, d22


def _min_eig2(d11, d12, d22):
    half = 0.5 * (d11 - d22)
    return 0.5 * (d11 + d22) - np.sqrt(half * half + d12 * d12)


def three_user_useful_matrices(h: float, genie: GenieSpec3Sym):
    """The two 2x2 covariances whose difference must be PSD for usefulness.

    Returns ``(Cov([Z1, h eta1 W11] | W12), Cov([h eta1 W11, h eta2 W12]))``,
    the first by a Schur complement on ``Sigma``.
    """
    a, b = h * genie.eta1, h * genie.eta2
    S = genie.Sigma
    joint = np.array([[S[0, 0], a * S[0, 1]], [a * S[0, 1], a * a * S[1, 1]]])
    cross = np.array([S[0, 2], a * S[1, 2]])
    cond = joint - np.outer(cross, cross) / S[2, 2]
    gen = np.array([[a * a, a * b * S[1, 2]], [a * b * S[1, 2], b * b]])
    return cond, gen


def three_user_useful_test(P: float, h: float, genie: GenieSpec3Sym, tol: float = PSD_TOL) -> bool:
    """Usefulness: the matrix difference above has eigenvalues ``>= -tol``.

    ``P`` does not enter the condition; it is accepted for a uniform
    signature with the smartness targets.
    """
    cond, gen = three_user_useful_matrices(h, genie)
    return bool(np.linalg.eigvalsh(cond - gen).min() >= -tol)


@dataclass(frozen=True)
class ThreeUserSearchConfig:
    """Correlation grid for the three-user feasibility search."""

    step: float = 0.01
    rho_max: float = 0.999
    refine_step: float = 0.0005
    refine_span: float = 0.01
    tol: float = PSD_TOL
    chunk: int = 16

    def grid(self) -> np.ndarray:
        g = np.arange(-self.rho_max, self.rho_max, self.step)
        return np.unique(np.round(np.append(g, self.rho_max), 12))


@dataclass(frozen=True)
class FeasibilityResult:
    """Outcome of the three-user search; truthiness is ``feasible``."""

    feasible: bool
    witness: Optional[GenieSpec3Sym]
    score: float
    refined: bool = False

    def __bool__(self):
        return self.feasible


def _signed_axis(values, target):
    """Correlations compatible with ``eta = target / rho >= 0``; all of them when ``target == 0``."""
    if target == 0.0:
        return values
    keep = (values != 0.0) & (np.sign(values) == np.sign(target))
    return values[keep]


def _scores(h, t1, t2, r1, r2, r12):
    """``min(det Sigma, lambda_min(D))`` on a broadcast grid; feasible where ``>= -tol``."""
    eta1 = np.zeros_like(r1) if t1 == 0.0 else t1 / r1
    eta2 = t2 / r2
    d11, d12, d22 = _useful_matrix(h, eta1, eta2, r1, r2, r12)
    det = 1.0 - r1 ** 2 - r2 ** 2 - r12 ** 2 + 2.0 * r1 * r2 * r12
    return np.minimum(det, _min_eig2(d11, d12, d22)), det


def _scan(h, t1, t2, ax1, ax2, ax12, cfg):
    """First feasible point in lexicographic order and the best-scoring point."""
    best = (-np.inf, None)
    r2, r12 = np.meshgrid(ax2, ax12, indexing="ij")
    for start in range(0, ax1.size, cfg.chunk):
        r1 = ax1[start:start + cfg.chunk, None, None]
        score, det = _scores(h, t1, t2, r1, r2[None], r12[None])
        # det must be nonnegative outright so the witness passes the PSD check
        ok = (score >= -cfg.tol) & (det >= 0.0)
        if ok.any():
            i, j, k = np.unravel_index(int(np.argmax(ok)), ok.shape)
            return (ax1[start + i], ax2[j], ax12[k]), float(score[i, j, k])
        k = int(np.argmax(score))
        if score.flat[k] > best[0]:
            i, j, l = np.unravel_index(k, score.shape)
            best = (float(score.flat[k]), (ax1[start + i], ax2[j], ax12[l]))
    return None, best


def three_user_feasible(P: float, h: float, search: ThreeUserSearchConfig = None) -> FeasibilityResult:
    """Search ``(rho1, rho2, rho12)`` for a useful and smart symmetric three-user genie.

    ``eta1, eta2`` are pinned by the smartness targets.  The coarse grid is
    scanned in lexicographic order and the first feasible point is the
    witness; if none exists one finer pass runs around the best point.
    """
    cfg = search or ThreeUserSearchConfig()
    t1, t2 = (float(t) for t in three_user_smart_conditions(P, h))
    g = cfg.grid()
    ax1, ax2 = _signed_axis(g, t1), _signed_axis(g, t2)
    point, info = _scan(h, t1, t2, ax1, ax2, g, cfg)
    refined = False
    if point is None:
        best_score, centre = info
        if centre is None:
            return FeasibilityResult(False, None, -np.inf)
        refined = True
        offs = np.arange(-cfg.refine_span, cfg.refine_span + 0.5 * cfg.refine_step, cfg.refine_step)

        def local(c, target):
            v = np.round(c + offs, 12)
            v = v[np.abs(v) <= cfg.rho_max]
            return v if target is None else _signed_axis(v, target)

        point, info = _scan(h, t1, t2, local(centre[0], t1), local(centre[1], t2),
                            local(centre[2], None), cfg)
        if point is None:
            return FeasibilityResult(False, None, max(best_score, info[0]), refined)
    r1, r2, r12 = (float(v) for v in point)
    eta1 = 0.0 if t1 == 0.0 else t1 / r1
    witness = GenieSpec3Sym(r1, r2, r12, eta1, t2 / r2)
    return FeasibilityResult(True, witness, info, refined)


def three_user_necessary_h(P: float) -> float:
    """Root of ``h (1 + 2 h^2 P) = 1/2``; no feasible genie exists above it.

    Usefulness needs ``(h eta2)^2 <= (h eta1)^2 <= 1 - rho2^2``, and with
    ``eta2 rho2 = 1 + 2 h^2 P`` this forces ``h (1 + 2 h^2 P) <= 1/2``.
    """
    return float(_scipy_bisect(lambda x: x * (1.0 + 2.0 * x * x * P) - 0.5, 0.0, 0.5,
                               xtol=1e-15, maxiter=500))


@dataclass(frozen=True)
class ThreeUserThreshold:
    """Largest feasible ``h`` found and ``INR_total = 2 h^2 P`` at that gain."""

    snr: float
    h: float
    inr_total: float
    witness: Optional[GenieSpec3Sym]
    witnesses: Tuple[Tuple[float, GenieSpec3Sym], ...] = field(default=(), compare=False)

    @property
    def inr_total_db(self) -> float:
        return float(db(self.inr_total))

    @property
    def snr_db(self) -> float:
        return float(db(self.snr))


def three_user_inr_threshold(snr: float, search: ThreeUserSearchConfig = None,
                             tol: float = 1e-4, n_scan: int = 16) -> ThreeUserThreshold:
    """Feasibility threshold on ``h`` by bisection, reported as ``INR_total``.

    The bracket is ``[0, h_nec]`` (see ``three_user_necessary_h``).  A scan
    of ``n_scan`` gains finds the first infeasible one before bisecting, so
    an isolated infeasible pocket cannot be jumped over.  Every feasible
    witness met on the way is returned in ``witnesses``.
    """
    if not snr > 0:
        raise DomainError("snr must be positive")
    cfg = search or ThreeUserSearchConfig()
    found = []

    def feasible(h):
        res = three_user_feasible(snr, h, cfg)
        if res.feasible:
            found.append((float(h), res.witness))
        return res

    h_nec = three_user_necessary_h(snr)
    lo, lo_res = 0.0, feasible(0.0)
    hi = None
    for h in np.linspace(0.0, h_nec, n_scan + 1)[1:]:
        res = feasible(h)
        if not res.feasible:
            hi = h
            break
        lo, lo_res = h, res
    if hi is not None:
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            res = feasible(mid)
            if res.feasible:
                lo, lo_res = mid, res
            else:
                hi = mid
    return ThreeUserThreshold(float(snr), float(lo), float(2.0 * lo * lo * snr), lo_res.witness,
                              tuple(found))


def three_user_genie_sum_bound(P: float, h: float, genie: GenieSpec3Sym) -> float:
    """Engine value of ``sum_r I(X_r; Y_r, S_r1, S_r2)`` for the correlated genie."""
    return float(genie_aided_sum_bound(InterferenceNetwork.symmetric(3, P, h), genie))
