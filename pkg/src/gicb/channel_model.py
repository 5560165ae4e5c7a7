"""
Gaussian interference networks in standard form.

Receiver ``r`` observes ``Y_r = sum_t H[r, t] X_t + Z_r`` with unit-variance
noise, unit direct gains and input powers ``P``.  ``H[r, t]`` (written
``h_rt``) is the gain from transmitter ``t`` to receiver ``r``; users are
1-based in labels (``X1``, ``Y1``, ...) and 0-based in arrays.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, InvalidChannelError, InvalidGenieError
from .gaussian_core import GaussianSystem
from .genies import EtwGenie, GenieSpec2, GenieSpec3Sym, VectorGenie

DIAG_TOL = 1e-12


class ChannelClass(str, enum.Enum):
    TWO_USER = "two-user"
    SYMMETRIC_TWO_USER = "symmetric-two-user"
    MANY_TO_ONE = "many-to-one"
    ONE_TO_MANY = "one-to-many"
    SYMMETRIC_M_USER = "symmetric-M-user"
    GENERAL = "general"


@dataclass(frozen=True, eq=False)
class InterferenceNetwork:
    """Standard-form network: unit direct gains, unit noise, powers ``P``."""

    H: np.ndarray
    P: np.ndarray

    def __post_init__(self):
        H = np.array(self.H, dtype=float)
        P = np.array(self.P, dtype=float).reshape(-1)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise InvalidChannelError(f"H must be square, got shape {H.shape}")
        if H.shape[0] < 2:
            raise InvalidChannelError("a network needs at least two users")
        if P.shape != (H.shape[0],):
            raise InvalidChannelError(f"P must have length {H.shape[0]}, got {P.shape}")
        if not (np.all(np.isfinite(H)) and np.all(np.isfinite(P))):
            raise InvalidChannelError("H and P must be finite")
        if np.any(np.abs(np.diag(H) - 1.0) > DIAG_TOL):
            raise InvalidChannelError("standard form requires unit direct gains; use standardize()")
        if np.any(P <= 0):
            raise InvalidChannelError("powers must be positive")
        np.fill_diagonal(H, 1.0)
        H.setflags(write=False)
        P.setflags(write=False)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "P", P)

    @classmethod
    def two_user(cls, P1: float, P2: float, h12: float, h21: float) -> "InterferenceNetwork":
        return cls([[1.0, h12], [h21, 1.0]], [P1, P2])

    @classmethod
    def symmetric(cls, M: int, P: float, h: float) -> "InterferenceNetwork":
        H = np.full((M, M), float(h))
        np.fill_diagonal(H, 1.0)
        return cls(H, np.full(M, float(P)))

    @property
    def M(self) -> int:
        return self.H.shape[0]

    @property
    def h12(self) -> float:
        return float(self.H[0, 1])

    @property
    def h21(self) -> float:
        return float(self.H[1, 0])

    @property
    def P1(self) -> float:
        return float(self.P[0])

    @property
    def P2(self) -> float:
        return float(self.P[1])

    def swapped(self) -> "InterferenceNetwork":
        """The two-user network with users 1 and 2 relabelled."""
        require_two_user(self)
        return InterferenceNetwork([[1.0, self.h21], [self.h12, 1.0]], self.P[::-1])

    def snr(self) -> np.ndarray:
        return self.P.copy()

    def inr(self) -> np.ndarray:
        """``INR[r, t] = h_rt^2 P_t`` (zero on the diagonal)."""
        out = self.H ** 2 * self.P[None, :]
        np.fill_diagonal(out, 0.0)
        return out

    def to_dict(self) -> dict:
        return {"M": self.M, "H": self.H.tolist(), "P": self.P.tolist()}

    def __eq__(self, other):
        if not isinstance(other, InterferenceNetwork):
            return NotImplemented
        return np.array_equal(self.H, other.H) and np.array_equal(self.P, other.P)

    def __hash__(self):
        return hash((self.H.tobytes(), self.P.tobytes()))

    def __repr__(self):
        return f"InterferenceNetwork(H={self.H.tolist()}, P={self.P.tolist()})"


def standardize(H_raw, P_raw, noise_vars=None) -> InterferenceNetwork:
    """Rescale a general Gaussian network to unit direct gains and unit noise.

    The substitution ``P'_t = h_tt^2 P_t / N_t`` and
    ``h'_rt = h_rt sqrt(N_t) / (h_tt sqrt(N_r))`` keeps every SNR
    ``h_rr^2 P_r / N_r`` and every INR ``h_rt^2 P_t / N_r`` unchanged.
    """
    H = np.asarray(H_raw, dtype=float)
    P = np.asarray(P_raw, dtype=float).reshape(-1)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or P.shape != (H.shape[0],):
        raise InvalidChannelError("H must be MxM and P of length M")
    N = np.ones_like(P) if noise_vars is None else np.asarray(noise_vars, dtype=float).reshape(-1)
    if N.shape != P.shape:
        raise InvalidChannelError("noise_vars must have length M")
    if np.any(N <= 0):
        raise InvalidChannelError("noise variances must be positive")
    d = np.diag(H)
    if np.any(d == 0):
        raise InvalidChannelError("direct gains must be nonzero")
    if np.any(P <= 0):
        raise InvalidChannelError("powers must be positive")
    P_std = d ** 2 * P / N
    H_std = H * np.sqrt(N)[None, :] / (d[None, :] * np.sqrt(N)[:, None])
    np.fill_diagonal(H_std, 1.0)
    return InterferenceNetwork(H_std, P_std)


def _offdiag(net):
    return net.H[~np.eye(net.M, dtype=bool)]


def is_many_to_one(net: InterferenceNetwork) -> bool:
    """Only receiver 1 sees interference."""
    off = net.H.copy()
    np.fill_diagonal(off, 0.0)
    return bool(np.all(off[1:, :] == 0))


def is_one_to_many(net: InterferenceNetwork) -> bool:
    """Only transmitter 1 causes interference."""
    off = net.H.copy()
    np.fill_diagonal(off, 0.0)
    return bool(np.all(off[:, 1:] == 0))


def is_symmetric(net: InterferenceNetwork) -> bool:
    a = np.abs(_offdiag(net))
    return bool(np.all(a == a[0]) and np.all(net.P == net.P[0]))


def classify(net: InterferenceNetwork) -> ChannelClass:
    """Most specific class of ``net``; symmetric classes take precedence."""
    if net.M == 2:
        return ChannelClass.SYMMETRIC_TWO_USER if is_symmetric(net) else ChannelClass.TWO_USER
    if is_symmetric(net):
        return ChannelClass.SYMMETRIC_M_USER
    if is_many_to_one(net):
        return ChannelClass.MANY_TO_ONE
    if is_one_to_many(net):
        return ChannelClass.ONE_TO_MANY
    return ChannelClass.GENERAL


def require_two_user(net: InterferenceNetwork):
    if net.M != 2:
        raise DomainError(f"operation needs a two-user network, got M={net.M}")


def require_weak(net: InterferenceNetwork):
    """Outer bounds below assume ``h12^2 <= 1`` and ``h21^2 <= 1``."""
    require_two_user(net)
    if net.h12 ** 2 > 1.0 or net.h21 ** 2 > 1.0:
        raise DomainError(
            f"weak interference required (h12^2={net.h12 ** 2:.6g}, h21^2={net.h21 ** 2:.6g})")


def _labels(prefix, M):
    return [f"{prefix}{i}" for i in range(1, M + 1)]


def build_gaussian_system(net: InterferenceNetwork, genie=None) -> GaussianSystem:
    """Joint Gaussian system of inputs, noises, outputs and genie signals.

    Labels are ``X1..XM``, ``Z1..ZM``, ``Y1..YM``.  Genie signals add ``S1``,
    ``S2`` and ``W1``, ``W2`` (two-user genies), ``S{r}_{k}`` and
    ``W{r}{k}`` (three-user symmetric genie) or ``S{r}_{k}`` (vector genie).
    Genie parameters given as arrays produce a batched system.
    """
    M = net.M
    X, Z, Y = _labels("X", M), _labels("Z", M), _labels("Y", M)
    combos = {Y[r]: {**{X[t]: net.H[r, t] for t in range(M)}, Z[r]: 1.0} for r in range(M)}
    sources = X + Z
    base = np.diag(np.concatenate([net.P, np.ones(M)]))

    if genie is None:
        return GaussianSystem.from_linear(sources, base, combos)

    if isinstance(genie, EtwGenie):
        require_two_user(net)
        combos["S1"] = {"X1": net.h21, "Z2": 1.0}
        combos["S2"] = {"X2": net.h12, "Z1": 1.0}
        return GaussianSystem.from_linear(sources, base, combos)

    if isinstance(genie, GenieSpec2):
        require_two_user(net)
        rho1 = np.asarray(genie.rho1, dtype=float)
        rho2 = np.asarray(genie.rho2, dtype=float)
        batch = np.broadcast_shapes(rho1.shape, rho2.shape)
        cov = np.zeros(batch + (6, 6))
        cov[..., :, :] = np.diag([net.P1, net.P2, 1.0, 1.0, 1.0, 1.0])
        # source order: X1 X2 Z1 Z2 W1 W2
        cov[..., 2, 4] = cov[..., 4, 2] = rho1
        cov[..., 3, 5] = cov[..., 5, 3] = rho2
        eta1 = np.asarray(genie.eta1, dtype=float)
        eta2 = np.asarray(genie.eta2, dtype=float)
        combos["S1"] = {"X1": net.h21, "W1": net.h21 * eta1}
        combos["S2"] = {"X2": net.h12, "W2": net.h12 * eta2}
        return GaussianSystem.from_linear(sources + ["W1", "W2"], cov, combos)

    if isinstance(genie, GenieSpec3Sym):
        if M != 3 or not is_symmetric(net):
            raise InvalidGenieError("GenieSpec3Sym needs a symmetric three-user network")
        h = float(net.H[0, 1])
        if np.any(net.H[~np.eye(3, dtype=bool)] != h):
            raise InvalidGenieError("GenieSpec3Sym needs equal (same-sign) cross gains")
        W = [f"W{r}{k}" for r in range(1, 4) for k in (1, 2)]
        names = X + Z + W
        idx = {n: i for i, n in enumerate(names)}
        cov = np.zeros((len(names), len(names)))
        cov[:3, :3] = np.diag(net.P)
        S = genie.Sigma
        for r in range(1, 4):
            block = [idx[f"Z{r}"], idx[f"W{r}1"], idx[f"W{r}2"]]
            cov[np.ix_(block, block)] = S
        for r in range(1, 4):
            prev = (r - 2) % 3 + 1
            combos[f"S{r}_1"] = {f"X{r}": h, f"X{prev}": h, f"W{r}1": h * genie.eta1}
            combos[f"S{r}_2"] = {f"X{r}": h, f"W{r}2": h * genie.eta2}
        return GaussianSystem.from_linear(names, cov, combos)

    if isinstance(genie, VectorGenie):
        if genie.M != M:
            raise InvalidGenieError(f"vector genie built for M={genie.M}, network has M={M}")
        A = genie.coefficients(net.H)
        for row in genie.signals:
            for s in row:
                terms = {X[t]: A[s.r - 1, s.k - 1, t] for t in range(M)}
                terms[Z[s.noise - 1]] = 1.0
                combos[f"S{s.r}_{s.k}"] = terms
        return GaussianSystem.from_linear(sources, base, combos)

    raise InvalidGenieError(f"unsupported genie type {type(genie).__name__}")


def genie_labels(net: InterferenceNetwork, genie, r: int) -> list:
    """Labels of the side information given to receiver ``r`` (1-based)."""
    if isinstance(genie, (EtwGenie, GenieSpec2)):
        return [f"S{r}"]
    if isinstance(genie, GenieSpec3Sym):
        return [f"S{r}_1", f"S{r}_2"]
    if isinstance(genie, VectorGenie):
        return [f"S{r}_{k}" for k in range(1, net.M)]
    raise InvalidGenieError(f"unsupported genie type {type(genie).__name__}")
