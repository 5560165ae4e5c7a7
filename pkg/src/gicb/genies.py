"""
Genie side-information descriptions.

A genie hands each receiver an extra Gaussian observation.  The classes here
only describe the signals; ``channel_model.build_gaussian_system`` turns a
network plus a genie into a covariance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import InvalidGenieError, InvalidOrderingError

CORR_TOL = 1e-12


def _check_corr(name, value):
    v = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(v)) or np.any(np.abs(v) > 1.0 + CORR_TOL):
        raise InvalidGenieError(f"{name} must lie in [-1, 1], got {value}")


def _check_scale(name, value):
    v = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(v)):
        raise InvalidGenieError(f"{name} must be finite, got {value}")


@dataclass(frozen=True)
class GenieSpec2:
    """Two-user correlated genie.

    Receiver 1 gets ``S1 = h21 (X1 + eta1 W1)`` and receiver 2 gets
    ``S2 = h12 (X2 + eta2 W2)``, with unit-variance ``W_i`` correlated with
    the receiver noise ``Z_i`` by ``rho_i``.  Fields may be numpy arrays of a
    common broadcast shape, which turns every derived quantity into a batch.
    Negative ``eta`` is allowed; only ``|eta|`` and the sign of
    ``eta * rho`` enter the bounds.
    """

    eta1: object
    eta2: object
    rho1: object
    rho2: object

    def __post_init__(self):
        _check_scale("eta1", self.eta1)
        _check_scale("eta2", self.eta2)
        _check_corr("rho1", self.rho1)
        _check_corr("rho2", self.rho2)

    def swapped(self) -> "GenieSpec2":
        """Same genie with the user indices exchanged."""
        return GenieSpec2(self.eta2, self.eta1, self.rho2, self.rho1)

    def as_dict(self) -> dict:
        return {k: np.asarray(getattr(self, k)).tolist() for k in ("eta1", "eta2", "rho1", "rho2")}


@dataclass(frozen=True)
class EtwGenie:
    """Uncorrelated genie ``S1 = h21 X1 + Z2``, ``S2 = h12 X2 + Z1`` (shared receiver noises)."""

    def swapped(self) -> "EtwGenie":
        return self


@dataclass(frozen=True)
class GenieSpec3Sym:
    """Correlated genie for the symmetric three-user channel.

    Receiver ``r`` gets ``S_r1 = h X_r + h X_{r-1} + h eta1 W_r1`` and
    ``S_r2 = h X_r + h eta2 W_r2`` (indices mod 3), where
    ``[Z_r, W_r1, W_r2]`` has correlation matrix ``Sigma`` built from
    ``rho1``, ``rho2`` and ``rho12``, independently across ``r``.
    """

    rho1: float
    rho2: float
    rho12: float
    eta1: float
    eta2: float

    def __post_init__(self):
        for name in ("rho1", "rho2", "rho12"):
            _check_corr(name, getattr(self, name))
        _check_scale("eta1", self.eta1)
        _check_scale("eta2", self.eta2)
        lam = np.linalg.eigvalsh(self.Sigma)
        if lam.min() < -1e-10:
            raise InvalidGenieError(f"Sigma is not positive semidefinite (min eigenvalue {lam.min():.3g})")

    @property
    def Sigma(self) -> np.ndarray:
        return np.array([[1.0, self.rho1, self.rho2],
                         [self.rho1, 1.0, self.rho12],
                         [self.rho2, self.rho12, 1.0]])

    def as_dict(self) -> dict:
        return {k: float(getattr(self, k)) for k in ("rho1", "rho2", "rho12", "eta1", "eta2")}


@dataclass(frozen=True)
class OrderingFunction:
    """A cyclic ordering of users; ``images[r-1]`` is ``pi(r)`` (1-based)."""

    images: Tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(v) for v in self.images)
        object.__setattr__(self, "images", images)
        M = len(images)
        if M < 2:
            raise InvalidOrderingError("ordering function needs at least two users")
        if any(v < 1 or v > M for v in images):
            raise InvalidOrderingError(f"range: images must lie in 1..{M}, got {images}")
        orbit, r = [], 1
        for _ in range(M):
            orbit.append(r)
            r = images[r - 1]
        if set(orbit) != set(range(1, M + 1)):
            raise InvalidOrderingError(f"orbit: the orbit of 1 is {orbit}, which misses some users")
        for r in range(1, M + 1):
            if self.power(r, M) != r:
                raise InvalidOrderingError(f"period: pi applied {M} times does not fix {r}")

    @classmethod
    def cyclic(cls, M: int) -> "OrderingFunction":
        """The ordering ``1 -> 2 -> ... -> M -> 1``."""
        return cls(tuple(list(range(2, M + 1)) + [1]))

    @property
    def M(self) -> int:
        return len(self.images)

    def __call__(self, r: int) -> int:
        return self.images[r - 1]

    def power(self, r: int, k: int) -> int:
        for _ in range(k):
            r = self.images[r - 1]
        return r


@dataclass(frozen=True)
class GenieSignal:
    """``S_{r,k}``: receiver ``source`` output with the inputs outside ``inputs`` removed."""

    r: int
    k: int
    source: int
    inputs: Tuple[int, ...]

    @property
    def noise(self) -> int:
        return self.source


@dataclass(frozen=True)
class VectorGenie:
    """Nested side information ``S_{r,1..M-1}`` built from an ordering function.

    ``S_{r,k}`` is the output of receiver ``pi^k(r)`` with the inputs of
    users ``pi(r), ..., pi^k(r)`` removed.  Its noise is the receiver noise
    ``Z_{pi^k(r)}`` itself, so noise terms are shared with the outputs.
    """

    pi: OrderingFunction
    signals: Tuple[Tuple[GenieSignal, ...], ...]

    @classmethod
    def from_ordering(cls, pi: OrderingFunction) -> "VectorGenie":
        M = pi.M
        rows = []
        for r in range(1, M + 1):
            row = []
            for k in range(1, M):
                removed = {pi.power(r, j) for j in range(1, k + 1)}
                inputs = tuple(t for t in range(1, M + 1) if t not in removed)
                row.append(GenieSignal(r, k, pi.power(r, k), inputs))
            rows.append(tuple(row))
        return cls(pi, tuple(rows))

    @property
    def M(self) -> int:
        return self.pi.M

    def signal(self, r: int, k: int) -> GenieSignal:
        return self.signals[r - 1][k - 1]

    def coefficients(self, H: np.ndarray) -> np.ndarray:
        """Array ``A[r-1, k-1, t-1]``: coefficient of ``X_t`` in ``S_{r,k}``."""
        H = np.asarray(H, dtype=float)
        M = self.M
        A = np.zeros((M, M - 1, M))
        for row in self.signals:
            for s in row:
                idx = [t - 1 for t in s.inputs]
                A[s.r - 1, s.k - 1, idx] = H[s.source - 1, idx]
        return A

    def noise_indices(self) -> np.ndarray:
        """``N[r-1, k-1]``: 1-based index of the receiver noise in ``S_{r,k}``."""
        return np.array([[s.noise for s in row] for row in self.signals], dtype=int)

    def render(self, r: int, k: int) -> str:
        """Symbolic form of ``S_{r,k}``, e.g. ``h_{32}X_2 + h_{31}X_1 + Z_{3}``."""
        s = self.signal(r, k)
        return _render(s.source, s.inputs, lead=r)


def render_output(r: int, M: int) -> str:
    """Symbolic form of the output ``Y_r`` of an M-user network."""
    return _render(r, tuple(range(1, M + 1)), lead=r)


def _render(receiver: int, inputs, lead: int) -> str:
    order = sorted(inputs, key=lambda t: (t != lead, t))
    terms = [f"X_{t}" if t == receiver else f"h_{{{receiver}{t}}}X_{t}" for t in order]
    terms.append(f"Z_{{{receiver}}}")
    return " + ".join(terms)
