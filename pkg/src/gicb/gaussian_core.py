"""
Exact covariance algebra for jointly Gaussian variables.

Every quantity here is a closed form in the joint covariance: differential
entropies, Schur-complement conditional covariances, (conditional) mutual
informations and Markov-chain tests.  All information quantities are in bits.

Covariances may carry leading batch dimensions, shape ``(..., n, n)``.  Every
function then evaluates element-wise over the batch, which is how the bound
searches sweep thousands of genie parameters through the same engine.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import InvalidCovarianceError, LabelError, PreconditionError

LOG2_2PIE = float(np.log2(2.0 * np.pi * np.e))
TWO_PI_E = 2.0 * np.pi * np.e

SYMMETRY_RTOL = 1e-12
PSD_TOL = 1e-10
DET_TOL = 1e-300
PINV_RCOND = 1e-12
MI_TOL = 1e-9

Labels = Union[str, Iterable[str]]


def _as_labels(labels: Labels) -> tuple:
    if isinstance(labels, str):
        return (labels,)
    return tuple(labels)


def _sym(a):
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def clamp_psd(a: np.ndarray) -> np.ndarray:
    """Clip slightly negative eigenvalues (rounding noise) to zero."""
    a = _sym(np.asarray(a, dtype=float))
    if a.shape[-1] == 0:
        return a
    w, v = np.linalg.eigh(a)
    if np.all(w >= 0.0):
        return a
    w = np.clip(w, 0.0, None)
    return _sym((v * w[..., None, :]) @ np.swapaxes(v, -1, -2))


@dataclass(frozen=True, eq=False)
class CovMatrix:
    """Symmetric positive-semidefinite matrix, optionally batched.

    Symmetry is checked to ``1e-12`` and eigenvalues to ``-1e-10``, both
    relative to ``max(1, max|entry|)``.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
            raise InvalidCovarianceError(f"expected (..., n, n) array, got shape {a.shape}")
        scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
        if np.any(np.abs(a - np.swapaxes(a, -1, -2)) > SYMMETRY_RTOL * scale):
            raise InvalidCovarianceError("covariance is not symmetric")
        a = _sym(a)
        if a.shape[-1] > 0 and a.size:
            if not np.all(np.isfinite(a)):
                raise InvalidCovarianceError("covariance has non-finite entries")
            if np.linalg.eigvalsh(a).min() < -PSD_TOL * scale:
                raise InvalidCovarianceError("covariance is not positive semidefinite")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[-1]

    @property
    def batch_shape(self) -> tuple:
        return self.entries.shape[:-2]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


@dataclass(frozen=True)
class EntropyValue:
    """Differential entropy in bits; ``degenerate`` marks a singular covariance (value -inf)."""

    value: Union[float, np.ndarray]
    degenerate: Union[bool, np.ndarray] = False

    def __float__(self):
        return float(self.value)


class GaussianSystem:
    """A finite set of named, jointly Gaussian, zero-mean variables.

    Parameters
    ----------
    names : sequence of str
        Unique variable labels.
    joint_cov : array_like or CovMatrix
        Joint covariance, shape ``(..., len(names), len(names))``.
    """

    def __init__(self, names: Sequence[str], joint_cov):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise LabelError(f"duplicate labels in {names}")
        cov = joint_cov if isinstance(joint_cov, CovMatrix) else CovMatrix(joint_cov)
        if cov.dim != len(names):
            raise InvalidCovarianceError(
                f"{len(names)} labels but covariance has dimension {cov.dim}")
        self.names = names
        self.joint_cov = cov
        self._index = {n: i for i, n in enumerate(names)}

    @classmethod
    def from_linear(cls, sources: Sequence[str], source_cov,
                    combos: Mapping[str, Mapping[str, object]] = None) -> "GaussianSystem":
        """Build a system from source variables and linear combinations of them.

        ``combos`` maps each derived label to ``{source_label: coefficient}``.
        Coefficients may be arrays; they broadcast against each other and
        against any batch dimensions of ``source_cov``.
        """
        sources = tuple(sources)
        combos = dict(combos or {})
        src = {s: j for j, s in enumerate(sources)}
        scov = np.asarray(source_cov, dtype=float)
        batch = scov.shape[:-2]
        for terms in combos.values():
            for s, c in terms.items():
                if s not in src:
                    raise LabelError(f"unknown source label {s!r}")
                batch = np.broadcast_shapes(batch, np.shape(c))
        names = sources + tuple(combos)
        m = len(sources)
        A = np.zeros(batch + (len(names), m))
        A[..., np.arange(m), np.arange(m)] = 1.0
        for i, terms in enumerate(combos.values(), start=m):
            for s, c in terms.items():
                A[..., i, src[s]] += c
        cov = A @ scov @ np.swapaxes(A, -1, -2)
        return cls(names, _sym(cov))

    def indices(self, labels: Labels) -> list:
        out = []
        for lab in _as_labels(labels):
            try:
                out.append(self._index[lab])
            except KeyError:
                raise LabelError(f"unknown label {lab!r}") from None
        return out

    def cov(self, labels: Labels) -> np.ndarray:
        idx = self.indices(labels)
        return self.joint_cov.entries[..., idx, :][..., :, idx]

    def cross_cov(self, a: Labels, b: Labels) -> np.ndarray:
        ia, ib = self.indices(a), self.indices(b)
        return self.joint_cov.entries[..., ia, :][..., :, ib]

    def sub(self, labels: Labels) -> "GaussianSystem":
        labels = _as_labels(labels)
        return GaussianSystem(labels, self.cov(labels))

    def __repr__(self):
        return f"GaussianSystem({list(self.names)}, batch={self.joint_cov.batch_shape})"


def _pinv(a):
    if a.shape[-1] == 0:
        return a
    return np.linalg.pinv(a, rcond=PINV_RCOND, hermitian=True)


def _schur(cov_tt, cov_tg, cov_gg):
    if cov_gg.shape[-1] == 0:
        return cov_tt
    return cov_tt - cov_tg @ _pinv(cov_gg) @ np.swapaxes(cov_tg, -1, -2)


def _check_disjoint(*groups):
    seen = set()
    for g in groups:
        for lab in g:
            if lab in seen:
                raise PreconditionError(f"label {lab!r} appears in more than one argument")
            seen.add(lab)


def differential_entropy(sys: GaussianSystem, subset: Labels) -> EntropyValue:
    """Entropy ``0.5 * log2((2 pi e)^k det(Sigma_subset))`` in bits."""
    subset = _as_labels(subset)
    if not subset:
        raise PreconditionError("subset must be nonempty")
    cov = sys.cov(subset)
    sign, logdet = np.linalg.slogdet(cov)
    degenerate = (sign <= 0) | (logdet <= np.log(DET_TOL))
    k = len(subset)
    value = 0.5 * (k * LOG2_2PIE + logdet / np.log(2.0))
    value = np.where(degenerate, -np.inf, value)
    if np.ndim(value) == 0:
        return EntropyValue(float(value), bool(degenerate))
    return EntropyValue(value, degenerate)


def conditional_cov(sys: GaussianSystem, target: Labels, given: Labels = ()) -> CovMatrix:
    """MMSE error covariance of ``target`` given ``given`` (Schur complement).

    Singular conditioning blocks go through a pseudo-inverse with singular
    values below ``1e-12`` times the largest treated as zero.
    """
    target, given = _as_labels(target), _as_labels(given)
    _check_disjoint(target, given)
    out = _schur(sys.cov(target), sys.cross_cov(target, given), sys.cov(given))
    return CovMatrix(clamp_psd(out))


def _mi_from_cov(cov: np.ndarray, na: int) -> np.ndarray:
    """I(A;B) for a covariance ordered (A, B), A having ``na`` components."""
    caa = cov[..., :na, :na]
    cond = _schur(caa, cov[..., :na, na:], cov[..., na:, na:])
    # Work in the eigenbasis of Cov(A) so deterministic directions of A drop out.
    lam, u = np.linalg.eigh(caa)
    cutoff = PINV_RCOND * np.maximum(lam[..., -1:], np.finfo(float).tiny)
    keep = lam > cutoff
    m = np.swapaxes(u, -1, -2) @ cond @ u
    eye = np.broadcast_to(np.eye(na), m.shape)
    mask = keep[..., :, None] & keep[..., None, :]
    m = np.where(mask, m, eye)
    lam = np.where(keep, lam, 1.0)
    w = np.linalg.eigvalsh(_sym(m))
    singular = w[..., 0] <= cutoff[..., 0]
    _, logdet = np.linalg.slogdet(np.where(singular[..., None, None], eye, m))
    mi = 0.5 * (np.sum(np.log(lam), axis=-1) - logdet) / np.log(2.0)
    mi = np.where(singular, np.inf, np.maximum(mi, 0.0))
    return mi


def mutual_information(sys: GaussianSystem, a: Labels, b: Labels, given: Labels = ()):
    """Mutual information ``I(a; b | given)`` in bits.

    Returns ``inf`` when ``b`` (together with ``given``) determines a
    non-degenerate part of ``a``; deterministic components of ``a`` carry no
    information and are projected out.
    """
    a, b, given = _as_labels(a), _as_labels(b), _as_labels(given)
    if not a or not b:
        raise PreconditionError("label sets must be nonempty")
    _check_disjoint(a, b, given)
    ab = a + b
    cov = _schur(sys.cov(ab), sys.cross_cov(ab, given), sys.cov(given))
    mi = _mi_from_cov(_sym(cov), len(a))
    return float(mi) if np.ndim(mi) == 0 else mi


def markov_test(sys: GaussianSystem, x: Labels, y: Labels, s: Labels, tol: float = MI_TOL):
    """True iff ``x - y - s`` is a Markov chain, i.e. ``I(x; s | y) <= tol``."""
    mi = mutual_information(sys, x, s, given=y)
    return bool(mi <= tol) if np.ndim(mi) == 0 else mi <= tol


def markov_algebraic(e_nz: float, e_zz: float, tol: float = MI_TOL) -> bool:
    """Scalar criterion for ``X - (X+Z) - (X+N)``: ``E[NZ] == E[Z^2]``."""
    return abs(e_nz - e_zz) <= tol


def scalar_markov_pair_test(sys: GaussianSystem, x: str, y: str, s1: str, s2: str,
                            tol: float = MI_TOL):
    for lab in (x, y, s1, s2):
        if not isinstance(lab, str):
            raise PreconditionError("scalar_markov_pair_test takes single labels")
    return markov_test(sys, x, y, (s1, s2), tol=tol)


def epi_lower_bound(h_x, sigma2: float) -> EntropyValue:
    """Lower bound ``0.5 log2(2^(2 h_x) + 2 pi e sigma2)`` on h(X + Z), Z ~ N(0, sigma2).

    ``h_x`` is a per-symbol entropy in bits (float or EntropyValue).  Tight
    when X is Gaussian.
    """
    if sigma2 < 0:
        raise PreconditionError("sigma2 must be nonnegative")
    hv = float(h_x.value if isinstance(h_x, EntropyValue) else h_x)
    if sigma2 == 0:
        return EntropyValue(hv, hv == -np.inf)
    power = 0.0 if hv == -np.inf else 2.0 ** (2.0 * hv)
    return EntropyValue(0.5 * np.log2(power + TWO_PI_E * sigma2), False)


@dataclass
class ExtremalReport:
    """Outcome of a grid check of the weighted-entropy extremal inequality."""

    maximizer: np.ndarray
    expected: np.ndarray
    gradient: np.ndarray
    max_deviation: float
    refine_step: float
    at_threshold: bool
    location_ok: bool
    gradient_ok: bool
    f_max: float
    f_expected: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.location_ok and self.gradient_ok


def _extremal_f(t, lambdas, c):
    # t has shape (..., M)
    return t @ lambdas - 0.5 * np.log2(np.sum(2.0 ** (2.0 * t), axis=-1) + c)


def _grid_argmax(axes, lambdas, c):
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes))
    vals = _extremal_f(pts, lambdas, c)
    k = int(np.argmax(vals))
    return pts[k], float(vals[k])


def verify_extremal_inequality(P, sigma2: float, lambdas, coarse_step: float = 0.05,
                               refine_step: float = 0.001, span: float = 3.0,
                               grad_tol: float = 1e-6,
                               max_points: int = 5_000_000) -> ExtremalReport:
    """Grid-check that the Gaussian entropies maximize the weighted objective.

    The objective is ``f(t) = sum_i lambda_i t_i - 0.5 log2(sum_i 2^(2 t_i) +
    2 pi e sigma2)``, where ``t_i`` is the per-symbol entropy of input ``i``.
    With every ``lambda_i`` at its threshold ``P_i / (sum P + sigma2)`` the
    grid spans ``t* +/- span``.  Above the threshold the maximum-entropy cap
    ``t <= t*`` binds, so the grid spans ``[t* - span, t*]`` and the gradient
    at ``t*`` only has to be nonnegative.

    Raises
    ------
    PreconditionError
        If some ``lambda_i`` is below its threshold, or ``sigma2 <= 0``.
    """
    P = np.atleast_1d(np.asarray(P, dtype=float))
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    if P.shape != lambdas.shape or P.ndim != 1:
        raise PreconditionError("P and lambdas must be vectors of equal length")
    if np.any(P <= 0) or sigma2 <= 0:
        raise PreconditionError("powers and sigma2 must be positive")
    thresholds = P / (P.sum() + sigma2)
    if np.any(lambdas < thresholds - 1e-12):
        raise PreconditionError(
            f"lambda must satisfy lambda_i >= P_i/(sum P + sigma2) = {thresholds.tolist()}")
    M = P.size
    n_coarse = int(round(2 * span / coarse_step)) + 1
    if n_coarse ** M > max_points:
        raise PreconditionError(f"grid with {n_coarse}^{M} points exceeds max_points")

    c = TWO_PI_E * sigma2
    t_star = 0.5 * np.log2(TWO_PI_E * P)
    at_threshold = bool(np.all(np.abs(lambdas - thresholds) <= 1e-12))
    k_hi = n_coarse - 1 if at_threshold else int(round(span / coarse_step))
    offsets = coarse_step * np.arange(-int(round(span / coarse_step)), k_hi - int(round(span / coarse_step)) + 1)
    coarse_axes = [ts + offsets for ts in t_star]
    best, _ = _grid_argmax(coarse_axes, lambdas, c)

    n_fine = int(round(coarse_step / refine_step))
    fine_offsets = refine_step * np.arange(-n_fine, n_fine + 1)
    fine_axes = []
    for b, ts in zip(best, t_star):
        ax = b + fine_offsets
        lo, hi = ts - span, (ts + span if at_threshold else ts)
        fine_axes.append(ax[(ax >= lo - 1e-12) & (ax <= hi + 1e-12)])
    best, f_max = _grid_argmax(fine_axes, lambdas, c)

    denom = np.sum(2.0 ** (2.0 * t_star)) + c
    gradient = lambdas - 2.0 ** (2.0 * t_star) / denom
    deviation = float(np.max(np.abs(best - t_star)))
    location_ok = deviation <= refine_step * (1 + 1e-6)
    if at_threshold:
        gradient_ok = bool(np.all(np.abs(gradient) <= grad_tol))
    else:
        gradient_ok = bool(np.all(gradient >= -grad_tol))
    return ExtremalReport(
        maximizer=best, expected=t_star, gradient=gradient, max_deviation=deviation,
        refine_step=refine_step, at_threshold=at_threshold, location_ok=location_ok,
        gradient_ok=gradient_ok, f_max=f_max,
        f_expected=float(_extremal_f(t_star, lambdas, c)),
        details={"coarse_step": coarse_step, "span": span, "M": M},
    )


def random_psd(rng: np.random.Generator, n: int, rank: int = None, scale: float = 1.0) -> np.ndarray:
    """Random PSD matrix ``G G^T`` (rank ``rank``), used by the property suites."""
    rank = n if rank is None else rank
    g = rng.standard_normal((n, rank)) * scale
    return _sym(g @ g.T)


def all_label_subsets(labels: Sequence[str], max_size: int = None):
    labels = tuple(labels)
    max_size = len(labels) if max_size is None else max_size
    for k in range(1, max_size + 1):
        yield from itertools.combinations(labels, k)
