"""
Property suites for the Gaussian engine: extremal inequality grids, Markov
chain tests, EPI equality, chain rule and worst-case noise.

Each suite returns a ``PropertyResult``; ``run_suites`` collects them into a
``VerifyReport``.  Suites reach the engine through the ``gaussian_core``
module object, so a fixture can patch a single formula and watch the
matching property fail.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from . import gaussian_core as gc


@dataclass(frozen=True)
class VerifyConfig:
    """Seed, sample counts and an optional tolerance override.

    ``tol`` replaces the equality tolerances of the EPI, chain-rule,
    worst-case-noise and extremal-gradient checks.  The Markov agreement
    suite keeps the engine's own tolerance because it compares two tests.
    """

    seed: int = 0
    n_systems: int = 1000
    tol: Optional[float] = None

    def __post_init__(self):
        if self.tol is not None and not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.n_systems < 1:
            raise ValueError("n_systems must be positive")

    def pick(self, default: float) -> float:
        return default if self.tol is None else float(self.tol)


@dataclass(frozen=True)
class PropertyResult:
    name: str
    passed: bool
    worst: float
    tol: float
    cases: int
    detail: str = ""

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "worst", float(self.worst))
        object.__setattr__(self, "tol", float(self.tol))

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "worst": self.worst,
                "tol": self.tol, "cases": self.cases, "detail": self.detail}


@dataclass(frozen=True)
class VerifyReport:
    results: tuple = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> list:
        return [r.name for r in self.results if not r.passed]

    def as_dict(self) -> dict:
        return {"passed": self.passed, "failures": self.failures,
                "properties": [r.as_dict() for r in self.results]}


# --------------------------------------------------------------------------
# Suites


EXTREMAL_CASES = (
    # (P, sigma2, lambdas); None means "at the threshold"
    ((2.0,), 1.0, None),
    ((1.0, 1.0), 1.0, None),
    ((3.0, 0.5), 2.0, None),
    ((2.0,), 1.0, (0.9,)),
    ((1.0, 4.0), 0.5, (0.3, 0.9)),
    ((1.0, 2.0, 0.5), 1.0, None),
)


def extremal_suite(cfg: VerifyConfig) -> PropertyResult:
    """Grid maximizer of the weighted objective sits at the Gaussian entropies."""
    grad_tol = cfg.pick(1e-6)
    worst, bad = 0.0, []
    for P, sigma2, lam in EXTREMAL_CASES:
        P = np.asarray(P)
        lam = P / (P.sum() + sigma2) if lam is None else np.asarray(lam)
        rep = gc.verify_extremal_inequality(P, sigma2, lam, grad_tol=grad_tol)
        worst = max(worst, rep.max_deviation / rep.refine_step)
        if not rep.passed:
            bad.append(f"P={P.tolist()}")
    return PropertyResult("extremal_inequality", not bad, worst, 1.0, len(EXTREMAL_CASES),
                          "; ".join(bad) or "maximizer within one refinement step")


def _scalar_markov_system(rng, markov: bool):
    """``Y = X + Z``, ``S = X + N``; Markov cases use ``N = Z + V`` so ``E[NZ] = E[Z^2]``."""
    P = rng.uniform(0.1, 10.0)
    vz = rng.uniform(0.1, 3.0)
    vv = rng.uniform(0.0, 3.0)
    if markov:
        cov_zn = vz
        vn = vz + vv
    else:
        vn = rng.uniform(0.1, 3.0)
        r = rng.uniform(-0.95, 0.95)
        cov_zn = r * np.sqrt(vz * vn)
    src = np.array([[P, 0.0, 0.0], [0.0, vz, cov_zn], [0.0, cov_zn, vn]])
    sys = gc.GaussianSystem.from_linear(["X", "Z", "N"], src,
                                        {"Y": {"X": 1.0, "Z": 1.0}, "S": {"X": 1.0, "N": 1.0}})
    return sys, cov_zn, vz


def markov_suite(cfg: VerifyConfig) -> PropertyResult:
    """MI-based and algebraic Markov tests agree; the pair test matches the two single tests."""
    rng = np.random.default_rng(cfg.seed)
    disagree = 0
    for i in range(cfg.n_systems):
        sys, e_nz, e_zz = _scalar_markov_system(rng, markov=bool(i % 2))
        if gc.markov_test(sys, "X", "Y", "S") != gc.markov_algebraic(e_nz, e_zz):
            disagree += 1
    pair_disagree = 0
    n_pair = max(1, cfg.n_systems // 4)
    for i in range(n_pair):
        P, vz = rng.uniform(0.1, 10.0), rng.uniform(0.1, 3.0)
        kinds = (i % 2 == 0, i % 3 == 0)
        # Z, V1, V2 independent; S_k = X + Z + V_k is degraded, X + V_k is not
        src = np.diag([P, vz, rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0)])
        combos = {"Y": {"X": 1.0, "Z": 1.0}}
        for k, degraded in zip((1, 2), kinds):
            combos[f"S{k}"] = {"X": 1.0, "Z": 1.0 if degraded else 0.0, f"V{k}": 1.0}
        sys = gc.GaussianSystem.from_linear(["X", "Z", "V1", "V2"], src, combos)
        joint = gc.scalar_markov_pair_test(sys, "X", "Y", "S1", "S2")
        single = gc.markov_test(sys, "X", "Y", "S1") and gc.markov_test(sys, "X", "Y", "S2")
        if joint != single or joint != all(kinds):
            pair_disagree += 1
    total = cfg.n_systems + n_pair
    bad = disagree + pair_disagree
    return PropertyResult("markov_agreement", bad == 0, float(bad), 0.0, total,
                          f"{disagree} single and {pair_disagree} pair disagreements")


def epi_suite(cfg: VerifyConfig) -> PropertyResult:
    """EPI lower bound is an equality for Gaussian inputs."""
    tol = cfg.pick(1e-12)
    worst, n = 0.0, 0
    for P in (0.01, 0.5, 1.0, 3.0, 10.0, 100.0):
        for s2 in (0.0, 0.1, 1.0, 4.0):
            sys = gc.GaussianSystem.from_linear(["X", "Z"], np.diag([P, s2]),
                                                {"Y": {"X": 1.0, "Z": 1.0}})
            bound = gc.epi_lower_bound(gc.differential_entropy(sys, "X"), s2)
            exact = gc.differential_entropy(sys, "Y")
            worst = max(worst, abs(float(bound) - float(exact)))
            n += 1
    return PropertyResult("epi_equality", worst <= tol, worst, tol, n,
                          "largest |bound - h(X+Z)| in bits")


def _random_system(rng, n):
    names = [f"V{i}" for i in range(n)]
    return gc.GaussianSystem(names, gc.random_psd(rng, n) + 0.05 * np.eye(n)), names


def chain_rule_suite(cfg: VerifyConfig) -> PropertyResult:
    """``I(A; B, C) = I(A; C) + I(A; B | C)`` on random systems."""
    tol = cfg.pick(1e-9)
    rng = np.random.default_rng(cfg.seed + 1)
    worst = 0.0
    for _ in range(cfg.n_systems):
        n = int(rng.integers(3, 7))
        sys, names = _random_system(rng, n)
        perm = list(rng.permutation(names))
        cuts = np.sort(rng.choice(np.arange(1, n), size=2, replace=False))
        a, b, c = perm[:cuts[0]], perm[cuts[0]:cuts[1]], perm[cuts[1]:]
        lhs = gc.mutual_information(sys, a, b + c)
        rhs = gc.mutual_information(sys, a, c) + gc.mutual_information(sys, a, b, given=c)
        worst = max(worst, abs(float(lhs) - float(rhs)))
    return PropertyResult("chain_rule", worst <= tol, worst, tol, cfg.n_systems,
                          "largest chain-rule residual in bits")


def worst_case_noise_suite(cfg: VerifyConfig) -> PropertyResult:
    """Gaussian inputs attain the scalar worst-case-noise bound; weaker Gaussians stay below it."""
    tol = cfg.pick(1e-12)
    worst, n, below_ok = 0.0, 0, True
    for P in (0.1, 1.0, 5.0, 20.0):
        for s2 in (0.05, 0.3, 0.7, 1.0):
            rhs = 0.5 * np.log2(P / (P + s2))
            sys = gc.GaussianSystem.from_linear(["X", "Z"], np.diag([P, s2]),
                                                {"Y": {"X": 1.0, "Z": 1.0}})
            lhs = float(gc.differential_entropy(sys, "X")) - float(gc.differential_entropy(sys, "Y"))
            worst = max(worst, abs(lhs - rhs))
            weak = gc.GaussianSystem.from_linear(["X", "Z"], np.diag([0.5 * P, s2]),
                                                 {"Y": {"X": 1.0, "Z": 1.0}})
            gap = float(gc.differential_entropy(weak, "X")) - float(gc.differential_entropy(weak, "Y"))
            below_ok &= gap <= rhs + tol
            n += 1
    return PropertyResult("worst_case_noise", worst <= tol and below_ok, worst, tol, n,
                          "equality residual in bits; half-power inputs checked below the bound")


SUITES: Dict[str, Callable[[VerifyConfig], PropertyResult]] = {
    "extremal_inequality": extremal_suite,
    "markov_agreement": markov_suite,
    "epi_equality": epi_suite,
    "chain_rule": chain_rule_suite,
    "worst_case_noise": worst_case_noise_suite,
}


def run_suites(cfg: VerifyConfig = None, names: Sequence[str] = None) -> VerifyReport:
    """Run the named suites (all by default) in a fixed order."""
    cfg = cfg or VerifyConfig()
    names = list(SUITES) if names is None else list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suites: {unknown}")
    return VerifyReport(tuple(SUITES[n](cfg) for n in names))
