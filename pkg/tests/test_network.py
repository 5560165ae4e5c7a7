import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gicb import gaussian_core as gc
from gicb import network as nw
from gicb import two_user as tu
from gicb.channel_model import InterferenceNetwork, build_gaussian_system
from gicb.errors import DomainError, InvalidOrderingError
from gicb.genies import GenieSpec3Sym

import oracles as o
from oracles import cyclic_orderings


def many_to_one(P, h):
    M = len(P)
    H = np.eye(M)
    H[0, 1:] = h
    return InterferenceNetwork(H, P)


def one_to_many(P, h):
    M = len(P)
    H = np.eye(M)
    H[1:, 0] = h
    return InterferenceNetwork(H, P)


def random_network(rng, M, scale=0.6):
    H = rng.uniform(-scale, scale, (M, M))
    np.fill_diagonal(H, 1.0)
    return InterferenceNetwork(H, rng.uniform(0.2, 30, M))


class TestTin:
    def test_symmetric_three_user(self):
        net = InterferenceNetwork.symmetric(3, 7.0, 0.2)
        assert nw.m_user_tin_sum_rate(net) == pytest.approx(3 * o.c(7 / (1 + 2 * 0.04 * 7)))

    def test_zero_interference(self):
        net = InterferenceNetwork(np.eye(4), [1, 2, 3, 4])
        assert nw.m_user_tin_sum_rate(net) == pytest.approx(sum(o.c(p) for p in (1, 2, 3, 4)))
        assert nw.single_user_sum(net) == nw.m_user_tin_sum_rate(net)

    def test_two_user_consistency(self):
        net = InterferenceNetwork.two_user(10, 20, 0.2, 0.3)
        assert nw.m_user_tin_sum_rate(net) == pytest.approx(tu.tin_sum_rate(net), abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 6), st.integers(0, 10_000))
    def test_matches_oracle(self, M, seed):
        net = random_network(np.random.default_rng(seed), M)
        assert nw.m_user_tin_sum_rate(net) == pytest.approx(o.m_user_tin(net.H, net.P), abs=1e-12)


class TestManyToOne:
    @pytest.mark.parametrize("h, value, holds", [(0.6, 0.72, True), (0.8, 1.28, False), (0.0, 0.0, True)])
    def test_condition(self, h, value, holds):
        net = many_to_one([1, 1, 1], h)
        assert nw.many_to_one_condition_value(net) == pytest.approx(value)
        assert nw.many_to_one_test(net) is holds

    def test_example_value(self):
        res = nw.many_to_one_sum_capacity(many_to_one([1, 1, 1], 0.6))
        expected = o.c(1 / 1.72) + 2 * o.c(1)
        assert res.established and res.value == pytest.approx(expected, abs=1e-12)
        assert res.value == pytest.approx(1.33060, abs=1e-5)

    def test_zero_interference(self):
        res = nw.many_to_one_sum_capacity(many_to_one([2, 3, 4], 0.0))
        assert res.value == pytest.approx(o.c(2) + o.c(3) + o.c(4), abs=1e-12)

    def test_two_user_reduces_to_tin(self):
        net = many_to_one([5.0, 9.0], 0.7)
        res = nw.many_to_one_sum_capacity(net)
        assert res.value == pytest.approx(o.tin_sum(5, 9, 0.7, 0.0), abs=1e-12)

    def test_wrong_class(self):
        with pytest.raises(DomainError):
            nw.many_to_one_test(one_to_many([1, 1, 1], 0.5))

    def test_outside_regime(self):
        net = many_to_one([1, 1, 1], 0.8)
        res = nw.many_to_one_sum_capacity(net)
        assert not res.established and res.value is None
        assert res.inner.value == pytest.approx(nw.m_user_tin_sum_rate(net))
        assert res.inner.value <= res.outer.value <= nw.single_user_sum(net) + 1e-12

    @pytest.mark.parametrize("P, h", [([1, 1, 1], 0.6), ([5, 2, 8, 3], [0.3, -0.5, 0.6]),
                                      ([10, 10], 0.9)])
    def test_smart_pooled_genie_is_tight(self, P, h):
        net = many_to_one(P, h)
        corr = float(np.linalg.norm(net.H[0, 1:]))
        assert nw.many_to_one_genie_bound(net, corr) == pytest.approx(
            nw.many_to_one_sum_capacity(net).value, abs=1e-9)

    def test_pooled_genie_never_below_tin(self):
        net = many_to_one([3, 4, 5], 0.9)
        bounds = nw.many_to_one_genie_bound(net, np.linspace(-1, 1, 41))
        assert np.all(bounds >= nw.m_user_tin_sum_rate(net) - 1e-9)


class TestOneToMany:
    def test_two_user_example(self):
        net = one_to_many([1, 1], 0.5)
        t = nw.one_to_many_test(net)
        assert t and t.value == pytest.approx(0.4) and t.lam == (1.0,)
        res = nw.one_to_many_sum_capacity(net)
        assert res.value == pytest.approx(0.5 + o.c(1 / 1.25), abs=1e-12)
        assert res.value == pytest.approx(0.9240, abs=1e-4)

    def test_four_user_fails(self):
        t = nw.one_to_many_test(one_to_many([10, 1, 1, 1], 0.7))
        assert not t and t.lam is None
        assert t.value == pytest.approx(3 * 5.39 / 5.9, abs=1e-12)

    def test_zero_interference(self):
        net = one_to_many([2, 3, 4], 0.0)
        t = nw.one_to_many_test(net)
        assert t and sum(t.lam) == pytest.approx(1.0) and min(t.lam) >= 0
        assert nw.one_to_many_sum_capacity(net).value == pytest.approx(o.c(2) + o.c(3) + o.c(4))

    def test_silent_user_one_limit(self):
        net = one_to_many([1e-12, 3, 4], 0.4)
        assert nw.one_to_many_sum_capacity(net).value == pytest.approx(o.c(3) + o.c(4), abs=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 5), st.integers(0, 10_000))
    def test_lambda_witness(self, M, seed):
        rng = np.random.default_rng(seed)
        net = one_to_many(rng.uniform(0.1, 5, M), rng.uniform(-0.4, 0.4, M - 1))
        t = nw.one_to_many_test(net)
        if t:
            g = net.H[1:, 0] ** 2
            terms = (g * net.P[0] + g) / (g * net.P[0] + 1)
            assert sum(t.lam) == pytest.approx(1.0, abs=1e-12)
            assert np.all(np.array(t.lam) >= terms - 1e-15)

    def test_outside_regime(self):
        net = one_to_many([10, 1, 1, 1], 0.7)
        res = nw.one_to_many_sum_capacity(net)
        assert not res.established
        assert res.outer.value == pytest.approx(nw.single_user_sum(net))
        assert res.inner.value <= res.outer.value

    def test_wrong_class(self):
        with pytest.raises(DomainError):
            nw.one_to_many_test(many_to_one([1, 1, 1], 0.5))


class TestVectorGenieBound:
    @pytest.mark.parametrize("P1, P2, h12, h21", [(10, 20, 0.2, 0.3), (7, 7, 0.2 ** 0.5, 0.2 ** 0.5),
                                                  (1, 4, -0.7, 0.9)])
    def test_two_users_equal_etw(self, P1, P2, h12, h21):
        net = InterferenceNetwork.two_user(P1, P2, h12, h21)
        assert nw.vector_genie_sum_bound(net) == pytest.approx(o.etw_sum(P1, P2, h12, h21), abs=1e-9)

    def test_zero_interference(self):
        net = InterferenceNetwork(np.eye(3), [1, 2, 3])
        assert nw.vector_genie_sum_bound(net) == pytest.approx(nw.single_user_sum(net), abs=1e-12)

    def test_symmetric_example(self):
        net = InterferenceNetwork.symmetric(3, 7.0, math.sqrt(0.05))
        v = nw.vector_genie_sum_bound(net)
        assert np.isfinite(v) and v >= nw.m_user_tin_sum_rate(net)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 5), st.integers(0, 10_000), st.integers(0, 1000))
    def test_at_least_tin(self, M, seed, which):
        rng = np.random.default_rng(seed)
        net = random_network(rng, M)
        orders = cyclic_orderings(M)
        pi = orders[which % len(orders)]
        assert nw.vector_genie_sum_bound(net, pi) >= nw.m_user_tin_sum_rate(net) - 1e-9

    def test_ordering_size_mismatch(self):
        with pytest.raises(InvalidOrderingError):
            nw.vector_genie_sum_bound(InterferenceNetwork.symmetric(3, 1, 0.1), (2, 3, 4, 1))


def useful_oracle(h, g):
    """Both 2x2 covariances from the engine, then the difference."""
    sys = gc.GaussianSystem.from_linear(
        ["Z", "W1", "W2"], g.Sigma,
        {"A": {"W1": h * g.eta1}, "B": {"W2": h * g.eta2}})
    cond = gc.conditional_cov(sys, ["Z", "A"], "W2").entries
    gen = sys.cov(["A", "B"])
    return cond - gen


def eig2_min(m):
    a, b, d = m[0, 0], m[0, 1], m[1, 1]
    return 0.5 * (a + d) - math.sqrt(0.25 * (a - d) ** 2 + b * b)


def valid_sigma(rng):
    while True:
        r = rng.uniform(-0.99, 0.99, 3)
        det = 1 - (r ** 2).sum() + 2 * r.prod()
        if det > 1e-6:
            return r


class TestThreeUserUseful:
    def test_zero_gain(self):
        assert nw.three_user_useful_test(7, 0.0, GenieSpec3Sym(0.3, 0.5, 0.2, 4.0, 2.0))

    def test_zero_eta(self):
        assert nw.three_user_useful_test(7, 0.3, GenieSpec3Sym(0.3, 0.5, 0.2, 0.0, 0.0))

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 100_000))
    def test_matrices_match_engine_and_eigen_oracle(self, seed):
        rng = np.random.default_rng(seed)
        r1, r2, r12 = valid_sigma(rng)
        g = GenieSpec3Sym(r1, r2, r12, rng.uniform(0, 5), rng.uniform(0, 5))
        h = rng.uniform(0, 0.6)
        cond, gen = nw.three_user_useful_matrices(h, g)
        diff = useful_oracle(h, g)
        np.testing.assert_allclose(cond - gen, diff, atol=1e-12)
        lam = eig2_min(diff)
        if abs(lam) > 1e-9:
            assert nw.three_user_useful_test(1.0, h, g) == (lam >= -1e-10)
        d11, d12, d22 = nw._useful_matrix(h, g.eta1, g.eta2, r1, r2, r12)
        np.testing.assert_allclose([[d11, d12], [d12, d22]], diff, atol=1e-12)


class TestThreeUserSmart:
    @pytest.mark.parametrize("P, h, targets", [(5.0, 0.0, (1.0, 1.0)), (1.0, 0.1, (0.92, 1.02))])
    def test_targets(self, P, h, targets):
        np.testing.assert_allclose(nw.three_user_smart_conditions(P, h), targets, atol=1e-15)

    @pytest.mark.parametrize("P, h", [(7.0, 0.2), (1.0, 0.1), (100.0, 0.05)])
    def test_engine_markov_on_witness(self, P, h):
        res = nw.three_user_feasible(P, h)
        assert res.feasible
        t1, t2 = nw.three_user_smart_conditions(P, h)
        g = res.witness
        assert g.eta1 * g.rho1 == pytest.approx(t1, abs=1e-12)
        assert g.eta2 * g.rho2 == pytest.approx(t2, abs=1e-12)
        sys = build_gaussian_system(InterferenceNetwork.symmetric(3, P, h), g)
        assert gc.mutual_information(sys, "X1", "S1_1", given="Y1") <= 1e-9
        assert gc.mutual_information(sys, "X1", "S1_2", given="Y1") <= 1e-9

    def test_non_smart_genie_leaks(self):
        P, h = 7.0, 0.2
        g = GenieSpec3Sym(0.3, 0.4, 0.1, 1.0, 1.0)
        sys = build_gaussian_system(InterferenceNetwork.symmetric(3, P, h), g)
        assert gc.mutual_information(sys, "X1", "S1_2", given="Y1") > 1e-6


class TestThreeUserFeasible:
    def test_zero_gain(self):
        res = nw.three_user_feasible(7.0, 0.0)
        assert res and nw.three_user_useful_test(7.0, 0.0, res.witness)

    @pytest.mark.parametrize("P", [0.5, 7.0, 1000.0])
    def test_tiny_gain(self, P):
        res = nw.three_user_feasible(P, 1e-3)
        assert res and nw.three_user_useful_test(P, 1e-3, res.witness)
        assert np.linalg.eigvalsh(res.witness.Sigma).min() >= -1e-10

    def test_large_gain_infeasible(self):
        res = nw.three_user_feasible(7.0, 0.45)
        assert not res and res.witness is None and res.refined

    def test_nothing_above_necessary_gain(self):
        P = 10.0
        h = nw.three_user_necessary_h(P)
        assert h * (1 + 2 * h * h * P) == pytest.approx(0.5, abs=1e-14)
        assert not nw.three_user_feasible(P, 1.02 * h)

    def test_deterministic(self):
        assert nw.three_user_feasible(7.0, 0.2) == nw.three_user_feasible(7.0, 0.2)

    @pytest.mark.parametrize("P, h", [(7.0, 0.2), (1.0, 0.1), (100.0, 0.05)])
    def test_witness_collapses_to_tin(self, P, h):
        res = nw.three_user_feasible(P, h)
        net = InterferenceNetwork.symmetric(3, P, h)
        assert nw.three_user_genie_sum_bound(P, h, res.witness) == pytest.approx(
            nw.m_user_tin_sum_rate(net), abs=1e-9)


@pytest.fixture(scope="module")
def sweep():
    return {s: nw.three_user_inr_threshold(s) for s in (1.0, 10.0, 100.0, 1000.0)}


@pytest.mark.slow
class TestThreeUserThreshold:
    def test_gain_decreases_with_snr(self, sweep):
        h = [sweep[s].h for s in sorted(sweep)]
        assert all(a > b for a, b in zip(h, h[1:]))

    def test_positive_at_low_snr(self):
        res = nw.three_user_inr_threshold(1e-3)
        assert res.h > 0 and res.inr_total > 0

    def test_witnesses_collapse(self, sweep):
        for s, res in sweep.items():
            net = InterferenceNetwork.symmetric(3, s, res.h)
            assert nw.three_user_genie_sum_bound(s, res.h, res.witness) == pytest.approx(
                nw.m_user_tin_sum_rate(net), abs=1e-9)

    def test_bracketed_by_necessary_gain(self, sweep):
        for s, res in sweep.items():
            assert res.h <= nw.three_user_necessary_h(s)
            assert not nw.three_user_feasible(s, res.h + 2e-4)

    def test_exceeds_two_user_at_10db(self, sweep):
        assert sweep[10.0].inr_total_db > tu.inr_threshold(10.0).inr_db + 1.0

    @pytest.mark.xfail(strict=True, reason="three-user INR_total threshold falls below the "
                                           "two-user value at 20 and 30 dB SNR")
    @pytest.mark.parametrize("snr", [100.0, 1000.0])
    def test_exceeds_two_user_at_high_snr(self, sweep, snr):
        assert sweep[snr].inr_total_db > tu.inr_threshold(snr).inr_db

    def test_nonpositive_snr(self):
        with pytest.raises(DomainError):
            nw.three_user_inr_threshold(0.0)
