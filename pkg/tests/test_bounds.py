import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rkf import bounds
from rkf.bounds import (
    BoundConstants,
    accumulate_comparator,
    bound_b1,
    bound_b3,
    certify,
    constants,
    lemma3_bound,
    lemma5_rhs,
    polylog_bound,
    prop1_infimum,
    xtilde_cum_bound,
)
from rkf.errors import DimensionError, DomainError, InapplicableError
from rkf.model import SystemModel
from rkf.riccati import solve_dare

from conftest import SCALAR_A, SCALAR_B, SCALAR_C, SCALAR_KK, SCALAR_RBAR, assert_close, spd

SCALAR_CONSTS = BoundConstants(
    r_bar=SCALAR_RBAR, a=SCALAR_A, b=SCALAR_B, c=SCALAR_C, sigma_kk=SCALAR_KK, sigma_qinv=2.0, sigma_h=0.31385933836549285
)


def trace_of(x0sq=0.0, v=0.0, w=0.0):
    return bounds.ComparatorTrace(
        xbar=np.zeros((1, 1)), v_t_cum=v, w_t_cum=w, xbar0_normsq=x0sq,
        comparator_losses=np.array([v]), drifts=np.array([w]),
    )


class TestConstants:
    def test_scalar(self, scalar_model):
        k = constants(scalar_model, solve_dare(scalar_model))
        for got, want in [
            (k.r_bar, SCALAR_RBAR), (k.a, SCALAR_A), (k.b, SCALAR_B),
            (k.c, SCALAR_C), (k.sigma_kk, SCALAR_KK), (k.sigma_qinv, 2.0),
        ]:
            assert_close(got, want, rtol=1e-9)

    def test_unobserved(self):
        m = SystemModel(a=[[0.5]], c=[[0.0]], q=[[0.5]], v=[[1.0]])
        k = constants(m, solve_dare(m))
        assert_close(k.r_bar, 1.0)
        assert_close(k.a, 1.5, rtol=1e-10)
        assert_close(k.b, 4 / 3)
        assert_close(k.c, 1.25 / 0.75**3)

    @pytest.mark.parametrize("gamma", [0.01, 1.0, 37.0])
    def test_rbar_one_without_observation(self, gamma):
        m = SystemModel(a=0.3 * np.eye(2), c=np.zeros((2, 2)), q=np.eye(2), v=gamma * np.eye(2))
        assert_close(constants(m, solve_dare(m)).r_bar, 1.0, rtol=1e-12)

    def test_inapplicable(self, random_models):
        for m in random_models:
            ss = solve_dare(m)
            k = constants(m, ss)
            assert k.r_bar >= 1.0
            assert k.applicable == (ss.sigma_h < 1)
            if k.applicable:
                assert k.b >= 1 and k.c >= 1
            else:
                with pytest.raises(InapplicableError):
                    bound_b1(k, trace_of(1.0, 1.0, 1.0))
            assert_close(k.sigma_kk, np.linalg.norm(ss.k_ss, 2) ** 2, rtol=1e-10)

    def test_rbar_identity(self, random_models):
        from rkf import linops

        for m in random_models:
            ss = solve_dare(m)
            vih = linops.inv_sqrtm_pd(m.v)
            extra = linops.largest_singular_value(vih @ m.c @ ss.sigma_ss @ m.c.T @ vih)
            assert abs(constants(m, ss).r_bar - 1 - extra) <= 1e-10 * max(1.0, extra)


class TestAccumulate:
    def test_zero(self, scalar_model):
        t = accumulate_comparator(scalar_model, np.zeros((4, 1)), np.zeros((3, 1)))
        assert t.v_t_cum == 0.0 and t.w_t_cum == 0.0 and t.xbar0_normsq == 0.0

    def test_following_dynamics(self):
        a = np.array([[0.5, 0.25], [0.0, 0.5]])
        m = SystemModel(a=a, c=np.eye(2), q=np.eye(2), v=np.eye(2))
        xbar = [np.array([1.0, -2.0])]
        for _ in range(5):
            xbar.append(a @ xbar[-1])
        t = accumulate_comparator(m, np.array(xbar), np.zeros((5, 2)))
        assert t.w_t_cum == 0.0
        assert t.xbar0_normsq == 5.0

    def test_scalar_example(self, scalar_model):
        # (1 - 0.5)^2 twice; observations equal C xbar
        t = accumulate_comparator(scalar_model, [[1.0], [1.0], [1.0]], [[1.0], [1.0]])
        assert t.w_t_cum == 0.5 and t.v_t_cum == 0.0

    def test_weighted_comparator_loss(self):
        v = np.array([[2.0, 0.5], [0.5, 1.0]])
        m = SystemModel(a=np.eye(1), c=[[1.0], [2.0]], q=np.eye(1), v=v)
        ys = np.array([[1.0, 0.0], [0.0, 3.0]])
        xbar = np.array([[0.5], [1.0], [0.0]])
        t = accumulate_comparator(m, xbar, ys)
        vinv = np.linalg.inv(v)
        want = sum((y - m.c @ x) @ vinv @ (y - m.c @ x) for y, x in zip(ys, xbar[:-1]))
        assert_close(t.v_t_cum, want, rtol=1e-12)

    def test_length_mismatch(self, scalar_model):
        with pytest.raises(DimensionError):
            accumulate_comparator(scalar_model, np.zeros((3, 1)), np.zeros((3, 1)))


class TestParametricBound:
    def test_zero(self):
        assert lemma3_bound(SCALAR_CONSTS, trace_of(), 0.0, 1.0) == 0.0

    @pytest.mark.parametrize("alpha", [0.01, 1.0, 50.0])
    def test_comparator_only(self, alpha):
        k = BoundConstants(1.5, 2.0, None, None, 0.0, 1.0, 2.0)
        assert lemma3_bound(k, trace_of(v=1.0), 0.0, alpha) == 1.5

    def test_scalar_example(self):
        value = lemma3_bound(SCALAR_CONSTS, trace_of(1.0, 1.0, 0.5), 2.0, 2.0)
        assert_close(value, 8.558421984903521, rtol=1e-12)

    def test_alpha_domain(self):
        with pytest.raises(DomainError):
            lemma3_bound(SCALAR_CONSTS, trace_of(), 0.0, 0.0)


class TestXtildeBound:
    def test_zero(self):
        assert xtilde_cum_bound(SCALAR_CONSTS, trace_of()) == 0.0

    def test_initial_only(self):
        k = BoundConstants(1.0, 1.5, 4 / 3, 2.9, 0.0, 2.0, 0.5)
        assert_close(xtilde_cum_bound(k, trace_of(x0sq=1.0)), 8 / 3)

    def test_scalar_example(self):
        assert_close(xtilde_cum_bound(SCALAR_CONSTS, trace_of(1.0, 1.0, 0.5)), 8.631750124335298, rtol=1e-12)


class TestB1:
    def test_zero(self):
        assert bound_b1(SCALAR_CONSTS, trace_of()) == (0.0, math.inf)

    @pytest.mark.parametrize("x0sq", [0.0, 1.0, 3.5])
    def test_stationary(self, x0sq):
        value, alpha = bound_b1(SCALAR_CONSTS, trace_of(x0sq, 1.0, 0.0))
        assert_close(value, SCALAR_RBAR * (1 + x0sq))
        assert alpha == math.inf

    def test_scalar_example(self):
        value, alpha = bound_b1(SCALAR_CONSTS, trace_of(1.0, 1.0, 0.5))
        assert_close(value, 14.346885487790336, rtol=1e-12)
        assert_close(alpha, 4.154936852549097, rtol=1e-12)

    def test_alpha_star_is_grid_infimum(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            tr = trace_of(*rng.exponential(3.0, size=3))
            value, alpha = bound_b1(SCALAR_CONSTS, tr)
            xbound = xtilde_cum_bound(SCALAR_CONSTS, tr)
            assert_close(lemma3_bound(SCALAR_CONSTS, tr, xbound, alpha), value, rtol=1e-9)
            grid = np.geomspace(alpha / 100, alpha * 100, 2001)
            vals = [lemma3_bound(SCALAR_CONSTS, tr, xbound, g) for g in grid]
            assert min(vals) >= value * (1 - 1e-9)
            assert_close(min(vals), value, rtol=1e-5)


class TestB3:
    def test_zero(self):
        assert bound_b3(SCALAR_CONSTS, trace_of())[0] == 0.0

    def test_initial_only(self):
        # (sqrt(r) + 1)^2 from the scalar oracle
        value, alpha = bound_b3(SCALAR_CONSTS, trace_of(x0sq=1.0))
        assert_close(value, 5.117408129779392, rtol=1e-12)
        assert alpha == 0.0

    def test_scalar_example(self):
        value, alpha = bound_b3(SCALAR_CONSTS, trace_of(1.0, 1.0, 0.5))
        assert_close(value, 24.188607327744943, rtol=1e-12)
        g = (math.sqrt(SCALAR_RBAR) + 1) ** 2
        assert_close(alpha, math.sqrt(1.0 / (g * 3.0)))

    def test_alpha_minimises(self):
        rng = np.random.default_rng(8)
        g = (math.sqrt(SCALAR_RBAR) + 1) ** 2
        for _ in range(50):
            x0, v, w = rng.exponential(2.0, size=3)
            value, alpha = bound_b3(SCALAR_CONSTS, trace_of(x0, v, w))
            s = x0 + v + 2.0 * w
            f = lambda al: (1 + 1 / al) * v + (1 + al) * g * s  # noqa: E731
            assert_close(f(alpha), value, rtol=1e-10)
            grid = np.geomspace(alpha / 100, alpha * 100, 1001)
            assert np.min(f(grid)) >= value * (1 - 1e-12)


class TestWeightedSplit:
    def test_b_zero(self):
        a = np.array([1.0, -2.0])
        assert lemma5_rhs(a, np.zeros(2), np.eye(2), 0.5) >= 5.0

    def test_tight(self):
        a = np.array([1.0, 2.0, -1.0])
        assert_close(lemma5_rhs(a, a, np.eye(3), 1.0), 4 * a @ a, rtol=1e-14)

    def test_example(self):
        assert_close(lemma5_rhs([1.0, 0.0], [0.0, 1.0], np.eye(2), 2.0), 4.5)

    def test_domain(self):
        with pytest.raises(DomainError):
            lemma5_rhs([1.0], [1.0], np.eye(1), -1.0)

    def test_random_draws(self):
        rng = np.random.default_rng(9)
        for _ in range(1000):
            n = int(rng.integers(1, 7))
            m = spd(rng, n, 1e-3)
            a, b = rng.standard_normal(n), rng.standard_normal(n)
            alpha = float(np.exp(rng.uniform(-5, 5)))
            lhs = (a + b) @ m @ (a + b)
            assert lhs <= lemma5_rhs(a, b, m, alpha) * (1 + 1e-12) + 1e-12


class TestInfimum:
    @pytest.mark.parametrize("a, b, value, xi", [(1, 1, 2, 1), (4, 1, 4, 2), (2, 0.5, 2, 2)])
    def test_examples(self, a, b, value, xi):
        got = prop1_infimum(a, b)
        assert_close(got[0], value, rtol=1e-14)
        assert_close(got[1], xi, rtol=1e-14)

    def test_domain(self):
        with pytest.raises(DomainError):
            prop1_infimum(0.0, 1.0)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
    def test_grid_never_beats(self, a, b):
        value, xi = prop1_infimum(a, b)
        grid = np.geomspace(xi / 100, xi * 100, 1000)
        assert np.min(a / grid + grid * b) >= value - 1e-9 * max(1.0, value)


class TestPolylog:
    def test_zero(self):
        for t in (1, 5, 100):
            assert polylog_bound(0.0, t) == (1.0, 1.0)

    def test_half(self):
        assert polylog_bound(0.5, 3) == (5.25, 12.0)

    def test_near_one(self):
        fs, bd = polylog_bound(0.9, 200)
        assert_close(bd, 1900.0, rtol=1e-12)
        # brute-force partial sum from the oracle loop
        assert_close(fs, 1899.999688236057, rtol=1e-12)
        assert fs <= bd

    def test_domain(self):
        with pytest.raises(DomainError):
            polylog_bound(1.0, 3)

    def test_monotone_and_bounded(self):
        for s in np.linspace(0, 0.95, 20):
            sums = [polylog_bound(float(s), t)[0] for t in range(0, 300, 7)]
            assert all(x <= y for x, y in zip(sums, sums[1:]))
            assert sums[-1] <= polylog_bound(float(s), 1)[1]

    def test_zeta(self):
        assert all(bounds.inverse_square_partial_sum(t) <= 2.0 for t in (1, 10, 10_000))


def test_certify_scalar(scalar_model):
    rng = np.random.default_rng(0)
    xbar = np.zeros((51, 1))
    for t in range(50):
        xbar[t + 1] = 0.5 * xbar[t] + 0.1 * rng.standard_normal(1)
    ys = xbar[:-1] + rng.standard_normal((50, 1))
    rep = certify(scalar_model, ys, xbar)
    assert rep.applicable_b1
    assert rep.b1 >= rep.l_t and rep.b3 >= rep.l_t
    assert rep.alpha_b1 > 0 and rep.alpha_b3 > 0


def test_remark4_decaying_comparator():
    # comparator follows (A + I) x with A + I stable: drift shrinks geometrically
    a = np.array([[-0.6, 0.1], [0.0, -0.5]])
    m = SystemModel(a=a, c=np.eye(2), q=np.eye(2), v=np.eye(2))
    xbar = [np.array([3.0, -2.0])]
    for _ in range(300):
        xbar.append((a + np.eye(2)) @ xbar[-1])
    xbar = np.array(xbar)
    ys = xbar[:-1] @ m.c.T
    tr_short = accumulate_comparator(m, xbar[:51], ys[:50])
    tr_long = accumulate_comparator(m, xbar, ys)
    assert tr_long.w_t_cum - tr_short.w_t_cum < 1e-6 * tr_short.w_t_cum
    rep = certify(m, ys, xbar)
    assert rep.v_t == 0.0
    assert rep.b3 >= rep.l_t
    if rep.applicable_b1:
        assert rep.b1 >= rep.l_t
